#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "icsad/process_sim.hpp"

namespace icsad {

enum class AttackId { OpenValve = 1, StealthValve = 2 };

inline constexpr std::size_t kEndOfTrace = std::numeric_limits<std::size_t>::max();

struct AttackDirective {
  AttackId attack_id = AttackId::OpenValve;
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;  // exclusive; kEndOfTrace runs to the last frame
  bool force_valve_open = true;
  bool spoof_valve_closed = false;

  static AttackDirective open_valve(std::size_t start, std::size_t end);
  static AttackDirective stealth_valve(std::size_t start, std::size_t end);

  bool covers(std::size_t index) const { return index >= start_frame && index < end_frame; }
  // Throws ConfigError if the flags disagree with the attack kind.
  void validate() const;

  bool operator==(const AttackDirective&) const = default;
};

struct AttackScript {
  std::vector<AttackDirective> directives;

  // Directives must be ordered, non-overlapping and start inside the trace.
  void validate(std::size_t trace_frames) const;
  const AttackDirective* active(std::size_t index) const;

  bool operator==(const AttackScript&) const = default;
};

// Forces the valve open for the coming step if the directive covers `index`.
ProcessState override_actuators(const AttackDirective& directive, const ProcessState& state,
                                std::size_t index);
// Replaces the reported valve state if the directive covers `index`.
SensorFrame spoof_report(const AttackDirective& directive, const SensorFrame& frame,
                         std::size_t index);

// Both effects at once. Identity when `index` lies outside the directive.
std::pair<ProcessState, SensorFrame> apply(const AttackDirective& directive,
                                           const ProcessState& state,
                                           const SensorFrame& frame, std::size_t index);

// Open-valve attack on [4200, 4800) and stealth attack on [6500, end).
AttackScript canonical_scenario();

void to_json(nlohmann::json& j, const AttackDirective& d);
void from_json(const nlohmann::json& j, AttackDirective& d);
void to_json(nlohmann::json& j, const AttackScript& s);
void from_json(const nlohmann::json& j, AttackScript& s);

}  // namespace icsad
