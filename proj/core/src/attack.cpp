#include "icsad/attack.hpp"

#include <nlohmann/json.hpp>

#include "icsad/errors.hpp"

namespace icsad {

AttackDirective AttackDirective::open_valve(std::size_t start, std::size_t end) {
  return {AttackId::OpenValve, start, end, true, false};
}

AttackDirective AttackDirective::stealth_valve(std::size_t start, std::size_t end) {
  return {AttackId::StealthValve, start, end, true, true};
}

void AttackDirective::validate() const {
  if (start_frame >= end_frame) throw ConfigError("attack directive has an empty interval");
  if (!force_valve_open) throw ConfigError("valve attacks must force the valve open");
  if (attack_id == AttackId::OpenValve && spoof_valve_closed)
    throw ConfigError("open-valve attack must not spoof the valve report");
  if (attack_id == AttackId::StealthValve && !spoof_valve_closed)
    throw ConfigError("stealth-valve attack must spoof the valve report");
}

void AttackScript::validate(std::size_t trace_frames) const {
  for (std::size_t i = 0; i < directives.size(); ++i) {
    const auto& d = directives[i];
    d.validate();
    if (d.start_frame >= trace_frames)
      throw ConfigError("attack directive starts at frame " + std::to_string(d.start_frame) +
                        ", beyond the trace of " + std::to_string(trace_frames) + " frames");
    if (d.end_frame != kEndOfTrace && d.end_frame > trace_frames)
      throw ConfigError("attack directive ends beyond the trace");
    if (i > 0 && d.start_frame < directives[i - 1].end_frame)
      throw ConfigError("attack directives overlap or are out of order");
  }
}

const AttackDirective* AttackScript::active(std::size_t index) const {
  for (const auto& d : directives)
    if (d.covers(index)) return &d;
  return nullptr;
}

ProcessState override_actuators(const AttackDirective& directive, const ProcessState& state,
                                std::size_t index) {
  ProcessState s = state;
  if (directive.covers(index) && directive.force_valve_open) {
    s.valve_open = true;
    s.valve_forced = true;
  }
  return s;
}

SensorFrame spoof_report(const AttackDirective& directive, const SensorFrame& frame,
                         std::size_t index) {
  SensorFrame f = frame;
  if (directive.covers(index) && directive.spoof_valve_closed) f.valve_reported = false;
  return f;
}

std::pair<ProcessState, SensorFrame> apply(const AttackDirective& directive,
                                           const ProcessState& state, const SensorFrame& frame,
                                           std::size_t index) {
  if (!directive.covers(index)) return {state, frame};
  SensorFrame f = frame;
  if (directive.force_valve_open) f.valve_reported = true;
  return {override_actuators(directive, state, index), spoof_report(directive, f, index)};
}

AttackScript canonical_scenario() {
  return AttackScript{{AttackDirective::open_valve(4200, 4800),
                       AttackDirective::stealth_valve(6500, kEndOfTrace)}};
}

namespace {

const char* attack_name(AttackId id) {
  return id == AttackId::OpenValve ? "open_valve" : "stealth_valve";
}

}  // namespace

void to_json(nlohmann::json& j, const AttackDirective& d) {
  j = nlohmann::json{{"attack_id", attack_name(d.attack_id)},
                     {"start_frame", d.start_frame},
                     {"end_frame", d.end_frame == kEndOfTrace ? nlohmann::json(nullptr)
                                                              : nlohmann::json(d.end_frame)},
                     {"force_valve_open", d.force_valve_open},
                     {"spoof_valve_closed", d.spoof_valve_closed}};
}

void from_json(const nlohmann::json& j, AttackDirective& d) {
  const auto name = j.at("attack_id").get<std::string>();
  if (name == "open_valve") {
    d.attack_id = AttackId::OpenValve;
  } else if (name == "stealth_valve") {
    d.attack_id = AttackId::StealthValve;
  } else {
    throw SchemaMismatch("unknown attack_id '" + name + "'");
  }
  d.start_frame = j.at("start_frame").get<std::size_t>();
  const auto& end = j.at("end_frame");
  d.end_frame = end.is_null() ? kEndOfTrace : end.get<std::size_t>();
  d.force_valve_open = j.at("force_valve_open").get<bool>();
  d.spoof_valve_closed = j.at("spoof_valve_closed").get<bool>();
}

void to_json(nlohmann::json& j, const AttackScript& s) {
  j = nlohmann::json{{"directives", s.directives}};
}

void from_json(const nlohmann::json& j, AttackScript& s) {
  s.directives = j.at("directives").get<std::vector<AttackDirective>>();
}

}  // namespace icsad
