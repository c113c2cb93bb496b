#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "icsad/attack.hpp"
#include "icsad/process_sim.hpp"

namespace icsad {

// Per-frame ground truth. Non-zero values equal the AttackId.
enum class Label : std::uint8_t { Normal = 0, OpenValve = 1, StealthValve = 2 };

std::string_view label_name(Label label);
Label parse_label(std::string_view text);  // throws SchemaMismatch
Label label_for(AttackId id);

// Provenance carried alongside the data.
struct TraceManifest {
  PlantConfig config;
  std::optional<AttackScript> script;
  std::uint64_t seed = 0;

  bool operator==(const TraceManifest&) const = default;
};

// Samples of one PLC instance as collected by the HMI.
struct Trace {
  double sample_rate_hz = 2.0;
  int plc_id = 1;
  std::vector<double> t_s;
  std::vector<double> flow;
  std::vector<double> level1;
  std::vector<double> level2;
  std::vector<std::uint8_t> high2;
  std::vector<std::uint8_t> low2;
  std::vector<std::uint8_t> valve_reported;
  std::vector<std::uint8_t> pump_reported;
  std::vector<double> temp;
  std::vector<Label> labels;
  TraceManifest manifest;

  std::size_t size() const { return t_s.size(); }
  void push_back(const SensorFrame& frame, Label label);
  // Throws SchemaMismatch on ragged columns or a non-positive rate.
  void validate() const;

  bool operator==(const Trace&) const = default;
};

inline constexpr std::string_view kCsvHeader =
    "t_s,flow,level1,level2,high2,low2,valve_reported,pump_reported,temp,label";

// Ordered list of column names handed to the detectors.
struct ChannelSelection {
  std::vector<std::string> names{"flow", "level1"};

  static ChannelSelection parse(std::string_view comma_separated);
};

using Channels = std::vector<std::vector<double>>;

std::vector<double> column(const Trace& trace, std::string_view name);  // throws UnknownChannel
Channels select(const Trace& trace, const ChannelSelection& channels = {});

// Writes `path` (CSV) and records the manifest under the file name in
// manifest.json next to it, merging with entries already present.
void save(const Trace& trace, const std::filesystem::path& path);
// Throws IoFailure when unreadable, SchemaMismatch on unknown or missing
// columns, malformed values, or a missing manifest entry.
Trace load(const std::filesystem::path& path);

}  // namespace icsad
