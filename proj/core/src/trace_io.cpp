#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "icsad/config_file.hpp"
#include "icsad/errors.hpp"
#include "icsad/trace.hpp"

namespace icsad {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view label_name(Label label) {
  switch (label) {
    case Label::Normal: return "normal";
    case Label::OpenValve: return "attack-1";
    case Label::StealthValve: return "attack-2";
  }
  return "normal";
}

Label parse_label(std::string_view text) {
  if (text == "normal") return Label::Normal;
  if (text == "attack-1") return Label::OpenValve;
  if (text == "attack-2") return Label::StealthValve;
  throw SchemaMismatch("unknown label '" + std::string(text) + "'");
}

Label label_for(AttackId id) {
  return id == AttackId::OpenValve ? Label::OpenValve : Label::StealthValve;
}

void Trace::push_back(const SensorFrame& f, Label label) {
  t_s.push_back(f.t_s);
  flow.push_back(f.flow);
  level1.push_back(f.level1);
  level2.push_back(f.level2);
  high2.push_back(f.high2);
  low2.push_back(f.low2);
  valve_reported.push_back(f.valve_reported);
  pump_reported.push_back(f.pump_reported);
  temp.push_back(f.temp);
  labels.push_back(label);
}

void Trace::validate() const {
  const std::size_t n = t_s.size();
  const bool even = flow.size() == n && level1.size() == n && level2.size() == n &&
                    high2.size() == n && low2.size() == n && valve_reported.size() == n &&
                    pump_reported.size() == n && temp.size() == n && labels.size() == n;
  if (!even) throw SchemaMismatch("trace columns have unequal lengths");
  if (!(sample_rate_hz > 0.0)) throw SchemaMismatch("trace sample rate must be positive");
}

ChannelSelection ChannelSelection::parse(std::string_view text) {
  ChannelSelection selection;
  selection.names.clear();
  while (!text.empty()) {
    const auto comma = text.find(',');
    auto name = text.substr(0, comma);
    while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
    while (!name.empty() && name.back() == ' ') name.remove_suffix(1);
    if (!name.empty()) selection.names.emplace_back(name);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return selection;
}

namespace {

template <typename T>
std::vector<double> as_doubles(const std::vector<T>& v) {
  return {v.begin(), v.end()};
}

}  // namespace

std::vector<double> column(const Trace& trace, std::string_view name) {
  if (name == "t_s") return trace.t_s;
  if (name == "flow") return trace.flow;
  if (name == "level1") return trace.level1;
  if (name == "level2") return trace.level2;
  if (name == "high2") return as_doubles(trace.high2);
  if (name == "low2") return as_doubles(trace.low2);
  if (name == "valve_reported") return as_doubles(trace.valve_reported);
  if (name == "pump_reported") return as_doubles(trace.pump_reported);
  if (name == "temp") return trace.temp;
  throw UnknownChannel(std::string(name));
}

Channels select(const Trace& trace, const ChannelSelection& channels) {
  Channels out;
  out.reserve(channels.names.size());
  for (const auto& name : channels.names) out.push_back(column(trace, name));
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr std::array<std::string_view, 10> kColumns = {
    "t_s", "flow", "level1", "level2", "high2", "low2",
    "valve_reported", "pump_reported", "temp", "label"};

void append_double(std::string& out, double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), ptr);
}

json manifest_entry(const Trace& trace) {
  json entry{{"plc_id", trace.plc_id},
             {"sample_rate_hz", trace.sample_rate_hz},
             {"seed", trace.manifest.seed},
             {"config", trace.manifest.config}};
  entry["script"] = trace.manifest.script ? json(*trace.manifest.script) : json(nullptr);
  return entry;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaMismatch(path.string() + ": " + e.what());
  }
}

// RFC-4180 field splitting: quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

double to_double(std::string_view text, std::size_t row, std::string_view col) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end)
    throw SchemaMismatch("row " + std::to_string(row) + ", column " + std::string(col) +
                         ": not a number: '" + std::string(text) + "'");
  return v;
}

std::uint8_t to_flag(std::string_view text, std::size_t row, std::string_view col) {
  if (text == "0") return 0;
  if (text == "1") return 1;
  throw SchemaMismatch("row " + std::to_string(row) + ", column " + std::string(col) +
                       ": expected 0 or 1, got '" + std::string(text) + "'");
}

}  // namespace

void save(const Trace& trace, const fs::path& path) {
  trace.validate();
  if (path.has_parent_path()) fs::create_directories(path.parent_path());

  std::string out;
  out.reserve(trace.size() * 96 + 128);
  out.append(kCsvHeader);
  out.push_back('\n');
  for (std::size_t i = 0; i < trace.size(); ++i) {
    append_double(out, trace.t_s[i]);
    out.push_back(',');
    append_double(out, trace.flow[i]);
    out.push_back(',');
    append_double(out, trace.level1[i]);
    out.push_back(',');
    append_double(out, trace.level2[i]);
    for (auto flag : {trace.high2[i], trace.low2[i], trace.valve_reported[i],
                      trace.pump_reported[i]}) {
      out.push_back(',');
      out.push_back(flag ? '1' : '0');
    }
    out.push_back(',');
    append_double(out, trace.temp[i]);
    out.push_back(',');
    out.append(label_name(trace.labels[i]));
    out.push_back('\n');
  }
  {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoFailure("cannot write " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoFailure("write failed for " + path.string());
  }

  const fs::path manifest_path = path.parent_path() / "manifest.json";
  json manifest = json::object();
  if (fs::exists(manifest_path)) {
    try {
      manifest = read_json_file(manifest_path);
    } catch (const SchemaMismatch&) {
      manifest = json::object();
    }
  }
  manifest["traces"][path.filename().string()] = manifest_entry(trace);
  std::ofstream m(manifest_path, std::ios::trunc);
  if (!m) throw IoFailure("cannot write " + manifest_path.string());
  m << manifest.dump(2) << '\n';
}

Trace load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());

  const fs::path manifest_path = path.parent_path() / "manifest.json";
  if (!fs::exists(manifest_path))
    throw SchemaMismatch("no manifest.json next to " + path.string());
  const json manifest = read_json_file(manifest_path);
  const std::string key = path.filename().string();
  if (!manifest.contains("traces") || !manifest["traces"].contains(key))
    throw SchemaMismatch("manifest.json has no entry for " + key);

  Trace trace;
  try {
    const json& entry = manifest["traces"][key];
    trace.plc_id = entry.at("plc_id").get<int>();
    trace.sample_rate_hz = entry.at("sample_rate_hz").get<double>();
    trace.manifest.seed = entry.at("seed").get<std::uint64_t>();
    trace.manifest.config = entry.at("config").get<PlantConfig>();
    if (entry.contains("script") && !entry["script"].is_null())
      trace.manifest.script = entry["script"].get<AttackScript>();
  } catch (const json::exception& e) {
    throw SchemaMismatch("manifest entry for " + key + ": " + e.what());
  }

  std::string line;
  if (!std::getline(in, line)) throw SchemaMismatch(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);

  // Position of each known column in the file.
  std::array<std::size_t, kColumns.size()> where{};
  where.fill(SIZE_MAX);
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::size_t c = 0;
    while (c < kColumns.size() && kColumns[c] != header[i]) ++c;
    if (c == kColumns.size()) throw SchemaMismatch("unknown column '" + header[i] + "'");
    if (where[c] != SIZE_MAX) throw SchemaMismatch("duplicate column '" + header[i] + "'");
    where[c] = i;
  }
  for (std::size_t c = 0; c < kColumns.size(); ++c)
    if (where[c] == SIZE_MAX)
      throw SchemaMismatch("missing column '" + std::string(kColumns[c]) + "'");

  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size())
      throw SchemaMismatch("row " + std::to_string(row) + " has " +
                           std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(header.size()));
    auto field = [&](std::size_t c) -> const std::string& { return fields[where[c]]; };
    trace.t_s.push_back(to_double(field(0), row, kColumns[0]));
    trace.flow.push_back(to_double(field(1), row, kColumns[1]));
    trace.level1.push_back(to_double(field(2), row, kColumns[2]));
    trace.level2.push_back(to_double(field(3), row, kColumns[3]));
    trace.high2.push_back(to_flag(field(4), row, kColumns[4]));
    trace.low2.push_back(to_flag(field(5), row, kColumns[5]));
    trace.valve_reported.push_back(to_flag(field(6), row, kColumns[6]));
    trace.pump_reported.push_back(to_flag(field(7), row, kColumns[7]));
    trace.temp.push_back(to_double(field(8), row, kColumns[8]));
    trace.labels.push_back(parse_label(field(9)));
  }
  trace.validate();
  return trace;
}

}  // namespace icsad
