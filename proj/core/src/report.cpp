#include "icsad/report.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "icsad/errors.hpp"

namespace icsad {

using nlohmann::ordered_json;

namespace {

ordered_json range_json(const FrameRange& r) { return ordered_json::array({r.begin, r.end}); }

std::string fmt_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

ordered_json to_json(const DetectionReport& r) {
  ordered_json j;
  j["detector"] = r.detector;
  j["channels"] = r.channels;
  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : r.parameters) params[k] = v;
  j["parameters"] = params;
  j["cutoff"] = r.cutoff;
  j["transition_margin_frames"] = r.transition_margin_frames;
  ordered_json flagged = ordered_json::array();
  for (const auto& f : r.flagged_intervals) flagged.push_back(range_json(f));
  j["flagged_intervals"] = flagged;
  ordered_json attacks = ordered_json::array();
  for (const auto& a : r.attacks) {
    ordered_json aj;
    aj["label"] = std::string(label_name(a.label));
    aj["frames"] = range_json(a.frames);
    aj["detected"] = a.detected;
    aj["latency_frames"] = a.detected ? ordered_json(a.latency_frames) : ordered_json("missed");
    attacks.push_back(aj);
  }
  j["matched_attacks"] = attacks;
  ordered_json false_alarms = ordered_json::array();
  for (const auto& f : r.false_alarm_intervals) false_alarms.push_back(range_json(f));
  j["false_alarm_intervals"] = false_alarms;
  j["summary"] = {{"attacks", r.attacks.size()},
                  {"detected", r.detected_count()},
                  {"false_alarms", r.false_alarm_intervals.size()},
                  {"precision", r.precision},
                  {"recall", r.recall}};
  return j;
}

std::string format_table(const DetectionReport& r) {
  std::ostringstream out;
  out << "detector: " << r.detector << "  channels:";
  for (const auto& c : r.channels) out << ' ' << c;
  out << "\ncutoff: " << fmt_double(r.cutoff) << "  margin: " << r.transition_margin_frames
      << " frames\n\n";
  out << std::left << std::setw(10) << "attack" << std::setw(18) << "frames" << std::setw(10)
      << "detected" << "latency\n";
  for (const auto& a : r.attacks) {
    std::ostringstream frames;
    frames << '[' << a.frames.begin << ", " << a.frames.end << ')';
    out << std::setw(10) << label_name(a.label) << std::setw(18) << frames.str() << std::setw(10)
        << (a.detected ? "yes" : "no")
        << (a.detected ? std::to_string(a.latency_frames) : std::string("missed")) << '\n';
  }
  out << "\nflagged intervals: " << r.flagged_intervals.size()
      << "  false alarms: " << r.false_alarm_intervals.size() << '\n';
  for (const auto& f : r.false_alarm_intervals)
    out << "  false alarm [" << f.begin << ", " << f.end << ")\n";
  out << std::fixed << std::setprecision(3) << "precision: " << r.precision
      << "  recall: " << r.recall << '\n';
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write " + path.string());
  out << text;
}

void write_plot_csv(const PlotData& data, const std::filesystem::path& path) {
  std::string out = "frame";
  for (const auto& [name, _] : data.series) out += "," + name;
  out += ",score,cutoff,label\n";
  const std::string cutoff = fmt_double(data.cutoff);
  for (std::size_t i = 0; i < data.score.size(); ++i) {
    out += std::to_string(i);
    for (const auto& [_, values] : data.series) {
      out += ',';
      out += fmt_double(values[i]);
    }
    out += ',';
    out += fmt_double(data.score[i]);
    out += ',';
    out += cutoff;
    out += ',';
    out += label_name(i < data.labels.size() ? data.labels[i] : Label::Normal);
    out += '\n';
  }
  write_text(path, out);
}

PlotData read_plot_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw SchemaMismatch(path.string() + ": empty file");

  std::vector<std::string> header;
  for (std::stringstream ss(line); std::getline(ss, line, ',');) header.push_back(line);
  const auto n = header.size();
  if (n < 4 || header[0] != "frame" || header[n - 3] != "score" || header[n - 2] != "cutoff" ||
      header[n - 1] != "label")
    throw SchemaMismatch(path.string() + ": expected frame,...,score,cutoff,label header");

  PlotData data;
  for (std::size_t c = 1; c + 3 < n; ++c) data.series.emplace_back(header[c], std::vector<double>{});
  auto number = [&](const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
      throw SchemaMismatch(path.string() + ": bad number '" + s + "'");
    return v;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    for (std::stringstream ss(line); std::getline(ss, line, ',');) fields.push_back(line);
    if (fields.size() != n) throw SchemaMismatch(path.string() + ": ragged row");
    for (std::size_t c = 1; c + 3 < n; ++c) data.series[c - 1].second.push_back(number(fields[c]));
    data.score.push_back(number(fields[n - 3]));
    data.cutoff = number(fields[n - 2]);
    data.labels.push_back(parse_label(fields[n - 1]));
  }
  return data;
}

}  // namespace icsad
