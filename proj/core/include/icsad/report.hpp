#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "icsad/detect_eval.hpp"
#include "icsad/trace.hpp"

namespace icsad {

nlohmann::ordered_json to_json(const DetectionReport& report);
std::string format_table(const DetectionReport& report);

// Columns for external plotting: frame, optional named series, score,
// cutoff, label.
struct PlotData {
  std::vector<std::pair<std::string, std::vector<double>>> series;
  std::vector<double> score;
  double cutoff = 0.0;
  std::vector<Label> labels;
};

void write_plot_csv(const PlotData& data, const std::filesystem::path& path);
// Reads back a plot CSV; extra series columns are kept. Throws IoFailure,
// SchemaMismatch.
PlotData read_plot_csv(const std::filesystem::path& path);

// Self-contained SVG: one row per series, a score row with the cutoff line,
// and shaded attack intervals.
std::string render_svg(const PlotData& data, const std::string& title);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace icsad
