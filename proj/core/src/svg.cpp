#include <algorithm>
#include <cstdio>
#include <sstream>

#include "icsad/report.hpp"

namespace icsad {

namespace {

constexpr double kWidth = 960.0;
constexpr double kRowHeight = 130.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kGap = 25.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void polyline(std::ostringstream& svg, const std::vector<double>& values, double y0,
              const char* colour, double cutoff, bool with_cutoff) {
  if (values.empty()) return;
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  if (with_cutoff) {
    lo = std::min(lo, cutoff);
    hi = std::max(hi, cutoff);
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double xs = plot_w / static_cast<double>(std::max<std::size_t>(1, values.size() - 1));
  auto y_of = [&](double v) { return y0 + kRowHeight - (v - lo) / (hi - lo) * kRowHeight; };

  svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"0.8\" points=\"";
  for (std::size_t i = 0; i < values.size(); ++i)
    svg << num(kLeft + static_cast<double>(i) * xs) << ',' << num(y_of(values[i])) << ' ';
  svg << "\"/>\n";
  if (with_cutoff)
    svg << "<line x1=\"" << num(kLeft) << "\" x2=\"" << num(kWidth - kRight) << "\" y1=\""
        << num(y_of(cutoff)) << "\" y2=\"" << num(y_of(cutoff))
        << "\" stroke=\"#d62728\" stroke-dasharray=\"4 3\"/>\n";
  svg << "<text x=\"4\" y=\"" << num(y0 + 10) << "\" font-size=\"10\">" << num(hi) << "</text>\n"
      << "<text x=\"4\" y=\"" << num(y0 + kRowHeight) << "\" font-size=\"10\">" << num(lo)
      << "</text>\n";
}

}  // namespace

std::string render_svg(const PlotData& data, const std::string& title) {
  const std::size_t rows = data.series.size() + 1;
  const double height = kTop + static_cast<double>(rows) * (kRowHeight + kGap);
  const std::size_t n = data.score.size();
  const double plot_w = kWidth - kLeft - kRight;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
      << num(height) << "\" font-family=\"sans-serif\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << num(kLeft) << "\" y=\"22\" font-size=\"14\">" << title << "</text>\n";

  // Attack shading spans every row.
  for (const auto& a : attack_intervals(data.labels)) {
    const double x0 = kLeft + plot_w * static_cast<double>(a.frames.begin) / static_cast<double>(n);
    const double x1 = kLeft + plot_w * static_cast<double>(a.frames.end) / static_cast<double>(n);
    svg << "<rect x=\"" << num(x0) << "\" y=\"" << num(kTop) << "\" width=\"" << num(x1 - x0)
        << "\" height=\"" << num(height - kTop) << "\" fill=\"#ffbb78\" opacity=\"0.35\"/>\n";
  }

  double y = kTop;
  for (const auto& [name, values] : data.series) {
    svg << "<text x=\"" << num(kLeft) << "\" y=\"" << num(y - 4) << "\" font-size=\"11\">" << name
        << "</text>\n";
    polyline(svg, values, y, "#1f77b4", 0.0, false);
    y += kRowHeight + kGap;
  }
  svg << "<text x=\"" << num(kLeft) << "\" y=\"" << num(y - 4)
      << "\" font-size=\"11\">anomaly score</text>\n";
  polyline(svg, data.score, y, "#2ca02c", data.cutoff, true);
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace icsad
