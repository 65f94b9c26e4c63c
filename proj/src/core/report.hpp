#pragma once

#include <string>
#include <utility>
#include <vector>

namespace forage::report {

struct Series {
  std::string label;
  std::string color;  // CSS color
  std::vector<std::pair<double, double>> points;
  bool markers = false;  // draw point markers in addition to the line
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  // x positions marked with a tick row under the plot (significance bars)
  std::vector<double> marks;
};

// Deterministic standalone SVG (fixed canvas, %.6g coordinate formatting):
// identical specs render byte-identical documents.
std::string render_chart_svg(const ChartSpec& spec);

// Renders every figure whose input CSV exists in analysis_dir into out_dir
// (score-vs-distance, leave-step-vs-distance with solver overlay, rate and
// indifference curves, quartile traces with significance marks). Missing
// inputs are skipped with a warning. Returns the number of SVGs written.
int render_reports(const std::string& analysis_dir, const std::string& out_dir);

}  // namespace forage::report
