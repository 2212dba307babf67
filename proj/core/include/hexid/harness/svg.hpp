#pragma once

#include <string>
#include <vector>

namespace hexid::harness {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

/// Standalone SVG line chart with axes, tick labels and a legend. Non-finite
/// points are skipped.
std::string line_plot_svg(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<Series>& series,
                          int width = 900, int height = 420);

}  // namespace hexid::harness
