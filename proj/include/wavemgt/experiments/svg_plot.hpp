#pragma once

#include <string>
#include <vector>

namespace wavemgt::experiments {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
};

/// Minimal line plot. Non-finite points, and non-positive points on log
/// axes, are skipped.
std::string svg_line_plot(const PlotSpec& spec);

}  // namespace wavemgt::experiments
