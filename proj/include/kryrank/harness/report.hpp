#pragma once

#include <string>
#include <utility>
#include <vector>

namespace kryrank::harness {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

/// A static SVG line chart: axes with ticks, one polyline per series and a
/// legend. Output depends only on the arguments.
std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series, bool log_x = false);

void write_text_file(const std::string& path, const std::string& text);

/// CSV cell for a number; "NA" for NaN.
std::string csv_number(double value);

}  // namespace kryrank::harness
