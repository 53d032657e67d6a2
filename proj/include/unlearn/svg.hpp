#pragma once

#include <string>
#include <vector>

namespace unlearn {

// Minimal static chart writer. Figures are derived artifacts; the CSVs
// they are drawn from remain the source of truth.
struct SvgSeries {
  std::vector<std::pair<double, double>> points;
  std::string color = "#1f6fb2";
  std::string label;
  bool connect = false;  // draw a polyline through the points
};

struct SvgPlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  bool diagonal = false;  // reference y = x line
  int width = 640;
  int height = 480;
};

void write_svg_plot(const std::string& path, const SvgPlotOptions& opt,
                    const std::vector<SvgSeries>& series);

}  // namespace unlearn
