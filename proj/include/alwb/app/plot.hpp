#pragma once

// Minimal SVG charts for the report subcommand.

#include <string>
#include <utility>
#include <vector>

namespace alwb::app {

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;  ///< (x, y)
  std::vector<std::string> point_labels;          ///< optional, one per point
  bool connect = true;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 640;
  int height = 420;
};

std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace alwb::app
