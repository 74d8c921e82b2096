#pragma once

// Minimal static SVG line plots. Output depends only on the input values.

#include <span>
#include <string>
#include <vector>

namespace lrsched::svg {

struct Series {
  std::string label;
  std::vector<double> y;  // plotted against x = 1..n
  std::string color = "#1f77b4";
};

struct Panel {
  std::string title;
  std::vector<Series> series;
  bool log_y = false;  // nonpositive values break the polyline
};

// Panels are stacked vertically.
std::string render(std::span<const Panel> panels, int width = 720, int panel_height = 260);

}  // namespace lrsched::svg
