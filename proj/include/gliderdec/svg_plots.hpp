#pragma once

#include <string>
#include <vector>

namespace gliderdec {

/// One polyline on a panel. Empty label keeps the series out of the legend
/// (used for the faint per-ping traces). markers draws a dot at every point;
/// a series with an empty x/y pair is rejected.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;   // CSS color; empty picks from the default cycle
  double width = 1.6;  // stroke width, px
  bool dashed = false;
  double opacity = 1.0;
  bool markers = false;
  bool line = true;
};

/// One chart panel. flip_y renders the y axis increasing downward (depth
/// convention); equal_aspect forces meters-east and meters-north to the same
/// scale for map views.
struct PanelSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  bool flip_y = false;
  bool equal_aspect = false;
};

/// Renders panels side by side into a self-contained SVG document. All data
/// must be finite; throws std::logic_error otherwise. Output is byte-stable
/// for identical inputs.
std::string render_panel_plot(const std::vector<PanelSpec>& panels,
                              const std::string& title,
                              int panel_width = 430, int panel_height = 460);

void write_panel_plot(const std::vector<PanelSpec>& panels,
                      const std::string& title, const std::string& path);

}  // namespace gliderdec
