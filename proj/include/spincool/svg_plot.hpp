#pragma once

#include <string>
#include <vector>

namespace spincool {

// One curve on a plot.  Points and line segments are both optional so a
// series can render as a scatter, a line, or both.  Non-finite samples act
// as breaks: the polyline splits around them and no marker is drawn.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool points = true;
  bool line = true;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  bool log_x = false;
  bool log_y = false;
  int width = 720;
  int height = 480;
};

// Renders the plot as a standalone SVG document.  Output is deterministic:
// coordinates are fixed-precision, colors come from a fixed palette in
// series order, and nothing depends on locale or clock.  A log axis skips
// non-positive samples; if a log axis has no positive samples at all it
// falls back to linear rather than producing an empty frame.
std::string render_svg_plot(const PlotSpec& spec);

// Renders and writes to `path`, throwing io_error when the file cannot be
// created or written.
void write_svg_plot(const PlotSpec& spec, const std::string& path);

}  // namespace spincool
