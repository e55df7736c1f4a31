#include "spincool/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "spincool/errors.hpp"

namespace spincool {
namespace {

constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 55;

const char* const kPalette[] = {
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
};
constexpr int kPaletteSize = 8;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// Tick labels want the shortest representation that still separates
// neighbors; %g at 6 significant digits covers every tick the generators
// below produce.
std::string fmt_label(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct AxisRange {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;
};

// Collects finite samples along one coordinate, honoring the positivity
// requirement of a log axis.  Falls back to linear when a log axis sees no
// positive data.
AxisRange axis_range(const PlotSpec& spec, bool is_x, bool want_log) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  bool any = false;
  for (const auto& s : spec.series) {
    const auto& v = is_x ? s.x : s.y;
    const auto& w = is_x ? s.y : s.x;
    const std::size_t n = std::min(v.size(), w.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(v[i]) || !std::isfinite(w[i])) continue;
      if (want_log && v[i] <= 0.0) continue;
      lo = std::min(lo, v[i]);
      hi = std::max(hi, v[i]);
      any = true;
    }
  }
  if (want_log && !any) return axis_range(spec, is_x, false);
  AxisRange r;
  r.log = want_log;
  if (!any) return r;
  if (want_log) {
    r.lo = std::log10(lo);
    r.hi = std::log10(hi);
  } else {
    r.lo = lo;
    r.hi = hi;
  }
  if (r.hi <= r.lo) {
    const double pad = (r.lo == 0.0) ? 1.0 : 0.1 * std::abs(r.lo);
    r.lo -= pad;
    r.hi += pad;
  } else if (!want_log) {
    const double pad = 0.05 * (r.hi - r.lo);
    r.lo -= pad;
    r.hi += pad;
  } else {
    const double pad = 0.05 * (r.hi - r.lo);
    r.lo -= pad;
    r.hi += pad;
  }
  return r;
}

// Linear ticks at 1/2/5 times a power of ten, aiming for about six labels.
std::vector<double> linear_ticks(double lo, double hi) {
  std::vector<double> t;
  const double span = hi - lo;
  if (!(span > 0.0) || !std::isfinite(span)) return t;
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  double first = std::ceil(lo / step) * step;
  for (double v = first; v <= hi + 0.5 * step; v += step) {
    // Snap values that should be exact (e.g. 0) back onto the grid.
    double snapped = std::round(v / step) * step;
    if (std::abs(snapped) < 1e-12 * step) snapped = 0.0;
    t.push_back(snapped);
  }
  return t;
}

// Decade ticks for a log axis (range given in log10 units).
std::vector<double> decade_ticks(double lo, double hi) {
  std::vector<double> t;
  for (double e = std::ceil(lo); e <= std::floor(hi) + 1e-9; e += 1.0)
    t.push_back(e);
  // A range narrower than one decade still deserves a label at each end.
  if (t.empty()) {
    t.push_back(lo);
    t.push_back(hi);
  }
  return t;
}

}  // namespace

std::string render_svg_plot(const PlotSpec& spec) {
  const int w = std::max(spec.width, 200);
  const int h = std::max(spec.height, 160);
  const double x0 = kMarginLeft;
  const double x1 = w - kMarginRight;
  const double y0 = h - kMarginBottom;  // SVG y grows downward
  const double y1 = kMarginTop;

  const AxisRange rx = axis_range(spec, true, spec.log_x);
  const AxisRange ry = axis_range(spec, false, spec.log_y);

  auto map_x = [&](double v) {
    const double u = rx.log ? std::log10(v) : v;
    return x0 + (u - rx.lo) / (rx.hi - rx.lo) * (x1 - x0);
  };
  auto map_y = [&](double v) {
    const double u = ry.log ? std::log10(v) : v;
    return y0 + (u - ry.lo) / (ry.hi - ry.lo) * (y1 - y0);
  };
  auto usable = [&](double vx, double vy) {
    if (!std::isfinite(vx) || !std::isfinite(vy)) return false;
    if (rx.log && vx <= 0.0) return false;
    if (ry.log && vy <= 0.0) return false;
    return true;
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h
      << "\">\n";
  svg << "<rect width=\"" << w << "\" height=\"" << h
      << "\" fill=\"white\"/>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"12\">\n";

  // Grid and tick labels.
  const std::vector<double> xticks =
      rx.log ? decade_ticks(rx.lo, rx.hi) : linear_ticks(rx.lo, rx.hi);
  const std::vector<double> yticks =
      ry.log ? decade_ticks(ry.lo, ry.hi) : linear_ticks(ry.lo, ry.hi);
  for (double t : xticks) {
    const double value = rx.log ? std::pow(10.0, t) : t;
    const double px = map_x(value);
    if (px < x0 - 0.5 || px > x1 + 0.5) continue;
    svg << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(y1) << "\" x2=\""
        << fmt(px) << "\" y2=\"" << fmt(y0)
        << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(y0 + 18)
        << "\" text-anchor=\"middle\">" << escape_xml(fmt_label(value))
        << "</text>\n";
  }
  for (double t : yticks) {
    const double value = ry.log ? std::pow(10.0, t) : t;
    const double py = map_y(value);
    if (py < y1 - 0.5 || py > y0 + 0.5) continue;
    svg << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(py) << "\" x2=\""
        << fmt(x1) << "\" y2=\"" << fmt(py)
        << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << fmt(x0 - 8) << "\" y=\"" << fmt(py + 4)
        << "\" text-anchor=\"end\">" << escape_xml(fmt_label(value))
        << "</text>\n";
  }

  // Frame.
  svg << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y1) << "\" width=\""
      << fmt(x1 - x0) << "\" height=\"" << fmt(y0 - y1)
      << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";

  // Series.
  int color_index = 0;
  for (const auto& s : spec.series) {
    const char* color = kPalette[color_index % kPaletteSize];
    ++color_index;
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (s.line) {
      std::string pts;
      int run = 0;
      auto flush = [&]() {
        if (run >= 2)
          svg << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\""
              << color << "\" stroke-width=\"1.5\"/>\n";
        pts.clear();
        run = 0;
      };
      for (std::size_t i = 0; i < n; ++i) {
        if (!usable(s.x[i], s.y[i])) {
          flush();
          continue;
        }
        if (!pts.empty()) pts += ' ';
        pts += fmt(map_x(s.x[i]));
        pts += ',';
        pts += fmt(map_y(s.y[i]));
        ++run;
      }
      flush();
    }
    if (s.points) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!usable(s.x[i], s.y[i])) continue;
        svg << "<circle cx=\"" << fmt(map_x(s.x[i])) << "\" cy=\""
            << fmt(map_y(s.y[i])) << "\" r=\"3\" fill=\"" << color
            << "\"/>\n";
      }
    }
  }

  // Legend, top right inside the frame, only when labels exist.
  int legend_row = 0;
  color_index = 0;
  for (const auto& s : spec.series) {
    const char* color = kPalette[color_index % kPaletteSize];
    ++color_index;
    if (s.label.empty()) continue;
    const double lx = x1 - 160;
    const double ly = y1 + 16 + 18 * legend_row;
    svg << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
        << fmt(lx + 22) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fmt(lx + 28) << "\" y=\"" << fmt(ly) << "\">"
        << escape_xml(s.label) << "</text>\n";
    ++legend_row;
  }

  // Title and axis labels.
  if (!spec.title.empty())
    svg << "<text x=\"" << fmt(0.5 * (x0 + x1)) << "\" y=\"" << fmt(y1 - 14)
        << "\" text-anchor=\"middle\" font-size=\"15\">"
        << escape_xml(spec.title) << "</text>\n";
  if (!spec.x_label.empty())
    svg << "<text x=\"" << fmt(0.5 * (x0 + x1)) << "\" y=\"" << fmt(y0 + 40)
        << "\" text-anchor=\"middle\">" << escape_xml(spec.x_label)
        << "</text>\n";
  if (!spec.y_label.empty())
    svg << "<text x=\"18\" y=\"" << fmt(0.5 * (y0 + y1))
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << fmt(0.5 * (y0 + y1)) << ")\">" << escape_xml(spec.y_label)
        << "</text>\n";

  svg << "</g>\n</svg>\n";
  return svg.str();
}

void write_svg_plot(const PlotSpec& spec, const std::string& path) {
  const std::string body = render_svg_plot(spec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << body;
  out.flush();
  if (!out) throw io_error("failed writing '" + path + "'");
}

}  // namespace spincool
