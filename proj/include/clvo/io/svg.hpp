#pragma once

// Minimal deterministic SVG line/bar charts. Coordinates are printed with a
// fixed precision and nothing time-dependent is embedded.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace clvo::io {

struct Series {
  std::string name;
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  bool markers = false;
};

struct Bar {
  double lo = 0.0, hi = 0.0, height = 0.0;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<Bar> bars;
  std::vector<double> vertical_rules;
  std::optional<double> y_min, y_max;
  bool log_y = false;
};

inline const std::vector<std::string>& palette() {
  static const std::vector<std::string> p = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  return p;
}

namespace svg_detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", std::abs(v) < 0.005 ? 0.0 : v);
  return buf;
}

inline std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
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

/// Round step for about `n` ticks across [lo, hi].
inline double nice_step(double lo, double hi, int n) {
  const double raw = (hi - lo) / n;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  const double f = r < 1.5 ? 1.0 : r < 3.0 ? 2.0 : r < 7.0 ? 5.0 : 10.0;
  return f * mag;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) {
      const double pad = std::max(std::abs(lo) * 0.1, 0.5);
      lo -= pad;
      hi += pad;
    }
  }
};

}  // namespace svg_detail

/// Renders one panel at vertical offset `top` inside a 720-wide canvas.
inline std::string render_panel(const PlotSpec& p, double top, double height) {
  using namespace svg_detail;
  const double left = 80, right = 160, width = 720, pad_top = 36, pad_bottom = 52;
  const double x0 = left, x1 = width - right, y0 = top + pad_top, y1 = top + height - pad_bottom;

  Range xr, yr;
  for (const auto& s : p.series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(p.log_y ? std::log10(std::max(v, 1e-12)) : v);
  }
  for (const auto& b : p.bars) {
    xr.add(b.lo), xr.add(b.hi), yr.add(0.0), yr.add(b.height);
  }
  for (double v : p.vertical_rules) xr.add(v);
  if (p.y_min) yr.add(*p.y_min);
  if (p.y_max) yr.add(*p.y_max);
  xr.finish();
  yr.finish();
  if (p.y_min) yr.lo = *p.y_min;
  if (p.y_max) yr.hi = *p.y_max;

  const auto sx = [&](double v) { return x0 + (v - xr.lo) / (xr.hi - xr.lo) * (x1 - x0); };
  const auto sy = [&](double v) {
    const double t = p.log_y ? std::log10(std::max(v, 1e-12)) : v;
    return y1 - (t - yr.lo) / (yr.hi - yr.lo) * (y1 - y0);
  };

  std::string o;
  o += "<text x=\"" + num(width / 2) + "\" y=\"" + num(top + 22) +
       "\" text-anchor=\"middle\" font-size=\"15\">" + escape(p.title) + "</text>\n";
  o += "<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(x1 - x0) + "\" height=\"" + num(y1 - y0) +
       "\" fill=\"none\" stroke=\"#333\"/>\n";

  const double xs = nice_step(xr.lo, xr.hi, 6);
  for (double v = std::ceil(xr.lo / xs) * xs; v <= xr.hi + 1e-9 * xs; v += xs) {
    o += "<line x1=\"" + num(sx(v)) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(sx(v)) + "\" y2=\"" + num(y1 + 5) +
         "\" stroke=\"#333\"/>\n";
    o += "<text x=\"" + num(sx(v)) + "\" y=\"" + num(y1 + 18) + "\" text-anchor=\"middle\" font-size=\"11\">" +
         label(v) + "</text>\n";
  }
  const double ys = nice_step(yr.lo, yr.hi, 5);
  for (double v = std::ceil(yr.lo / ys) * ys; v <= yr.hi + 1e-9 * ys; v += ys) {
    const double py = y1 - (v - yr.lo) / (yr.hi - yr.lo) * (y1 - y0);
    o += "<line x1=\"" + num(x0 - 5) + "\" y1=\"" + num(py) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(py) +
         "\" stroke=\"#ddd\"/>\n";
    o += "<text x=\"" + num(x0 - 8) + "\" y=\"" + num(py + 4) + "\" text-anchor=\"end\" font-size=\"11\">" +
         label(p.log_y ? std::pow(10.0, v) : v) + "</text>\n";
  }
  o += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(y1 + 40) + "\" text-anchor=\"middle\" font-size=\"12\">" +
       escape(p.x_label) + "</text>\n";
  o += "<text x=\"" + num(22) + "\" y=\"" + num((y0 + y1) / 2) + "\" text-anchor=\"middle\" font-size=\"12\" " +
       "transform=\"rotate(-90 22 " + num((y0 + y1) / 2) + ")\">" + escape(p.y_label) + "</text>\n";

  for (const auto& b : p.bars) {
    o += "<rect x=\"" + num(sx(b.lo)) + "\" y=\"" + num(sy(b.height)) + "\" width=\"" + num(sx(b.hi) - sx(b.lo)) +
         "\" height=\"" + num(sy(0.0) - sy(b.height)) + "\" fill=\"#9ecae1\" stroke=\"#3182bd\"/>\n";
  }
  for (double v : p.vertical_rules) {
    o += "<line x1=\"" + num(sx(v)) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(sx(v)) + "\" y2=\"" + num(y1) +
         "\" stroke=\"#d62728\" stroke-dasharray=\"6 4\"/>\n";
    o += "<text x=\"" + num(sx(v) + 4) + "\" y=\"" + num(y0 + 14) + "\" font-size=\"11\" fill=\"#d62728\">" +
         label(v) + "</text>\n";
  }
  for (std::size_t i = 0; i < p.series.size(); ++i) {
    const Series& s = p.series[i];
    std::string pts;
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      pts += (pts.empty() ? "" : " ") + num(sx(s.x[k])) + "," + num(sy(s.y[k]));
      if (s.markers) {
        o += "<circle cx=\"" + num(sx(s.x[k])) + "\" cy=\"" + num(sy(s.y[k])) + "\" r=\"2.5\" fill=\"" + s.color +
             "\"/>\n";
      }
    }
    if (!pts.empty()) {
      o += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    }
    const double ly = y0 + 14 + 18 * static_cast<double>(i);
    o += "<line x1=\"" + num(x1 + 12) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" + num(x1 + 32) + "\" y2=\"" +
         num(ly - 4) + "\" stroke=\"" + s.color + "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + num(x1 + 38) + "\" y=\"" + num(ly) + "\" font-size=\"11\">" + escape(s.name) + "</text>\n";
  }
  return o;
}

/// Panels stacked vertically, 360 px each.
inline std::string render_svg(const std::vector<PlotSpec>& panels) {
  const double panel_h = 360;
  const double h = panel_h * static_cast<double>(panels.size());
  std::string o = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"" + svg_detail::num(h) +
                  "\" viewBox=\"0 0 720 " + svg_detail::num(h) + "\" font-family=\"sans-serif\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) o += render_panel(panels[i], panel_h * static_cast<double>(i), panel_h);
  o += "</svg>\n";
  return o;
}

}  // namespace clvo::io
