#pragma once

// Standalone SVG line charts with a logarithmic y axis.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "contact_hj/errors.hpp"
#include "contact_hj/series.hpp"

namespace contact_hj {

struct PlotLine {
  std::string label;
  Series data;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct LogPlot {
  std::string title;
  std::string x_label = "t";
  std::string y_label;
  std::vector<PlotLine> lines;
  int width = 720;
  int height = 440;
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string svg_escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&':
      out += "&amp;";
      break;
    case '<':
      out += "&lt;";
      break;
    case '>':
      out += "&gt;";
      break;
    case '"':
      out += "&quot;";
      break;
    default:
      out += c;
    }
  }
  return out;
}

} // namespace detail

/// Renders the chart. Nonpositive values cannot be placed on a log axis and
/// break the polyline instead.
inline std::string render_svg(const LogPlot &plot) {
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto &line : plot.lines)
    for (const auto &s : line.data) {
      x_lo = std::min(x_lo, s.t);
      x_hi = std::max(x_hi, s.t);
      if (s.value > 0.0 && std::isfinite(s.value)) {
        y_lo = std::min(y_lo, s.value);
        y_hi = std::max(y_hi, s.value);
      }
    }
  if (!std::isfinite(x_lo)) {
    x_lo = 0.0;
    x_hi = 1.0;
  }
  if (!(x_hi > x_lo))
    x_hi = x_lo + 1.0;
  if (!std::isfinite(y_lo)) {
    y_lo = 0.1;
    y_hi = 1.0;
  }
  int d_lo = static_cast<int>(std::floor(std::log10(y_lo)));
  int d_hi = static_cast<int>(std::ceil(std::log10(y_hi)));
  if (d_hi <= d_lo)
    d_hi = d_lo + 1;

  const double left = 80, right = 20, top = 40, bottom = 60;
  const double pw = plot.width - left - right, ph = plot.height - top - bottom;
  auto sx = [&](double t) { return left + (t - x_lo) / (x_hi - x_lo) * pw; };
  auto sy = [&](double v) { return top + (d_hi - std::log10(v)) / (d_hi - d_lo) * ph; };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(plot.width) + "\" height=\"" +
       std::to_string(plot.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + detail::svg_num(plot.width / 2.0) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
       detail::svg_escape(plot.title) + "</text>\n";
  for (int d = d_lo; d <= d_hi; ++d) {
    double y = sy(std::pow(10.0, d));
    o += "<line x1=\"" + detail::svg_num(left) + "\" y1=\"" + detail::svg_num(y) + "\" x2=\"" +
         detail::svg_num(left + pw) + "\" y2=\"" + detail::svg_num(y) + "\" stroke=\"#dddddd\"/>\n";
    o += "<text x=\"" + detail::svg_num(left - 6) + "\" y=\"" + detail::svg_num(y + 4) +
         "\" text-anchor=\"end\">1e" + std::to_string(d) + "</text>\n";
  }
  for (int k = 0; k <= 5; ++k) {
    double t = x_lo + (x_hi - x_lo) * k / 5.0;
    char label[32];
    std::snprintf(label, sizeof label, "%g", t);
    o += "<text x=\"" + detail::svg_num(sx(t)) + "\" y=\"" + detail::svg_num(top + ph + 18) +
         "\" text-anchor=\"middle\">" + label + "</text>\n";
  }
  o += "<rect x=\"" + detail::svg_num(left) + "\" y=\"" + detail::svg_num(top) + "\" width=\"" +
       detail::svg_num(pw) + "\" height=\"" + detail::svg_num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  o += "<text x=\"" + detail::svg_num(left + pw / 2) + "\" y=\"" + detail::svg_num(plot.height - 14.0) +
       "\" text-anchor=\"middle\">" + detail::svg_escape(plot.x_label) + "</text>\n";
  o += "<text x=\"18\" y=\"" + detail::svg_num(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       detail::svg_num(top + ph / 2) + ")\">" + detail::svg_escape(plot.y_label) + " (log scale)</text>\n";

  for (std::size_t k = 0; k < plot.lines.size(); ++k) {
    const auto &line = plot.lines[k];
    std::vector<std::string> segments(1);
    for (const auto &s : line.data) {
      if (s.value > 0.0 && std::isfinite(s.value))
        segments.back() += detail::svg_num(sx(s.t)) + "," + detail::svg_num(sy(s.value)) + " ";
      else if (!segments.back().empty())
        segments.emplace_back();
    }
    for (const auto &pts : segments) {
      if (pts.empty())
        continue;
      o += "<polyline fill=\"none\" stroke=\"" + line.color + "\" stroke-width=\"1.6\"";
      if (line.dashed)
        o += " stroke-dasharray=\"6 4\"";
      o += " points=\"" + pts + "\"/>\n";
    }
    double ly = top + 16.0 + 16.0 * static_cast<double>(k);
    o += "<line x1=\"" + detail::svg_num(left + pw - 150) + "\" y1=\"" + detail::svg_num(ly) + "\" x2=\"" +
         detail::svg_num(left + pw - 126) + "\" y2=\"" + detail::svg_num(ly) + "\" stroke=\"" + line.color +
         "\" stroke-width=\"2\"" + (line.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    o += "<text x=\"" + detail::svg_num(left + pw - 120) + "\" y=\"" + detail::svg_num(ly + 4) + "\">" +
         detail::svg_escape(line.label) + "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

inline void write_svg(const LogPlot &plot, const std::string &path) {
  std::ofstream os(path);
  if (!os)
    throw Error("cannot open " + path + " for writing");
  os << render_svg(plot);
}

} // namespace contact_hj
