#ifndef MHE_SVG_HPP
#define MHE_SVG_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mhe/errors.hpp"

namespace mhe {

struct SvgSeries {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
  std::string color;  // empty picks from the default palette
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return std::string(buf);
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return std::string(buf);
}

}  // namespace detail

// Fixed-viewport (800x600) polyline plot with axes, ticks, and a legend.
// Dependency-free on purpose: the outputs are simple trajectory overlays.
inline void write_svg_plot(const std::string& path, const std::string& title,
                           const std::string& xlabel, const std::string& ylabel,
                           const std::vector<SvgSeries>& series) {
  if (series.empty()) throw ConfigError("SVG plot requires at least one series");
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  const int width = 800;
  const int height = 600;
  const double ml = 70.0, mr = 25.0, mt = 45.0, mb = 55.0;

  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    if (s.xs.size() != s.ys.size() || s.xs.empty())
      throw ConfigError("SVG series '" + s.label + "' is empty or has mismatched lengths");
    for (double x : s.xs) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
    }
    for (double y : s.ys) {
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double plot_w = width - ml - mr;
  const double plot_h = height - mt - mb;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double y) { return mt + (1.0 - (y - ymin) / (ymax - ymin)) * plot_h; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
      << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"25\" text-anchor=\"middle\" font-size=\"16\" "
         "font-family=\"sans-serif\">"
      << title << "</text>\n";

  // Axes box and ticks.
  out << "<rect x=\"" << detail::svg_num(ml) << "\" y=\"" << detail::svg_num(mt) << "\" width=\""
      << detail::svg_num(plot_w) << "\" height=\"" << detail::svg_num(plot_h)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  const int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    const double fx = xmin + (xmax - xmin) * i / ticks;
    const double gx = px(fx);
    out << "<line x1=\"" << detail::svg_num(gx) << "\" y1=\"" << detail::svg_num(mt + plot_h)
        << "\" x2=\"" << detail::svg_num(gx) << "\" y2=\"" << detail::svg_num(mt + plot_h + 5)
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << detail::svg_num(gx) << "\" y=\"" << detail::svg_num(mt + plot_h + 20)
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">"
        << detail::tick_label(fx) << "</text>\n";
    const double fy = ymin + (ymax - ymin) * i / ticks;
    const double gy = py(fy);
    out << "<line x1=\"" << detail::svg_num(ml - 5) << "\" y1=\"" << detail::svg_num(gy)
        << "\" x2=\"" << detail::svg_num(ml) << "\" y2=\"" << detail::svg_num(gy)
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << detail::svg_num(ml - 8) << "\" y=\"" << detail::svg_num(gy + 4)
        << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">"
        << detail::tick_label(fy) << "</text>\n";
  }
  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" << xlabel
      << "</text>\n"
      << "<text x=\"18\" y=\"" << height / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 18 "
      << height / 2 << ")\">" << ylabel << "</text>\n";

  // Series polylines and legend.
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const std::string color = s.color.empty() ? palette[si % 6] : s.color;
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (i) out << ' ';
      out << detail::svg_num(px(s.xs[i])) << ',' << detail::svg_num(py(s.ys[i]));
    }
    out << "\"/>\n";
    const double ly = mt + 16.0 + 18.0 * static_cast<double>(si);
    out << "<line x1=\"" << detail::svg_num(ml + plot_w - 150) << "\" y1=\"" << detail::svg_num(ly)
        << "\" x2=\"" << detail::svg_num(ml + plot_w - 125) << "\" y2=\"" << detail::svg_num(ly)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << detail::svg_num(ml + plot_w - 118) << "\" y=\"" << detail::svg_num(ly + 4)
        << "\" font-size=\"12\" font-family=\"sans-serif\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";

  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot open SVG file for writing: " + path);
  file << out.str();
  if (!file) throw ConfigError("failed writing SVG file: " + path);
}

}  // namespace mhe

#endif  // MHE_SVG_HPP
