#pragma once

// Minimal deterministic SVG line plots for tracked series.  No external
// renderer: fixed canvas, log-safe scaling, one polyline per series, legend
// in the top-right corner.  Coordinates are written with %.2f so output is
// byte-stable across platforms.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace warplab {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

namespace svg_detail {

inline std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline const char* palette(size_t i) {
  static const char* colors[] = {"#1b6ca8", "#c0392b", "#1e8449", "#8e44ad",
                                 "#d68910", "#17a2b8", "#5d6d7e"};
  return colors[i % (sizeof(colors) / sizeof(colors[0]))];
}

}  // namespace svg_detail

inline void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                           const std::vector<PlotSeries>& series) {
  const double width = 720, height = 420;
  const double ml = 70, mr = 20, mt = 40, mb = 50;

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size())
      throw std::invalid_argument("write_svg_plot: series x/y length mismatch");
    for (size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      x_lo = std::min(x_lo, s.x[k]);
      x_hi = std::max(x_hi, s.x[k]);
      y_lo = std::min(y_lo, s.y[k]);
      y_hi = std::max(y_hi, s.y[k]);
    }
  }
  if (!(x_lo <= x_hi)) { x_lo = 0; x_hi = 1; }
  if (!(y_lo <= y_hi)) { y_lo = 0; y_hi = 1; }
  if (x_hi - x_lo < 1e-300) x_hi = x_lo + 1;
  if (y_hi - y_lo < 1e-300) { y_lo -= 0.5; y_hi += 0.5; }

  auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * (width - ml - mr); };
  auto py = [&](double y) { return height - mb - (y - y_lo) / (y_hi - y_lo) * (height - mt - mb); };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_svg_plot: cannot open " + path.string());
  using svg_detail::fmt2;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << fmt2(width / 2) << "\" y=\"22\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

  // axes with four ticks each
  out << "<line x1=\"" << fmt2(ml) << "\" y1=\"" << fmt2(height - mb) << "\" x2=\""
      << fmt2(width - mr) << "\" y2=\"" << fmt2(height - mb)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << fmt2(ml) << "\" y1=\"" << fmt2(mt) << "\" x2=\"" << fmt2(ml)
      << "\" y2=\"" << fmt2(height - mb) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    double xv = x_lo + (x_hi - x_lo) * k / 4.0;
    double yv = y_lo + (y_hi - y_lo) * k / 4.0;
    out << "<text x=\"" << fmt2(px(xv)) << "\" y=\"" << fmt2(height - mb + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt2(xv) << "</text>\n";
    out << "<text x=\"" << fmt2(ml - 8) << "\" y=\"" << fmt2(py(yv) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt2(yv)
        << "</text>\n";
  }

  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    out << "<polyline fill=\"none\" stroke=\"" << svg_detail::palette(si)
        << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      if (!first) out << ' ';
      out << fmt2(px(s.x[k])) << ',' << fmt2(py(s.y[k]));
      first = false;
    }
    out << "\"/>\n";
    double ly = mt + 16.0 * static_cast<double>(si);
    out << "<line x1=\"" << fmt2(width - mr - 150) << "\" y1=\"" << fmt2(ly) << "\" x2=\""
        << fmt2(width - mr - 130) << "\" y2=\"" << fmt2(ly) << "\" stroke=\""
        << svg_detail::palette(si) << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << fmt2(width - mr - 124) << "\" y=\"" << fmt2(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace warplab
