// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "cfrsma/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace cfrsma {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 200.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
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

/// Roughly five ticks on a 1-2-5 grid.
std::vector<double> nice_ticks(double lo, double hi) {
  if (!(hi > lo)) {
    hi = lo + 1.0;
  }
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double f : {1.0, 2.0, 5.0, 10.0}) {
    step = f * mag;
    if (step >= raw) break;
  }
  std::vector<double> ticks;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) ticks.push_back(v);
  return ticks;
}

}  // namespace

std::string render_svg(const LinePlot& plot) {
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double e = i < s.err.size() ? s.err[i] : 0.0;
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i] - e);
      y_hi = std::max(y_hi, s.y[i] + e);
    }
  }
  if (!std::isfinite(x_lo)) {
    x_lo = 0.0;
    x_hi = 1.0;
    y_lo = 0.0;
    y_hi = 1.0;
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  const double pad = 0.05 * std::max(y_hi - y_lo, 1e-9);
  y_lo = std::min(0.0, y_lo - pad);
  y_hi += pad;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto sy = [&](double y) { return kTop + ph - (y - y_lo) / (y_hi - y_lo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << escape(plot.title) << "</text>\n";
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << fmt(pw) << "\" height=\"" << fmt(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : nice_ticks(x_lo, x_hi)) {
    o << "<line x1=\"" << fmt(sx(t)) << "\" y1=\"" << fmt(kTop + ph) << "\" x2=\"" << fmt(sx(t)) << "\" y2=\""
      << fmt(kTop + ph + 5) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fmt(sx(t)) << "\" y=\"" << fmt(kTop + ph + 20) << "\" text-anchor=\"middle\">"
      << tick_label(t) << "</text>\n";
  }
  for (double t : nice_ticks(y_lo, y_hi)) {
    o << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(sy(t)) << "\" x2=\"" << fmt(kLeft + pw) << "\" y2=\""
      << fmt(sy(t)) << "\" stroke=\"#dddddd\"/>\n";
    o << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(sy(t) + 4) << "\" text-anchor=\"end\">" << tick_label(t)
      << "</text>\n";
  }
  o << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 15) << "\" text-anchor=\"middle\">"
    << escape(plot.x_label) << "</text>\n";
  o << "<text transform=\"translate(18," << fmt(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(plot.y_label) << "</text>\n";

  for (std::size_t si = 0; si < plot.series.size(); ++si) {
    const auto& s = plot.series[si];
    const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
    const char* dash = (si / 10) % 2 == 1 ? " stroke-dasharray=\"6,3\"" : "";
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"" << dash << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) o << (i ? " " : "") << fmt(sx(s.x[i])) << "," << fmt(sy(s.y[i]));
    o << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      o << "<circle cx=\"" << fmt(sx(s.x[i])) << "\" cy=\"" << fmt(sy(s.y[i])) << "\" r=\"3\" fill=\"" << color
        << "\"/>\n";
      if (i < s.err.size() && s.err[i] > 0.0) {
        o << "<line x1=\"" << fmt(sx(s.x[i])) << "\" y1=\"" << fmt(sy(s.y[i] - s.err[i])) << "\" x2=\""
          << fmt(sx(s.x[i])) << "\" y2=\"" << fmt(sy(s.y[i] + s.err[i])) << "\" stroke=\"" << color << "\"/>\n";
      }
    }
    const double ly = kTop + 10 + 18.0 * si;
    o << "<line x1=\"" << fmt(kLeft + pw + 12) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(kLeft + pw + 36)
      << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << dash << "/>\n";
    o << "<text x=\"" << fmt(kLeft + pw + 42) << "\" y=\"" << fmt(ly + 4) << "\">" << escape(s.label)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace cfrsma
