#include "wavemgt/experiments/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wavemgt/experiments/output.hpp"

namespace wavemgt::experiments {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 20, kTop = 30, kBottom = 50;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  bool log = false;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  [[nodiscard]] bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
  [[nodiscard]] double map(double v) const { return log ? std::log10(v) : v; }
  void include(double v) {
    lo = std::min(lo, map(v));
    hi = std::max(hi, map(v));
  }
  void finalize() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-300) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  [[nodiscard]] double frac(double v) const { return (map(v) - lo) / (hi - lo); }
};

std::string tick_label(double mapped, bool log) {
  if (log) return "1e" + format_double(std::round(mapped * 100) / 100);
  std::ostringstream s;
  s.precision(3);
  s << mapped;
  return s.str();
}

}  // namespace

std::string svg_line_plot(const PlotSpec& spec) {
  Axis ax{spec.log_x}, ay{spec.log_y};
  for (const auto& s : spec.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (ax.usable(s.x[i]) && ay.usable(s.y[i])) {
        ax.include(s.x[i]);
        ay.include(s.y[i]);
      }
    }
  }
  ax.finalize();
  ay.finalize();
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
    << escape(spec.title) << "</text>\n";
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = t / 4.0;
    const double x = kLeft + fx * pw, y = kTop + ph - fx * ph;
    o << "<text x=\"" << x << "\" y=\"" << kTop + ph + 15 << "\" text-anchor=\"middle\">"
      << tick_label(ax.lo + fx * (ax.hi - ax.lo), ax.log) << "</text>\n";
    o << "<text x=\"" << kLeft - 5 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
      << tick_label(ay.lo + fx * (ay.hi - ay.lo), ay.log) << "</text>\n";
  }
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">"
    << escape(spec.x_label) << "</text>\n";
  o << "<text transform=\"translate(14," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(spec.y_label) << "</text>\n";

  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& s = spec.series[k];
    const char* color = kColors[k % std::size(kColors)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
      o << kLeft + ax.frac(s.x[i]) * pw << ',' << kTop + ph - ay.frac(s.y[i]) * ph << ' ';
    }
    o << "\"/>\n";
    o << "<text x=\"" << kLeft + 8 << "\" y=\"" << kTop + 14 + 13 * k << "\" fill=\"" << color
      << "\">" << escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace wavemgt::experiments
