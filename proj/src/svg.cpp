#include "retflow/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace retflow {

namespace {

constexpr double kWidth = 760, kHeight = 480;
constexpr double kLeft = 70, kRight = 20, kTop = 44, kBottom = 54;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// round tick spacing to 1/2/5 times a power of ten
double nice_step(double range, int target) {
  if (!(range > 0.0)) return 1.0;
  double raw = range / target;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double frac = raw / mag;
  double snap = frac < 1.5 ? 1.0 : frac < 3.5 ? 2.0 : frac < 7.5 ? 5.0 : 10.0;
  return snap * mag;
}

}  // namespace

void write_line_plot(std::ostream& os, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::vector<PlotSeries>& series) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (double v : s.x) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
    for (double v : s.y) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (!(xmax > xmin)) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (!(ymax > ymin)) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * ph; };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
     << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"16\">"
     << title << "</text>\n";

  // frame
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw
     << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";

  double xstep = nice_step(xmax - xmin, 6);
  for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-9 * xstep;
       x += xstep) {
    double X = px(x);
    os << "<line x1=\"" << fmt(X) << "\" y1=\"" << fmt(kTop + ph) << "\" x2=\""
       << fmt(X) << "\" y2=\"" << fmt(kTop + ph + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(X) << "\" y=\"" << fmt(kTop + ph + 20)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"12\">"
       << fmt(x) << "</text>\n";
  }
  double ystep = nice_step(ymax - ymin, 6);
  for (double y = std::ceil(ymin / ystep) * ystep; y <= ymax + 1e-9 * ystep;
       y += ystep) {
    double Y = py(y);
    os << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(Y) << "\" x2=\""
       << fmt(kLeft) << "\" y2=\"" << fmt(Y) << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(Y) << "\" x2=\""
       << fmt(kLeft + pw) << "\" y2=\"" << fmt(Y)
       << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(Y + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
          "font-size=\"12\">"
       << fmt(y) << "</text>\n";
  }

  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 14
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"14\">"
     << xlabel << "</text>\n";
  os << "<text x=\"18\" y=\"" << kTop + ph / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"14\" transform=\"rotate(-90 18 "
     << kTop + ph / 2 << ")\">" << ylabel << "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % (sizeof kPalette / sizeof *kPalette)];
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (i) os << ' ';
      os << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i]));
    }
    os << "\"/>\n";
  }

  // legend, top-right corner of the frame
  double ly = kTop + 14;
  for (size_t si = 0; si < series.size(); ++si) {
    const char* color = kPalette[si % (sizeof kPalette / sizeof *kPalette)];
    double lx = kLeft + pw - 150;
    os << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
       << fmt(lx + 24) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << fmt(lx + 30) << "\" y=\"" << fmt(ly)
       << "\" font-family=\"sans-serif\" font-size=\"12\">"
       << series[si].label << "</text>\n";
    ly += 16;
  }
  os << "</svg>\n";
}

}  // namespace retflow
