#ifndef RETFLOW_SVG_HPP
#define RETFLOW_SVG_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace retflow {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

/// Minimal self-contained SVG line chart: axes, ticks, legend, one polyline
/// per series. Output is fully deterministic.
void write_line_plot(std::ostream& os, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::vector<PlotSeries>& series);

}  // namespace retflow

#endif
