#pragma once

#include <string>
#include <vector>

namespace taml {

struct PlotSeries {
    std::string label;
    std::vector<double> values;  // best-so-far indexed by evaluation ordinal
};

/// Self-contained SVG line chart of best-so-far traces; axes are labeled
/// "model runs" and "best value". No external resources are referenced.
std::string plot_traces_svg(const std::vector<PlotSeries>& series);

}  // namespace taml
