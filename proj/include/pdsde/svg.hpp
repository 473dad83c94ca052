#pragma once

#include <optional>
#include <string>
#include <vector>

namespace pdsde {

struct PlotSeries {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> err;  // optional symmetric error bars, empty or same length as y
};

struct PlotLine {
    double slope = 0.0;
    double intercept = 0.0;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    PlotSeries points;
    std::optional<PlotLine> line;
};

// Self-contained SVG document: axes with ticks, markers, error bars and an optional line.
std::string render_svg(const PlotSpec& spec);

}  // namespace pdsde
