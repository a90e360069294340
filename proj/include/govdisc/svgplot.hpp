#pragma once

#include <string>
#include <vector>

namespace govdisc {

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y; // NaN breaks the line
    std::string color = "#1f77b4";
    bool dashed = false;
};

/// Static line chart; vertical rules mark layer boundaries.
struct LineChart {
    std::string title;
    std::string x_label = "time (s)";
    std::string y_label = "temperature (°C)";
    std::vector<PlotSeries> series;
    std::vector<double> vertical_rules;
    int width = 960;
    int height = 420;
};

std::string render_svg(const LineChart& chart);

} // namespace govdisc
