#pragma once
#include <string>
#include <vector>

namespace blowup {

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
    bool markers = false;  // points instead of a polyline
};

struct PlotStyle {
    std::string title, x_label, y_label;
    bool log_x = false, log_y = false;
    bool slope_annotation = false;  // least-squares slope per series, in plot coordinates
    int width = 640, height = 440;
};

// slope of log y against log x (or plain, per the style axes) over the finite points
double plot_slope(const PlotSeries& s, const PlotStyle& style);

// SVG 1.1 document. ConfigError when there is no series or no plottable point
// (points with non-positive coordinates on a log axis are dropped).
std::string emit_plot(const std::vector<PlotSeries>& series, const PlotStyle& style);

}  // namespace blowup
