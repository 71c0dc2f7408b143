#include "blowuplab/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "blowuplab/errors.hpp"
#include "blowuplab/numerics.hpp"

namespace blowup {

namespace {

const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Points {
    std::vector<double> x, y;  // already in plot coordinates (log10 where asked)
};

Points usable(const PlotSeries& s, const PlotStyle& st) {
    Points p;
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
        double x = s.x[i], y = s.y[i];
        if (!std::isfinite(x) || !std::isfinite(y)) continue;
        if (st.log_x) {
            if (x <= 0) continue;
            x = std::log10(x);
        }
        if (st.log_y) {
            if (y <= 0) continue;
            y = std::log10(y);
        }
        p.x.push_back(x);
        p.y.push_back(y);
    }
    return p;
}

// round numbers for ticks on a linear range
std::vector<double> ticks(double lo, double hi, bool log_axis) {
    std::vector<double> t;
    if (log_axis) {
        const double a = std::ceil(lo - 1e-9), b = std::floor(hi + 1e-9);
        const double step = std::max(1.0, std::ceil((b - a) / 8));
        for (double v = a; v <= b + 1e-9; v += step) t.push_back(v);
        return t;
    }
    const double span = hi - lo;
    const double raw = span / 6, mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return t;
}

std::string tick_label(double v, bool log_axis) {
    if (log_axis) return fmt::format("1e{}", static_cast<int>(std::lround(v)));
    return fmt::format("{:.4g}", v);
}

}  // namespace

double plot_slope(const PlotSeries& s, const PlotStyle& style) {
    const Points p = usable(s, style);
    if (p.x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    return fit_line(p.x, p.y).slope;
}

std::string emit_plot(const std::vector<PlotSeries>& series, const PlotStyle& st) {
    if (series.empty()) throw ConfigError("emit_plot: no series");
    std::vector<Points> pts;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        pts.push_back(usable(s, st));
        for (double v : pts.back().x) x0 = std::min(x0, v), x1 = std::max(x1, v);
        for (double v : pts.back().y) y0 = std::min(y0, v), y1 = std::max(y1, v);
    }
    if (!std::isfinite(x0) || !std::isfinite(y0)) throw ConfigError("emit_plot: no plottable points");
    const auto widen = [](double& a, double& b) {
        if (b - a <= 0) {
            const double d = a == 0 ? 1.0 : 0.05 * std::abs(a);
            a -= d, b += d;
        } else {
            const double d = 0.03 * (b - a);
            a -= d, b += d;
        }
    };
    widen(x0, x1);
    widen(y0, y1);

    const double W = st.width, H = st.height;
    const double L = 78, R = 150, Tm = 36, B = 52;
    const double pw = W - L - R, ph = H - Tm - B;
    const auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * pw; };
    const auto py = [&](double y) { return Tm + (y1 - y) / (y1 - y0) * ph; };

    std::string o;
    o += "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
    o += "<!DOCTYPE svg PUBLIC \"-//W3C//DTD SVG 1.1//EN\" \"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd\">\n";
    o += fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
                     st.width, st.height, st.width, st.height);
    o += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", st.width, st.height);
    if (!st.title.empty())
        o += fmt::format("<text x=\"{:.2f}\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
                         L + pw / 2, escape(st.title));
    o += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" stroke=\"black\"/>\n", L, Tm, pw, ph);

    for (double v : ticks(x0, x1, st.log_x)) {
        const double X = px(v);
        o += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#dddddd\"/>\n", X, Tm, X, Tm + ph);
        o += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                         X, Tm + ph + 16, tick_label(v, st.log_x));
    }
    for (double v : ticks(y0, y1, st.log_y)) {
        const double Y = py(v);
        o += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#dddddd\"/>\n", L, Y, L + pw, Y);
        o += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
                         L - 6, Y + 4, tick_label(v, st.log_y));
    }
    if (!st.x_label.empty())
        o += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
                         L + pw / 2, H - 12, escape(st.x_label));
    if (!st.y_label.empty())
        o += fmt::format("<text x=\"16\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
                         "transform=\"rotate(-90 16 {:.2f})\">{}</text>\n",
                         Tm + ph / 2, Tm + ph / 2, escape(st.y_label));

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& p = pts[k];
        const char* col = palette[k % 6];
        if (series[k].markers) {
            for (std::size_t i = 0; i < p.x.size(); ++i)
                o += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2.5\" fill=\"{}\"/>\n", px(p.x[i]), py(p.y[i]), col);
        } else if (!p.x.empty()) {
            o += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"", col);
            for (std::size_t i = 0; i < p.x.size(); ++i) o += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", px(p.x[i]), py(p.y[i]));
            o += "\"/>\n";
        }
        const double ly = Tm + 14 + 18.0 * k;
        o += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" stroke-width=\"2\"/>\n", L + pw + 10,
                         ly - 4, L + pw + 28, ly - 4, col);
        std::string label = escape(series[k].label);
        if (st.slope_annotation) label += fmt::format(" (slope {:.4g})", plot_slope(series[k], st));
        o += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n", L + pw + 32, ly,
                         label);
    }
    o += "</svg>\n";
    return o;
}

}  // namespace blowup
