#include "blowuplab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "blowuplab/format.hpp"

namespace blowup {

RadialGrid::RadialGrid(std::vector<double> nodes, Stretching s) : r_(std::move(nodes)), kind_(s) {
    if (r_.size() < 17) throw std::invalid_argument("radial grid needs at least 16 intervals");
    if (r_.front() < 0.0) throw std::invalid_argument("radial grid must be nonnegative");
    for (std::size_t i = 1; i < r_.size(); ++i) {
        if (!(r_[i] > r_[i - 1])) throw std::invalid_argument("radial grid nodes must be strictly increasing");
    }
}

RadialGrid RadialGrid::uniform(double r_max, std::size_t intervals) { return uniform(0.0, r_max, intervals); }

RadialGrid RadialGrid::uniform(double r_min, double r_max, std::size_t intervals) {
    std::vector<double> r(intervals + 1);
    const double h = (r_max - r_min) / static_cast<double>(intervals);
    for (std::size_t i = 0; i <= intervals; ++i) r[i] = r_min + h * static_cast<double>(i);
    r.back() = r_max;
    return RadialGrid(std::move(r), Stretching::uniform);
}

RadialGrid RadialGrid::geometric(double r_max, std::size_t intervals, double h_first) {
    const double n = static_cast<double>(intervals);
    if (h_first * n >= r_max) return uniform(r_max, intervals);
    // r_i = r_max (e^{s i/n} - 1)/(e^s - 1); pick s so the first spacing is h_first
    auto first = [&](double s) { return r_max * std::expm1(s / n) / std::expm1(s); };
    double lo = 1e-12, hi = 1.0;
    while (first(hi) > h_first) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (first(mid) > h_first ? lo : hi) = mid;
    }
    const double s = 0.5 * (lo + hi);
    std::vector<double> r(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) r[i] = r_max * std::expm1(s * static_cast<double>(i) / n) / std::expm1(s);
    r.front() = 0.0;
    r.back() = r_max;
    return RadialGrid(std::move(r), Stretching::geometric);
}

RadialGrid RadialGrid::with_nodes(const std::vector<double>& extra) const {
    std::vector<double> r = r_;
    for (double e : extra) {
        if (e > r_.front() && e < r_.back()) r.push_back(e);
    }
    std::sort(r.begin(), r.end());
    std::vector<double> out;
    out.reserve(r.size());
    for (double v : r) {
        if (!out.empty() && std::abs(v - out.back()) <= 1e-14 * std::max(1.0, std::abs(v))) continue;
        out.push_back(v);
    }
    return RadialGrid(std::move(out), Stretching::custom);
}

double RadialGrid::h_min() const {
    double h = r_[1] - r_[0];
    for (std::size_t i = 2; i < r_.size(); ++i) h = std::min(h, r_[i] - r_[i - 1]);
    return h;
}

FieldSnapshot::FieldSnapshot(RadialGrid g, std::vector<double> v, double time)
    : grid(std::move(g)), values(std::move(v)), t(time) {
    if (values.size() != grid.size()) throw std::invalid_argument("snapshot size does not match its grid");
}

std::string norm_reports_csv(const std::vector<NormReport>& reports) {
    std::string out = "norm_id,value,arg_x,arg_t\n";
    for (const auto& r : reports) out += r.id + "," + fmt17(r.value) + "," + fmt17(r.arg_x) + "," + fmt17(r.arg_t) + "\n";
    return out;
}

}  // namespace blowup
