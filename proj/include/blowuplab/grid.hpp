#pragma once
#include <cstddef>
#include <string>
#include <vector>

namespace blowup {

// Radial nodes, strictly increasing. Most grids start at the origin; grids
// used for self-similar residuals may start at some z > 0.
class RadialGrid {
public:
    enum class Stretching { uniform, geometric, custom };

    explicit RadialGrid(std::vector<double> nodes, Stretching s = Stretching::custom);

    static RadialGrid uniform(double r_max, std::size_t intervals);
    static RadialGrid uniform(double r_min, double r_max, std::size_t intervals);
    // spacing grows geometrically from roughly h_first at the origin
    static RadialGrid geometric(double r_max, std::size_t intervals, double h_first);

    // copy with extra exact nodes merged in (duplicates within 1e-14 relative dropped)
    RadialGrid with_nodes(const std::vector<double>& extra) const;

    const std::vector<double>& nodes() const { return r_; }
    std::size_t size() const { return r_.size(); }
    double operator[](std::size_t i) const { return r_[i]; }
    double r_max() const { return r_.back(); }
    double h_min() const;
    bool starts_at_origin() const { return r_.front() == 0.0; }
    Stretching stretching() const { return kind_; }

private:
    std::vector<double> r_;
    Stretching kind_;
};

// Radial samples of a function of |x| at one time.
struct FieldSnapshot {
    RadialGrid grid;
    std::vector<double> values;
    std::vector<double> derivative;  // empty when not supplied
    double t = 0.0;

    FieldSnapshot(RadialGrid g, std::vector<double> v, double time = 0.0);
    bool has_derivative() const { return !derivative.empty(); }
};

// Weighted sup-norm value with the point where it is attained.
struct NormReport {
    std::string id;
    double value = 0.0;
    double arg_x = 0.0;
    double arg_t = 0.0;
};

std::string norm_reports_csv(const std::vector<NormReport>& reports);

}  // namespace blowup
