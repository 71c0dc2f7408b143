#pragma once
#include <functional>
#include <string>
#include <vector>

#include "blowuplab/abel.hpp"
#include "blowuplab/ansatz.hpp"
#include "blowuplab/grid.hpp"

namespace blowup {

struct SimControls {
    double threshold = 1e8;   // stop once sup|u| exceeds this
    double decay = 1e-6;      // stop once sup|u| falls below this
    double horizon = 100.0;
    double cfl = 0.4;         // dt <= cfl h_min²/2
    double reaction = 0.1;    // dt <= reaction sup|u|^{-4}
    bool diffusion = true;    // false leaves the pointwise ODE u' = u⁵
    bool regrid = true;
    double core_nodes = 8.0;  // target spacing near the origin is √3 sup^{-2} / core_nodes
    double core_extent = 12.0;  // refined zone radius in the same units
    // Dirichlet value at r_max; empty holds the initial value
    std::function<double(double)> boundary;
    std::size_t max_steps = 5'000'000;
};

// (1/r²)(r² u_r)_r by finite volumes, with the even reflection at the origin
std::vector<double> fv_laplacian(const std::vector<double>& r, const std::vector<double>& u);

// One classical Runge-Kutta step of u_t = Δu + u⁵ with the boundary value taken
// from the controls at t, t+dt/2, t+dt. NumericalError on a non-finite value.
FieldSnapshot step(const FieldSnapshot& u, double dt, const SimControls& c = {});

enum class Termination { blowup_threshold, horizon, decay };
std::string termination_name(Termination t);

struct TrajectorySample {
    double t = 0.0;
    double t_lo = 0.0;  // low word: t + t_lo carries the time to ~32 digits
    double sup = 0.0;
    double u0 = 0.0;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;  // one per accepted step, plus the start
    std::vector<FieldSnapshot> snapshots;   // start, each doubling of sup|u|, end
    Termination reason = Termination::horizon;
    std::size_t steps = 0;
    std::size_t halvings = 0;  // steps retried at dt/2 after an overshoot
    std::size_t regrids = 0;
    // t_last - t_i without the cancellation of the stored times
    double time_before_end(std::size_t i) const;
};

Trajectory run(const FieldSnapshot& u0, const SimControls& c = {});

struct RateFitOptions {
    double window_decades = 4.0;  // sup|u| within this many decades of its final value
    double tolerance = 0.05;      // rms of the log fit
};
struct RateFit {
    double T_star = 0.0;
    double time_to_blowup = 0.0;  // T* - t_last
    double exponent = 0.0;        // sup|u| ~ (T* - t)^{-exponent}
    double residual = 0.0;        // rms in log sup|u|
    std::size_t first = 0, last = 0;  // window sample indices
    double window_lo = 0.0, window_hi = 0.0;  // range of T* - t inside the window
};
// Joint fit of T* and the exponent. NumericalError when the window is too
// short (< 8 samples or < 2 dyadic scales of T* - t) or the fit misses the tolerance.
RateFit fit_rate(const Trajectory& traj, const RateFitOptions& opt = {});
std::string rate_fit_text(const RateFit& f);

// μ_est = √3/u(0,t)² on the strictly increasing part of the sample times
TimeSeries track_mu(const Trajectory& traj);
std::string trajectory_csv(const Trajectory& traj);

// glued_U1(·,0) on a grid out to x_max that resolves μ0(0), and the matching
// far-field boundary value glued_U1(x_max, t)
FieldSnapshot glued_initial_data(const ModulationPath& path, double x_max, std::size_t intervals);
std::function<double(double)> glued_boundary(const ModulationPath& path, double x_max);

struct InnerProbeOptions {
    double R = 20.0;
    std::size_t intervals = 320;
    double tau_max = 0.0;        // inner time horizon; 0 means 2(2R)²
    std::size_t samples = 120;   // log-spaced report times
    double e0_bracket = 1e3;     // scan e0 in [-b, b]
};
struct InnerProbeReport {
    double ratio = 0.0;          // sup (1+|y|)|φ| / (R^{(4-σ)/3} ‖h‖), max over report times
    double final_ratio = 0.0;    // same at the last report time
    double e0 = 0.0;             // bounded choice of the Z₋ amplitude
    double e0_scan = 0.0;        // found by bisection on the sign of the Z₋ growth
    double lambda_minus = 0.0;   // eigenvalue of -Δ-5w⁴ on B_2R
    double orthogonality = 0.0;  // max_t |∫ h Z0| / ‖h‖
    double h_norm = 0.0;         // sup (1+|y|)^{2+σ}|h|
};
// h(y, τ) in inner time τ, dτ = dt/μ0², with μ0 frozen and the μ0^ν factor
// divided out. Solves
// φ_τ = Δφ + 5w⁴φ + h on B_2R, φ = 0 at |y| = 2R, φ(·,0) = e0 Z₋.
// ConfigError if h is not orthogonal to Z0; NumericalError if the e0 scan
// cannot bracket the unstable growth.
InnerProbeReport inner_evolution_probe(const std::function<double(double, double)>& h, const BlowupParams& p,
                                       const InnerProbeOptions& opt = {});

}  // namespace blowup
