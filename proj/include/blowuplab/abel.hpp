#pragma once
#include <functional>
#include <string>
#include <vector>

#include "blowuplab/ansatz.hpp"
#include "blowuplab/nonlocal.hpp"
#include "blowuplab/residual.hpp"

namespace blowup {

// linear and cubic are in t; sqrt_linear is linear in √t, which holds
// √t-type behaviour at the origin exactly
enum class Interp { linear, cubic, sqrt_linear };

// Samples on 0 = t_0 < ... < t_M with an interpolant. Cubic uses Hermite
// pieces with three-point slopes.
class TimeSeries {
public:
    TimeSeries(std::vector<double> t, std::vector<double> v, Interp kind = Interp::linear);
    static TimeSeries sample(const std::function<double(double)>& f, std::vector<double> t,
                             Interp kind = Interp::linear);

    double operator()(double t) const;
    double derivative(double t) const;
    const std::vector<double>& times() const { return t_; }
    const std::vector<double>& values() const { return v_; }
    const std::vector<double>& slopes() const { return d_; }
    Interp kind() const { return kind_; }
    std::size_t size() const { return t_.size(); }
    double end() const { return t_.back(); }

private:
    std::vector<double> t_, v_, d_;
    Interp kind_;
};

// t_j = T(1 - cos(πj/M))/2: clustered at both ends
std::vector<double> cosine_times(double T, std::size_t M);
// t_j = T(j/M)²
std::vector<double> square_times(double T, std::size_t M);

// (1/Γ(½)) ∫_0^t (t-s)^{-1/2} f(s) ds at every node, exact for the interpolant.
// `kind` is the interpolation of the result.
TimeSeries half_integral(const TimeSeries& f, Interp kind);
TimeSeries half_integral(const TimeSeries& f);
// the same at an arbitrary t in [0, end]
double half_integral_at(const TimeSeries& f, double t);
// ∫_0^t h'(s)(t-s)^{-1/2} ds for the interpolant, at any t
double abel_derivative_at(const TimeSeries& h, double t);

struct AbelOptions {
    double tolerance = 1e-2;  // forward residual relative to sup|h|
};
struct AbelSolution {
    TimeSeries alpha;
    double residual = 0.0;  // sup |∫α(t-s)^{-1/2} - h| / sup|h| over the nodes
};
// α with ∫_0^t α(s)(t-s)^{-1/2} ds = h(t), α = (1/π) ∫ h'(s)(t-s)^{-1/2} ds.
// ConfigError if h(0) ≠ 0, NumericalError if the forward residual exceeds the tolerance.
AbelSolution abel_solve(const TimeSeries& h, const AbelOptions& opt = {});
// ∫_0^t α for the same equation, (1/π) ∫ h(s)(t-s)^{-1/2} ds; valid for h(0) ≠ 0
TimeSeries abel_integrated(const TimeSeries& h);

struct TaylorFit {
    std::vector<double> d;  // g ≈ Σ d_j (T-t)^j
    double window = 0.0;    // T - t range of the accepted fit
    double condition = 0.0;
    int halvings = 0;
};
// Least squares on the nodes in [T-w, T], w = T/2, T/4, ... until every coefficient
// moves by less than 1%. NumericalError when no two windows agree.
TaylorFit taylor_at_T(const TimeSeries& g, int k);

struct ReducedSolution;

struct ReducedOptions {
    std::vector<double> tilde_kappa;  // default jT, j = 1..k
    // optional re-evaluation of h from the current solution, for a capped
    // fixed-point loop; unset means one pass
    std::function<TimeSeries(const ReducedSolution&)> refresh;
    int max_iterations = 1;
    double tolerance = 1e-8;  // on sup|Δα| / sup|α| between passes
};

struct ReducedSolution {
    double T = 0.0;
    int k = 0;
    TimeSeries alpha{{0.0, 1.0}, {0.0, 0.0}};   // smooth part
    double alpha_singular = 0.0;                 // α = smooth + alpha_singular t^{-1/2}
    TimeSeries Lambda{{0.0, 1.0}, {0.0, 0.0}};
    TimeSeries Lambda_d1{{0.0, 1.0}, {0.0, 0.0}};
    std::vector<double> c;  // c_1..c_k
    std::vector<double> d;  // Taylor coefficients d_0..d_k of ∫h(s)(t-s)^{-1/2}
    std::vector<UpsilonCombo> basis;
    BlockCombo blocks;      // Σ c_j B^{(j)}
    double decay_exponent = 0.0;  // fitted order of α at T
    double alpha_at_T = 0.0;
    double forward_residual = 0.0;  // sup over nodes in [T/10,T), relative to sup|h|
    int iterations = 0;
    bool converged = true;

    double alpha_at(double t) const;
    ModulationPath path(const BlowupParams& p) const;
};

// Solves ∫_0^t α(s)(t-s)^{-1/2} ds = Σ c_j B^{(j)}(0,t) + h(t) with c chosen so that
// ∫_0^t α vanishes to order k+1 at T = h.end(). Throws NumericalError when the fitted
// decay order of α falls below k-1.
ReducedSolution reduced_solve(const TimeSeries& h, int k, const BlowupParams& p, const ReducedOptions& opt = {});
// max_j |c_j| / T^{1/2-j-ε}
double c_bound_constant(const std::vector<double>& c, double T, double eps);
std::string reduced_csv(const ReducedSolution& s);

// ∫_{B_ρ} 5w⁴Z0 dy in closed form and by quadrature
double z0_mass(double rho);
double z0_mass_quadrature(double rho);

// Right-hand side of the projected inner equation, term by term. `h()` is what
// feeds reduced_solve; `blocks` is the c-term, -π^{1/2}Σ c_j B^{(j)}(0,t).
struct OrthogonalityTerms {
    double memory = 0.0;         // ∫ (t-s)^{-1/2} α e^{-c0²(T-s)/(4(t-s))} ds
    double mu_correction = 0.0;  // -π^{1/2} D_μ
    double blocks = 0.0;
    double phi = 0.0, psi = 0.0, psi_lambda = 0.0, drift = 0.0, error = 0.0, nonlinear = 0.0;
    double mass = 0.0;       // ∫_{B_2R} 5w⁴Z0
    double projection = 0.0;  // μ0^{-1/2} ∫_{B_2R} H Z0, the full inner product
    double h() const { return memory + mu_correction + phi + psi + psi_lambda + drift + error + nonlinear; }
};
struct OrthogonalityOptions {
    std::vector<double> c, kappa;  // block weights and rates of Φ1
    RadialField phi1;              // Φ1 in x; empty means blocks plus the leading Duhamel term
    int y_subpanels = 2;  // Gauss panels per dyadic shell of B_2R
};
OrthogonalityTerms orthogonality_rhs(const RadialField& phi, const RadialField& psi, const ModulationPath& path,
                                     double t, const OrthogonalityOptions& opt = {});

}  // namespace blowup
