#pragma once
#include <functional>
#include <vector>

#include "blowuplab/ansatz.hpp"
#include "blowuplab/grid.hpp"

namespace blowup {

// f'' + (2/r) f' on the snapshot's grid; 3 f''(0) at the origin
FieldSnapshot radial_laplacian(const FieldSnapshot& f);

// -∂t u + Δu + u⁵ at the midpoint of two snapshots
FieldSnapshot error_S(const FieldSnapshot& u_now, const FieldSnapshot& u_prev, double dt);
// same with ∂t u supplied in closed form
FieldSnapshot error_S_analytic(const FieldSnapshot& u, const std::vector<double>& dudt);

// χ(x/(c0√(T-t))) α / (μ² + x²)^{1/2}
double leading_term(double x, double t, const ModulationPath& path);

// y²/(1+y): quadratic at the origin, linear at infinity, dominates |J|
double corrector_majorant(double y);

struct G4Probe {
    NormReport ratio;      // sup |lhs| / majorant, arg at that point
    double lhs_sup = 0.0;  // sup |η1 S_in - leading term|
    double majorant_sup = 0.0;
};
double g4_lhs(double x, double t, const ModulationPath& path);
double g4_majorant(double x, double t, const ModulationPath& path);
G4Probe bound_probe_g4(double t, const ModulationPath& path, const RadialGrid& x_grid);
// radial grid in x resolving μ down at the origin and holding every transition radius
RadialGrid g4_probe_grid(double t, const BlowupParams& p, std::size_t intervals);

// space-time sample sets: one snapshot per time, grids in y for the inner
// norms and in x for the outer ones
using Samples = std::vector<FieldSnapshot>;

NormReport norm_inner(const Samples& h, const BlowupParams& p);
NormReport norm_inner0(const Samples& phi, const BlowupParams& p);
NormReport norm_outer_rhs(const Samples& f, const BlowupParams& p);
// sup over t of (T-t)^{-δ}|h(t)|
NormReport norm_delta(const std::vector<double>& t, const std::vector<double>& h, double T, double delta);

struct OuterWeights {
    double rho1 = 0.0, rho2 = 0.0, rho3 = 1.0;
};
OuterWeights outer_weights(double x, double t, const BlowupParams& p);

// A radial field given pointwise; gradient is the r-derivative.
struct RadialField {
    std::function<double(double, double)> value;
    std::function<double(double, double)> gradient;
    bool has_gradient() const { return static_cast<bool>(gradient); }
};

struct OuterSolOptions {
    double x_max = 1.0;
    std::size_t x_intervals = 200;
    std::size_t t_levels = 24;    // geometric levels of T - t
    std::size_t pair_levels = 6;  // dyadic gaps t2 - t1 below (T - t2)/10
    int max_doublings = 6;
    double tolerance = 0.01;
};
struct OuterSolReport {
    NormReport total;
    double terms[5] = {0, 0, 0, 0, 0};
    int doublings = 0;
    bool converged = false;
};
OuterSolReport norm_outer_sol(const RadialField& psi, const BlowupParams& p, const OuterSolOptions& opt = {});

// terms of the outer right-hand side G
struct GTerms {
    double cutoff_dt = 0.0, cutoff_lap = 0.0, cutoff_grad = 0.0;
    double potential = 0.0, quintic = 0.0, error = 0.0, phi1_nonlinear = 0.0;
    double total() const { return cutoff_dt + cutoff_lap + cutoff_grad + potential + quintic + error + phi1_nonlinear; }
};
// terms of the inner right-hand side H
struct HTerms {
    double potential_phi = 0.0, potential_psi = 0.0, drift = 0.0, error = 0.0, phi1_nonlinear = 0.0;
    double total() const { return potential_phi + potential_psi + drift + error + phi1_nonlinear; }
};

// phi lives in y = x/μ0 on B_{2R}; psi and phi1 in x. An empty phi1 means zero.
GTerms rhs_G(double x, double t, const RadialField& phi, const RadialField& psi, const RadialField& phi1,
             const ModulationPath& path);
HTerms rhs_H(double y, double t, const RadialField& phi, const RadialField& psi, const RadialField& phi1,
             const ModulationPath& path);

}  // namespace blowup
