#pragma once
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "blowuplab/ansatz.hpp"

namespace blowup {

// Heat flow of e^{-κ|x|²} at the origin: (4κt+1)^{-3/2}
double block_value(double kappa, double t);
// same at radius x
double block_value_at(double kappa, double x, double t);
// ∫_0^t B(0,s)(t-s)^{-1/2} ds = 2√t/(4κt+1)
double block_half_integral(double kappa, double t);

// Σ ℓ̃_j √t/(t+κ̃_j)
struct UpsilonCombo {
    std::vector<double> tilde_ell;
    std::vector<double> tilde_kappa;
    int order = 0;  // vanishing order at T it was built for, 0 if none
};
double upsilon_eval(const UpsilonCombo& c, double t);
double upsilon_eval_d1(const UpsilonCombo& c, double t);

struct VanishingSolve {
    std::vector<double> v;
    double condition = 0.0;  // 2-norm condition number of the matrix
    double residual = 0.0;   // |Mv - e_i| / (|M||v|)
};
// Solves M v = e_i with rows p = 1..n, M_pq = (-1)^{p-1}/(T+κ̃_q)^p. Row p is the
// coefficient of (t-T)^{p-1} in Σ v_q/(t+κ̃_q), so the combination behaves like
// (t-T)^{i-1} + O((t-T)^n). Throws NumericalError when M is numerically singular.
VanishingSolve solve_vanishing(double T, const std::vector<double>& tilde_kappa, int i);
// Combination with √t Σ ℓ̃_j/(t+κ̃_j) ~ (t-T)^order near T; needs order < n blocks.
UpsilonCombo vanishing_combo(double T, const std::vector<double>& tilde_kappa, int order);
// Combination with Σ ℓ̃_j √t/(t+κ̃_j) = (T-t)^order + O((T-t)^{n+first}) apart from the
// powers below `first`, √t included; order in first..first+n-1. first = 1 leaves the
// constant term free.
UpsilonCombo cardinal_combo(double T, const std::vector<double>& tilde_kappa, int order, int first = 0);

// Σ w_j B_j(·,t) with B_j the heat flow of e^{-κ_j|x|²}
struct BlockCombo {
    std::vector<double> weight;
    std::vector<double> kappa;
    double value(double t) const;            // at the origin
    double value_at(double x, double t) const;
    double half_integral(double t) const;    // ∫_0^t B(0,s)(t-s)^{-1/2} ds
};
// blocks whose half integral at the origin is the given Υ combination
BlockCombo blocks_of(const UpsilonCombo& c);
// Σ_i c_i (blocks of combo i), merged over equal rates
BlockCombo blocks_of(const std::vector<UpsilonCombo>& combos, const std::vector<double>& c);

// log-log slope of |Υ| against T-t for T-t in [T max(1e-5, 10^{-10/order}), T/50]; the lower
// end keeps Υ above the roundoff floor of the cancelling sum
double vanishing_order_fit(const UpsilonCombo& c, double T);

// 3D heat kernel integrated over the sphere of radius r, seen from radius x:
// ψ(x) = ∫_0^∞ K(x,r,τ) f(r) dr for radial f.
struct KernelValue {
    double value = 0.0;
    double dx = 0.0;
};
KernelValue radial_kernel(double x, double r, double tau);

// Radial source at one time s: f(r), the radii where it kinks or changes
// scale, and the outer edge of its support.
struct SourceSlice {
    std::function<double(double)> f;
    std::vector<double> breaks;
    double support = std::numeric_limits<double>::infinity();
};
// Space-time source. `scale` is the smallest spatial feature at time t, which
// decides how far the time grading goes (√t when empty).
struct RadialSource {
    std::function<SourceSlice(double)> slice;
    std::function<double(double)> scale;
};

struct DuhamelValue {
    double value = 0.0;
    double gradient = 0.0;
};
struct DuhamelOptions {
    double width = 13.0;  // r-window half width in units of √τ
    int max_levels = 400;
};
// ψ(x,t) = ∫_0^t ∫ K(x,r,t-s) f(r,s) dr ds with ψ(·,0) = 0
DuhamelValue duhamel_radial(const RadialSource& f, double x, double t, const DuhamelOptions& opt = {});
// heat flow of radial initial data u0 (with its breaks) at (x,t)
DuhamelValue heat_flow_radial(const std::function<double(double)>& u0, const std::vector<double>& breaks,
                              double support, double x, double t);

// Φ1 at the origin split into its pieces.
struct Phi1Origin {
    double bulk = 0.0;           // π^{-1/2} ∫ (t-s)^{-1/2} α(s)[1 - e^{-c0²(T-s)/(4(t-s))}] ds
    double mu_correction = 0.0;  // ∫∫ G χ α ((μ²+|ξ|²)^{-1/2} - |ξ|^{-1}) dξ ds
    double blocks = 0.0;         // Σ c_j B^{(j)}(0,t)
    double total() const { return bulk + mu_correction + blocks; }
};
struct Phi1Options {
    bool mu_correction = true;
    bool sharp_bracket = false;      // replace the bracket by 1
    std::vector<double> c;           // block weights
    std::vector<double> kappa;       // block rates, same length as c
};
// α given as a function; T and c0 fix the bracket
double phi1_bulk(const std::function<double(double)>& alpha, double T, double c0, double t, bool sharp_bracket = false);
Phi1Origin phi1_origin(const ModulationPath& path, double t, const Phi1Options& opt = {});
// the source χ(|ξ| ≤ c0√(T-s)) α(s)/(μ(s)²+|ξ|²)^{1/2} whose Duhamel integral is Φ1 without blocks
RadialSource phi1_source(const ModulationPath& path);

// Φ1(x,t) = Σ blocks + Duhamel of the leading source, as a radial field with gradient
struct Phi1Field {
    const ModulationPath* path = nullptr;
    BlockCombo blocks;
    double value(double x, double t) const;
    DuhamelValue eval(double x, double t) const;
};

enum class ProbeFamily { rhs1, rhs2, rhs3 };
std::string family_name(ProbeFamily f);

struct ProbeRow {
    std::string family;
    std::string bound_id;
    double ratio_sup = 0.0;
    double fitted_power = 0.0;   // NaN when the quantity vanishes identically
    double claimed_power = 0.0;
    std::vector<double> ratio_by_T;  // same order as ProbeOptions::T_values
};
struct ProbeOptions {
    std::vector<double> T_values{0.1, 0.01};
    int t_levels = 8;    // T - t = T 2^{-j} and t = T 2^{-j}, j = 1..t_levels
    int fit_levels = 4;  // last levels used to fit time-t bounds
    std::size_t x_points = 20;
};
// Right-hand sides: rhs1 is μ0^{ν-5/2}R^{-2-a} on |x| ≤ 2μ0R, rhs2 is
// μ0^{ν2}|x|^{-a2} on |x| ≥ μ0R, rhs3 is 1. Powers are those of μ0 once the R
// factors of the majorant are divided out.
std::vector<ProbeRow> bound_probe_appendix(ProbeFamily family, const BlowupParams& p, const ProbeOptions& opt = {});
RadialSource probe_source(ProbeFamily family, const BlowupParams& p);
std::string probe_csv(const std::vector<ProbeRow>& rows);

}  // namespace blowup
