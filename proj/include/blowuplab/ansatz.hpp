#pragma once
#include <string>
#include <vector>

namespace blowup {

struct BlowupParams {
    int k = 2;
    double A = 1.0;
    double T = 0.01;
    double r = 0.02;   // inner cutoff, multiple of √(T-t)
    double r1 = 0.02;  // outer cutoffs
    double r2 = 0.1;
    double c0 = 0.04;  // sharp cutoff of the slow-decay source
    double beta = 0.1;  // R = μ0^{-β}
    double nu = 0.5;
    double sigma = 1.5;
    double a = 0.4;
    double a2 = 1.5;
    double nu2 = 0.1;
    double gamma = 0.5;  // Hölder exponent in time
    double epsilon = 0.1;

    // hard domain checks only; the exponent inequalities live in check_constraints
    void validate() const;
};

// value with first/second x-derivatives and the t-derivative
struct Jet {
    double v = 0.0, dx = 0.0, dxx = 0.0, dt = 0.0;
    // radial Laplacian; at x=0 uses 3f''(0)
    double laplacian(double x) const { return x > 0.0 ? dxx + 2.0 * dx / x : 3.0 * dxx; }
};
Jet operator*(const Jet& f, const Jet& g);
Jet operator+(const Jet& f, const Jet& g);
Jet operator*(double c, const Jet& f);

double mu0(double t, const BlowupParams& p);
double mu0_d1(double t, const BlowupParams& p);
double mu0_d2(double t, const BlowupParams& p);
double R_of(double t, const BlowupParams& p);
double R_d1(double t, const BlowupParams& p);

// Sampled Λ(t) (with Λ') and the derived μ, α. Without samples Λ ≡ 0.
class ModulationPath {
public:
    explicit ModulationPath(const BlowupParams& p);
    ModulationPath(const BlowupParams& p, std::vector<double> times, std::vector<double> lambda,
                   std::vector<double> dlambda);

    const BlowupParams& params() const { return p_; }
    const std::vector<double>& times() const { return t_; }
    bool unmodulated() const { return t_.empty(); }

    double mu0(double t) const;
    double mu0_d1(double t) const;
    double mu0_d2(double t) const;
    double Lambda(double t) const;
    double Lambda_d1(double t) const;
    double mu(double t) const;
    double mu_d1(double t) const;
    // α = -3^{1/4} μ0^{-1/2} (μ0 Λ)'
    double alpha(double t) const;

private:
    BlowupParams p_;
    std::vector<double> t_, lam_, dlam_;
};

// C² ramp: 1 on [0,1], 0 on [2,∞)
double cutoff_eta(double s);
double cutoff_eta_d1(double s);
double cutoff_eta_d2(double s);

// η(x/ρ(t)) as a jet, given ρ and ρ'
Jet scaled_cutoff(double x, double rho, double rho_t);

struct CutoffSet {
    const BlowupParams& p;
    Jet eta1(double x, double t) const;   // η(x/(r√(T-t)))
    Jet etaR(double x, double t) const;   // η(x/(R μ0))
    Jet etao1(double x, double t) const;  // η(x/(r1√(T-t)))
    Jet etao2(double x, double t) const;  // η(x/(r2√(T-t)))
};

double u_inner(double x, double t, const ModulationPath& path);
Jet u_inner_jet(double x, double t, const ModulationPath& path);

double u_outer(double x, double t, const BlowupParams& p);
Jet u_outer_jet(double x, double t, const BlowupParams& p);

double glued_U1(double x, double t, const ModulationPath& path);
Jet glued_U1_jet(double x, double t, const ModulationPath& path);

// (a+b)⁵ - a⁵ - 5a⁴b and (a+b)⁵ - a⁵, factored so small b keeps its digits
double quintic_remainder(double a, double b);
double quintic_increment(double a, double b);

// S(u_in) = -∂t u_in + Δu_in + u_in⁵ with the profile equations applied exactly
double error_S_inner(double x, double t, const ModulationPath& path);
// S(U1) = -∂t U1 + ΔU1 + U1⁵
double error_S_U1(double x, double t, const ModulationPath& path);

struct MatchingReport {
    double inner_coeff_inv = 0.0, outer_coeff_inv = 0.0;  // x^{-1} coefficient
    double inner_coeff_lin = 0.0, outer_coeff_lin = 0.0;  // x coefficient
    double gap_inv = 0.0, gap_lin = 0.0;                  // absolute gaps
    double rel_gap_inv = 0.0, rel_gap_lin = 0.0;
    // least-squares coefficients over the overlap window, as a cross-check
    double fit_inner_inv = 0.0, fit_outer_inv = 0.0, fit_inner_lin = 0.0, fit_outer_lin = 0.0;
    double window_lo = 0.0, window_hi = 0.0;
    double mid_radius = 0.0;
    double mid_rel_gap = 0.0;
};
MatchingReport matching_report(double t, const BlowupParams& p);

struct ConstraintCheck {
    std::string id;
    std::string expression;
    bool satisfied = false;
    double margin = 0.0;  // positive when satisfied
};
std::vector<ConstraintCheck> check_constraints(const BlowupParams& p);
bool all_satisfied(const std::vector<ConstraintCheck>& checks);

}  // namespace blowup
