#include "blowuplab/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "blowuplab/errors.hpp"
#include "blowuplab/numerics.hpp"
#include "blowuplab/profiles.hpp"

namespace blowup {

namespace {
const double kC = std::pow(3.0, 0.25);
const double kSqrt3 = std::sqrt(3.0);

double tau_of(double t, const BlowupParams& p) {
    if (!(t < p.T)) throw std::domain_error("time must satisfy t < T");
    return p.T - t;
}
}  // namespace

void BlowupParams::validate() const {
    if (k < 1) throw ConfigError("k must be a positive integer");
    if (k > 12) throw ConfigError("k must be at most 12");
    if (!(A > 0)) throw ConfigError("A must be positive");
    if (!(T > 0)) throw ConfigError("T must be positive");
    if (!(r > 0 && r1 > 0 && r2 > 0 && c0 > 0)) throw ConfigError("cutoff radii must be positive");
    if (!(beta > 0 && beta < 0.5)) throw ConfigError("beta must lie in (0, 1/2)");
}

Jet operator*(const Jet& f, const Jet& g) {
    return {f.v * g.v, f.dx * g.v + f.v * g.dx, f.dxx * g.v + 2 * f.dx * g.dx + f.v * g.dxx, f.dt * g.v + f.v * g.dt};
}
Jet operator+(const Jet& f, const Jet& g) { return {f.v + g.v, f.dx + g.dx, f.dxx + g.dxx, f.dt + g.dt}; }
Jet operator*(double c, const Jet& f) { return {c * f.v, c * f.dx, c * f.dxx, c * f.dt}; }

double mu0(double t, const BlowupParams& p) { return kSqrt3 * p.A * std::pow(tau_of(t, p), 2 * p.k); }

double mu0_d1(double t, const BlowupParams& p) {
    return -2.0 * p.k * kSqrt3 * p.A * std::pow(tau_of(t, p), 2 * p.k - 1);
}

double mu0_d2(double t, const BlowupParams& p) {
    return 2.0 * p.k * (2 * p.k - 1) * kSqrt3 * p.A * std::pow(tau_of(t, p), 2 * p.k - 2);
}

double R_of(double t, const BlowupParams& p) { return std::pow(mu0(t, p), -p.beta); }

double R_d1(double t, const BlowupParams& p) {
    return -p.beta * std::pow(mu0(t, p), -p.beta - 1.0) * mu0_d1(t, p);
}

ModulationPath::ModulationPath(const BlowupParams& p) : p_(p) {}

ModulationPath::ModulationPath(const BlowupParams& p, std::vector<double> times, std::vector<double> lambda,
                               std::vector<double> dlambda)
    : p_(p), t_(std::move(times)), lam_(std::move(lambda)), dlam_(std::move(dlambda)) {
    if (t_.size() < 2 || lam_.size() != t_.size() || dlam_.size() != t_.size())
        throw std::invalid_argument("modulation path needs matching samples (at least two)");
    for (std::size_t i = 1; i < t_.size(); ++i)
        if (!(t_[i] > t_[i - 1])) throw std::invalid_argument("modulation times must increase");
    if (t_.front() < 0 || t_.back() > p_.T) throw std::invalid_argument("modulation times must lie in [0,T]");
}

double ModulationPath::mu0(double t) const { return blowup::mu0(t, p_); }
double ModulationPath::mu0_d1(double t) const { return blowup::mu0_d1(t, p_); }
double ModulationPath::mu0_d2(double t) const { return blowup::mu0_d2(t, p_); }

namespace {
std::size_t bracket(const std::vector<double>& t, double x) {
    if (x <= t.front()) return 0;
    if (x >= t.back()) return t.size() - 2;
    return static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), x) - t.begin()) - 1;
}
}  // namespace

// cubic Hermite through (Λ, Λ') at the samples; constant extension outside
double ModulationPath::Lambda(double t) const {
    if (t_.empty()) return 0.0;
    if (t <= t_.front()) return lam_.front();
    if (t >= t_.back()) return lam_.back();
    const std::size_t i = bracket(t_, t);
    const double h = t_[i + 1] - t_[i], s = (t - t_[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * lam_[i] + (s3 - 2 * s2 + s) * h * dlam_[i] + (-2 * s3 + 3 * s2) * lam_[i + 1] +
           (s3 - s2) * h * dlam_[i + 1];
}

double ModulationPath::Lambda_d1(double t) const {
    if (t_.empty()) return 0.0;
    if (t <= t_.front()) return dlam_.front();
    if (t >= t_.back()) return dlam_.back();
    const std::size_t i = bracket(t_, t);
    const double h = t_[i + 1] - t_[i], s = (t - t_[i]) / h;
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * lam_[i] + (3 * s2 - 4 * s + 1) * h * dlam_[i] + (-6 * s2 + 6 * s) * lam_[i + 1] +
            (3 * s2 - 2 * s) * h * dlam_[i + 1]) /
           h;
}

double ModulationPath::mu(double t) const {
    const double l = 1.0 + Lambda(t);
    return mu0(t) * l * l;
}

double ModulationPath::mu_d1(double t) const {
    const double l = 1.0 + Lambda(t);
    return mu0_d1(t) * l * l + 2.0 * mu0(t) * l * Lambda_d1(t);
}

double ModulationPath::alpha(double t) const {
    return -kC / std::sqrt(mu0(t)) * (mu0_d1(t) * Lambda(t) + mu0(t) * Lambda_d1(t));
}

double cutoff_eta(double s) {
    if (s <= 1.0) return 1.0;
    if (s >= 2.0) return 0.0;
    const double q = s - 1.0;
    return 1.0 - q * q * q * (10.0 - 15.0 * q + 6.0 * q * q);
}

double cutoff_eta_d1(double s) {
    if (s <= 1.0 || s >= 2.0) return 0.0;
    const double q = s - 1.0;
    return -30.0 * q * q * (1.0 - q) * (1.0 - q);
}

double cutoff_eta_d2(double s) {
    if (s <= 1.0 || s >= 2.0) return 0.0;
    const double q = s - 1.0;
    return -60.0 * q * (1.0 - q) * (1.0 - 2.0 * q);
}

Jet scaled_cutoff(double x, double rho, double rho_t) {
    const double s = x / rho;
    const double e1 = cutoff_eta_d1(s);
    return {cutoff_eta(s), e1 / rho, cutoff_eta_d2(s) / (rho * rho), -e1 * s * rho_t / rho};
}

namespace {
// ρ = c√(T-t): ρ' = -c/(2√(T-t))
Jet parabolic_cutoff(double x, double t, double c, const BlowupParams& p) {
    const double sq = std::sqrt(tau_of(t, p));
    return scaled_cutoff(x, c * sq, -0.5 * c / sq);
}
}  // namespace

Jet CutoffSet::eta1(double x, double t) const { return parabolic_cutoff(x, t, p.r, p); }
Jet CutoffSet::etao1(double x, double t) const { return parabolic_cutoff(x, t, p.r1, p); }
Jet CutoffSet::etao2(double x, double t) const { return parabolic_cutoff(x, t, p.r2, p); }

Jet CutoffSet::etaR(double x, double t) const {
    // ρ = R μ0 = μ0^{1-β}
    const double m = mu0(t, p);
    const double rho = std::pow(m, 1.0 - p.beta);
    const double rho_t = (1.0 - p.beta) * std::pow(m, -p.beta) * mu0_d1(t, p);
    return scaled_cutoff(x, rho, rho_t);
}

Jet u_inner_jet(double x, double t, const ModulationPath& path) {
    const double m = path.mu(t), m_t = path.mu_d1(t);
    const double m0p = path.mu0_d1(t), m0pp = path.mu0_d2(t);
    const double y = x / m;
    const auto& J = CorrectorTable::shared();
    const ProfileSample js = J.sample(y);
    const double j = js.value, j1 = js.derivative, j2 = J.d2(y);
    const double sm = std::sqrt(m);
    Jet u;
    u.v = bubble_w(y) / sm + 2.0 * m0p * sm * j;
    u.dx = bubble_w_d1(y) / (m * sm) + 2.0 * m0p * j1 / sm;
    u.dxx = bubble_w_d2(y) / (m * m * sm) + 2.0 * m0p * j2 / (m * sm);
    u.dt = m_t * kernel_Z0(y) / (m * sm) + 2.0 * m0pp * sm * j + m0p * m_t / sm * (j - 2.0 * y * j1);
    return u;
}

double u_inner(double x, double t, const ModulationPath& path) { return u_inner_jet(x, t, path).v; }

// u = τ^{k-1/2} m(x/√τ), τ = T-t
Jet u_outer_jet(double x, double t, const BlowupParams& p) {
    if (!(x > 0.0)) throw std::domain_error("outer solution has a pole at x=0");
    const double tau = tau_of(t, p);
    const double sq = std::sqrt(tau);
    const double z = x / sq;
    const double m = outer_profile_m(z, p.k, p.A), m1 = outer_profile_m_d1(z, p.k, p.A);
    const double m2 = outer_profile_m_d2(z, p.k, p.A);
    const double pk = std::pow(tau, p.k - 0.5);
    Jet u;
    u.v = pk * m;
    u.dx = pk / sq * m1;
    u.dxx = pk / tau * m2;
    u.dt = pk / tau * (-(p.k - 0.5) * m + 0.5 * z * m1);
    return u;
}

double u_outer(double x, double t, const BlowupParams& p) { return u_outer_jet(x, t, p).v; }

Jet glued_U1_jet(double x, double t, const ModulationPath& path) {
    const BlowupParams& p = path.params();
    const CutoffSet cut{p};
    const double sq = std::sqrt(tau_of(t, p));
    Jet out{};
    if (x < 2.0 * p.r * sq) out = cut.eta1(x, t) * u_inner_jet(x, t, path);
    if (x > p.r1 * sq && x < 2.0 * p.r2 * sq) {
        Jet one_minus = -1.0 * cut.etao1(x, t);
        one_minus.v += 1.0;
        out = out + (one_minus * cut.etao2(x, t)) * u_outer_jet(x, t, p);
    }
    return out;
}

double glued_U1(double x, double t, const ModulationPath& path) { return glued_U1_jet(x, t, path).v; }

double quintic_remainder(double a, double b) {
    return b * b * (10.0 * a * a * a + b * (10.0 * a * a + b * (5.0 * a + b)));
}

double quintic_increment(double a, double b) {
    return b * (5.0 * a * a * a * a + b * (10.0 * a * a * a + b * (10.0 * a * a + b * (5.0 * a + b))));
}

// The bubble and corrector equations are used to cancel the large terms by
// hand; evaluating -∂t u + Δu + u⁵ on the jets loses everything to roundoff
// once μ is small.
double error_S_inner(double x, double t, const ModulationPath& path) {
    const double m = path.mu(t), m_t = path.mu_d1(t);
    const double m0p = path.mu0_d1(t), m0pp = path.mu0_d2(t);
    const double y = x / m;
    const ProfileSample js = CorrectorTable::shared().sample(y);
    const double j = js.value, j1 = js.derivative;
    const double sm = std::sqrt(m);
    const double w_part = bubble_w(y) / sm;
    const double j_part = 2.0 * m0p * sm * j;
    return -(m_t - m0p) * kernel_Z0(y) / (m * sm) - 2.0 * m0pp * sm * j -
           m0p * m_t / sm * (j - 2.0 * y * j1) + quintic_remainder(w_part, j_part);
}

double error_S_U1(double x, double t, const ModulationPath& path) {
    const BlowupParams& p = path.params();
    const CutoffSet cut{p};
    const double sq = std::sqrt(tau_of(t, p));
    double s = 0.0, ai = 0.0, ao = 0.0, quint = 0.0;
    if (x < 2.0 * p.r * sq) {
        const Jet a = cut.eta1(x, t);
        const Jet ui = u_inner_jet(x, t, path);
        ai = a.v * ui.v;
        // (ηu)⁵ - ηu⁵, zero where η = 1
        quint += std::pow(ui.v, 5) * (std::pow(a.v, 5) - a.v);
        s += a.v * error_S_inner(x, t, path) + ui.v * (-a.dt + a.laplacian(x)) + 2.0 * a.dx * ui.dx;
    }
    if (x > p.r1 * sq && x < 2.0 * p.r2 * sq) {
        Jet b = -1.0 * cut.etao1(x, t);
        b.v += 1.0;
        b = b * cut.etao2(x, t);
        const Jet uo = u_outer_jet(x, t, p);
        ao = b.v * uo.v;
        s += b.v * (-uo.dt + uo.laplacian(x)) + uo.v * (-b.dt + b.laplacian(x)) + 2.0 * b.dx * uo.dx;
    }
    // U1⁵ minus the inner quintic already inside S_in, without forming either
    return s + quintic_increment(ai, ao) + quint;
}

MatchingReport matching_report(double t, const BlowupParams& p) {
    const double tau = tau_of(t, p);
    const double sq = std::sqrt(tau);
    const ModulationPath path(p);
    const double m = mu0(t, p);
    MatchingReport rep;
    // inner: x^{-1} from the bubble tail 3^{1/4}/y, x from the corrector slope
    rep.inner_coeff_inv = kC * std::sqrt(m);
    rep.inner_coeff_lin = 2.0 * mu0_d1(t, p) * kJSlope / std::sqrt(m);
    // outer: the constant and quadratic monomials of H_{2k}(x/(2√τ))
    const HermiteProfile hp = make_hermite_profile(p.k, p.A);
    const double pref = std::sqrt(p.A) * hermite_constant(p.k) * std::pow(tau, p.k);
    rep.outer_coeff_inv = pref * hp.coeffs[0];
    rep.outer_coeff_lin = pref * hp.coeffs[2] / (4.0 * tau);
    rep.gap_inv = std::abs(rep.inner_coeff_inv - rep.outer_coeff_inv);
    rep.gap_lin = std::abs(rep.inner_coeff_lin - rep.outer_coeff_lin);
    rep.rel_gap_inv = rep.gap_inv / std::abs(rep.outer_coeff_inv);
    rep.rel_gap_lin = rep.gap_lin / std::abs(rep.outer_coeff_lin);

    rep.window_lo = 20.0 * m;
    rep.window_hi = 0.05 * sq;
    if (!(rep.window_lo < 0.5 * rep.window_hi)) throw NumericalError("matching overlap window is empty");
    std::vector<double> xs, xin, xout;
    const int n = 60;
    for (int i = 0; i < n; ++i) {
        const double x = rep.window_lo * std::pow(rep.window_hi / rep.window_lo, i / double(n - 1));
        xs.push_back(x);
        xin.push_back(x * u_inner(x, t, path));
        xout.push_back(x * u_outer(x, t, p));
    }
    // x·u ≈ c_inv + c_lin x² plus the next corrections of both expansions
    auto coef = [&](const std::vector<double>& v, double& inv, double& lin) {
        const std::vector<double> c = fit_powers(xs, v, {-2.0, 0.0, 1.0, 2.0, 4.0});
        inv = c[1];
        lin = c[3];
    };
    coef(xin, rep.fit_inner_inv, rep.fit_inner_lin);
    coef(xout, rep.fit_outer_inv, rep.fit_outer_lin);

    rep.mid_radius = std::sqrt(m * sq);
    const double ui = u_inner(rep.mid_radius, t, path), uo = u_outer(rep.mid_radius, t, p);
    rep.mid_rel_gap = std::abs(ui - uo) / std::abs(uo);
    return rep;
}

std::vector<ConstraintCheck> check_constraints(const BlowupParams& p) {
    const double k = p.k, b = p.beta, s = p.sigma, a = p.a, a2 = p.a2, n = p.nu, n2 = p.nu2;
    std::vector<ConstraintCheck> out;
    auto add = [&](const char* id, const char* expr, double margin) { out.push_back({id, expr, margin > 0, margin}); };
    auto add_closed = [&](const char* id, const char* expr, double margin) {
        out.push_back({id, expr, margin >= 0, margin});
    };
    add("G1", "1+a-sigma<0", s - 1 - a);
    add("G2", "nu-nu2-1/2+a2-beta(a2-a-4)>0", n - n2 - 0.5 + a2 - b * (a2 - a - 4));
    add("G3", "nu-beta(2-a)>0", n - b * (2 - a));
    add("G4", "nu-beta((14-2sigma)/3+a)>0", n - b * ((14 - 2 * s) / 3 + a));
    add("G5", "2nu-5/2+a2-beta(a2-2a-3)-nu2>0", 2 * n - 2.5 + a2 - b * (a2 - 2 * a - 3) - n2);
    add("G6", "a2-1/2-1/(2k)+beta(3-a2)-nu2>0", a2 - 0.5 - 1 / (2 * k) + b * (3 - a2) - n2);
    add("G7", "1/2-1/(2k)-nu2>0", 0.5 - 1 / (2 * k) - n2);
    add("G8", "1/2+(a2-3)/(4k)-nu2>0", 0.5 + (a2 - 3) / (4 * k) - n2);
    add("G9", "5(1/2-1/(4k))-nu+5/2-beta(2+a)>0", 5 * (0.5 - 1 / (4 * k)) - n + 2.5 - b * (2 + a));
    add("G10", "2-nu-1/(4k)-beta(2+a)>0", 2 - n - 1 / (4 * k) - b * (2 + a));
    add("G11", "a2+1/(4k)-3/2+beta(4-a2)-nu2>0", a2 + 1 / (4 * k) - 1.5 + b * (4 - a2) - n2);
    add("H1", "1+1/(4k)-beta(4-sigma)/3>0", 1 + 1 / (4 * k) - b * (4 - s) / 3);
    add("H2", "0<sigma<2", std::min(s, 2 - s));
    add("H3", "a>0", a);
    add("H4", "2-1/(2k)-beta(2sigma+7)/3>0", 2 - 1 / (2 * k) - b * (2 * s + 7) / 3);
    add("H5", "2-1/(2k)-beta(sigma-1)>0", 2 - 1 / (2 * k) - b * (s - 1));
    add("H6", "4-1/k-beta(3+sigma)>0", 4 - 1 / k - b * (3 + s));
    add("H7", "1+1/(4k)-nu>0", 1 + 1 / (4 * k) - n);
    add("R1", "nu2+(2-a2)/(4k)>nu-1/2+a*beta", n2 + (2 - a2) / (4 * k) - (n - 0.5 + a * b));
    add("D1", "0<beta<1/2", std::min(b, 0.5 - b));
    add("D2", "0<a<1", std::min(a, 1 - a));
    add_closed("D3", "1<=a2<=2", std::min(a2 - 1, 2 - a2));
    add("D4", "nu>0", n);
    add("D5", "nu2>0", n2);
    add("D6", "0<gamma<1", std::min(p.gamma, 1 - p.gamma));
    add("D7", "r=r1", p.r == p.r1 ? 1.0 : -std::abs(p.r - p.r1));
    add("D8", "r2>3r", p.r2 - 3 * p.r);
    return out;
}

bool all_satisfied(const std::vector<ConstraintCheck>& checks) {
    return std::all_of(checks.begin(), checks.end(), [](const ConstraintCheck& c) { return c.satisfied; });
}

}  // namespace blowup
