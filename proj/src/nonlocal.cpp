#include "blowuplab/nonlocal.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "blowuplab/errors.hpp"
#include "blowuplab/format.hpp"
#include "blowuplab/numerics.hpp"

namespace blowup {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

// 20-point Gauss-Legendre on [-1,1], expanded from boost's half table
struct GL20 {
    std::array<double, 20> x{}, w{};
    GL20() {
        using G = boost::math::quadrature::gauss<double, 20>;
        const auto& a = G::abscissa();
        const auto& wt = G::weights();
        for (std::size_t i = 0; i < 10; ++i) {
            x[i] = -a[i];
            w[i] = wt[i];
            x[19 - i] = a[i];
            w[19 - i] = wt[i];
        }
    }
};
const GL20& gl() {
    static const GL20 g;
    return g;
}

}  // namespace

double block_value(double kappa, double t) {
    if (t < 0) throw std::domain_error("block needs t >= 0");
    return std::pow(4 * kappa * t + 1, -1.5);
}

double block_value_at(double kappa, double x, double t) {
    const double d = 4 * kappa * t + 1;
    return std::pow(d, -1.5) * std::exp(-kappa * x * x / d);
}

double block_half_integral(double kappa, double t) {
    if (t < 0) throw std::domain_error("block needs t >= 0");
    return 2 * std::sqrt(t) / (4 * kappa * t + 1);
}

double upsilon_eval(const UpsilonCombo& c, double t) {
    double s = 0.0;
    for (std::size_t j = 0; j < c.tilde_ell.size(); ++j) s += c.tilde_ell[j] / (t + c.tilde_kappa[j]);
    return std::sqrt(t) * s;
}

double upsilon_eval_d1(const UpsilonCombo& c, double t) {
    double s = 0.0, ds = 0.0;
    for (std::size_t j = 0; j < c.tilde_ell.size(); ++j) {
        const double d = t + c.tilde_kappa[j];
        s += c.tilde_ell[j] / d;
        ds -= c.tilde_ell[j] / (d * d);
    }
    return 0.5 / std::sqrt(t) * s + std::sqrt(t) * ds;
}

VanishingSolve solve_vanishing(double T, const std::vector<double>& tk, int i) {
    const int n = static_cast<int>(tk.size());
    if (n == 0) throw ConfigError("no blocks given");
    if (i < 1 || i > n) throw ConfigError("vanishing index must lie in 1..number of blocks");
    for (int a = 0; a < n; ++a) {
        if (!(tk[a] > 0)) throw ConfigError("block rates must be positive");
        for (int b = 0; b < a; ++b)
            if (tk[a] == tk[b]) throw ConfigError("block rates must be distinct");
    }
    Eigen::MatrixXd M(n, n);
    for (int p = 1; p <= n; ++p)
        for (int q = 0; q < n; ++q) M(p - 1, q) = ((p - 1) % 2 ? -1.0 : 1.0) / std::pow(T + tk[q], p);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(i - 1) = 1.0;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    VanishingSolve out;
    out.condition = sv(n - 1) > 0 ? sv(0) / sv(n - 1) : inf;
    if (!(out.condition < 1e15))
        throw NumericalError("vanishing system is numerically singular (condition " + fmt17(out.condition) + ")");
    Eigen::VectorXd v = M.fullPivLu().solve(e);
    // one step of refinement
    v += M.fullPivLu().solve(e - M * v);
    out.residual = (M * v - e).norm() / (M.norm() * v.norm());
    out.v.assign(v.data(), v.data() + n);
    return out;
}

UpsilonCombo vanishing_combo(double T, const std::vector<double>& tk, int order) {
    if (order < 0 || order >= static_cast<int>(tk.size()))
        throw ConfigError("vanishing order must be below the number of blocks");
    UpsilonCombo c;
    c.tilde_ell = solve_vanishing(T, tk, order + 1).v;
    c.tilde_kappa = tk;
    c.order = order;
    return c;
}

UpsilonCombo cardinal_combo(double T, const std::vector<double>& tk, int order, int first) {
    const int n = static_cast<int>(tk.size());
    if (first < 0 || order < first || order >= first + n)
        throw ConfigError("cardinal order outside the range the blocks can fix");
    for (int a = 0; a < n; ++a) {
        if (!(tk[a] > 0)) throw ConfigError("block rates must be positive");
        for (int b = 0; b < a; ++b)
            if (tk[a] == tk[b]) throw ConfigError("block rates must be distinct");
    }
    // δ = T-t: √t = √T Σ binom(½,m)(-δ/T)^m and 1/(t+κ̃) = Σ δ^m/(T+κ̃)^{m+1}
    const int top = first + n;
    std::vector<double> root(top);
    double b = 1.0;
    for (int m = 0; m < top; ++m) {
        root[m] = std::sqrt(T) * b * std::pow(-1.0 / T, m);
        b *= (0.5 - m) / (m + 1);
    }
    Eigen::MatrixXd N(n, n);
    for (int q = 0; q < n; ++q)
        for (int r = 0; r < n; ++r) {
            const int m = first + r;
            double sum = 0.0;
            for (int j = 0; j <= m; ++j) sum += root[j] / std::pow(T + tk[q], m - j + 1);
            N(r, q) = sum;
        }
    // rows differ by powers of T; equilibrate before solving
    Eigen::VectorXd rs = N.rowwise().lpNorm<Eigen::Infinity>();
    Eigen::MatrixXd Ns = rs.cwiseInverse().asDiagonal() * N;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(order - first) = 1.0 / rs(order - first);
    const auto lu = Ns.fullPivLu();
    Eigen::VectorXd v = lu.solve(e);
    v += lu.solve(e - Ns * v);
    if (!v.allFinite()) throw NumericalError("cardinal system is numerically singular");
    UpsilonCombo c;
    c.tilde_ell.assign(v.data(), v.data() + n);
    c.tilde_kappa = tk;
    c.order = order;
    return c;
}

double BlockCombo::value(double t) const {
    double s = 0.0;
    for (std::size_t j = 0; j < weight.size(); ++j) s += weight[j] * block_value(kappa[j], t);
    return s;
}

double BlockCombo::value_at(double x, double t) const {
    double s = 0.0;
    for (std::size_t j = 0; j < weight.size(); ++j) s += weight[j] * block_value_at(kappa[j], x, t);
    return s;
}

double BlockCombo::half_integral(double t) const {
    double s = 0.0;
    for (std::size_t j = 0; j < weight.size(); ++j) s += weight[j] * block_half_integral(kappa[j], t);
    return s;
}

BlockCombo blocks_of(const UpsilonCombo& c) {
    // ℓ̃ √t/(t+κ̃) = ℓ 2√t/(4κt+1) with κ = 1/(4κ̃), ℓ = ℓ̃/(2κ̃)
    BlockCombo b;
    for (std::size_t j = 0; j < c.tilde_ell.size(); ++j) {
        b.kappa.push_back(1.0 / (4 * c.tilde_kappa[j]));
        b.weight.push_back(c.tilde_ell[j] / (2 * c.tilde_kappa[j]));
    }
    return b;
}

BlockCombo blocks_of(const std::vector<UpsilonCombo>& combos, const std::vector<double>& c) {
    if (combos.size() != c.size()) throw ConfigError("one coefficient per combination");
    BlockCombo out;
    for (std::size_t i = 0; i < combos.size(); ++i) {
        const BlockCombo b = blocks_of(combos[i]);
        for (std::size_t j = 0; j < b.kappa.size(); ++j) {
            const auto it = std::find(out.kappa.begin(), out.kappa.end(), b.kappa[j]);
            if (it == out.kappa.end()) {
                out.kappa.push_back(b.kappa[j]);
                out.weight.push_back(c[i] * b.weight[j]);
            } else {
                out.weight[it - out.kappa.begin()] += c[i] * b.weight[j];
            }
        }
    }
    return out;
}

double vanishing_order_fit(const UpsilonCombo& c, double T) {
    const int order = std::max(c.order, 1);
    const double lo = std::max(1e-5, std::pow(10.0, -10.0 / order)), hi = 0.02;
    std::vector<double> lx, ly;
    for (int j = 0; j < 20; ++j) {
        const double d = T * hi * std::pow(lo / hi, j / 19.0);
        lx.push_back(std::log(d));
        ly.push_back(std::log(std::abs(upsilon_eval(c, T - d))));
    }
    return fit_line(lx, ly).slope;
}

KernelValue radial_kernel(double x, double r, double tau) {
    const double c = 1.0 / std::sqrt(4 * pi * tau);
    KernelValue k;
    if (x == 0.0) {
        k.value = c * r * r / tau * std::exp(-r * r / (4 * tau));
        return k;
    }
    const double z = x * r / (2 * tau);
    const double pre = c * r * r / tau;
    if (z < 0.1) {
        const double z2 = z * z;
        const double S = 1 + z2 / 6 * (1 + z2 / 20 * (1 + z2 / 42 * (1 + z2 / 72)));
        const double Sp = z / 3 * (1 + z2 / 10 * (1 + z2 / 28 * (1 + z2 / 54)));
        const double e0 = std::exp(-(x * x + r * r) / (4 * tau));
        k.value = pre * e0 * S;
        k.dx = pre * e0 * (-x / (2 * tau) * S + Sp * r / (2 * tau));
    } else {
        const double g1 = std::exp(-(x - r) * (x - r) / (4 * tau));
        const double g2 = std::exp(-(x + r) * (x + r) / (4 * tau));
        const double eS = (g1 - g2) / (2 * z);
        const double eSp = ((g1 + g2) * z / 2 - (g1 - g2) / 2) / (z * z);
        k.value = pre * eS;
        k.dx = pre * (-x / (2 * tau) * eS + eSp * r / (2 * tau));
    }
    return k;
}

namespace {

// ∫ K(x,r,τ) f(r) dr over the window around x, clipped to [0, support]
template <class F>
DuhamelValue radial_pass(const F& f, const std::vector<double>& breaks, double support, double x, double tau,
                         double width) {
    const double st = std::sqrt(tau);
    const double lo = std::max(0.0, x - width * st);
    const double hi = std::min(support, x + width * st);
    DuhamelValue out;
    if (!(hi > lo)) return out;
    std::vector<double> pts{lo, hi};
    for (double b : breaks)
        if (b > lo && b < hi) pts.push_back(b);
    for (int j = -6; j <= 6; ++j) {
        const double b = x + 2.0 * j * st;
        if (b > lo && b < hi) pts.push_back(b);
    }
    std::sort(pts.begin(), pts.end());
    const auto& g = gl();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i], b = pts[i + 1];
        if (!(b > a)) continue;
        const double m = 0.5 * (a + b), h = 0.5 * (b - a);
        for (int q = 0; q < 20; ++q) {
            const double r = m + h * g.x[q];
            const double fv = f(r);
            if (fv == 0.0) continue;
            const auto k = radial_kernel(x, r, tau);
            out.value += h * g.w[q] * k.value * fv;
            out.gradient += h * g.w[q] * k.dx * fv;
        }
    }
    return out;
}

}  // namespace

DuhamelValue duhamel_radial(const RadialSource& src, double x, double t, const DuhamelOptions& opt) {
    DuhamelValue out;
    if (t <= 0) return out;
    if (x < 0) throw std::domain_error("radius must be nonnegative");
    const double su = std::sqrt(t);
    const double scale = src.scale ? src.scale(t) : su;
    int levels = opt.max_levels;
    if (scale > 0) levels = std::clamp(static_cast<int>(std::ceil(std::log2(su / (0.02 * scale)))), 1, opt.max_levels);
    // u = √(t-s), panels [su 2^{-j-1}, su 2^{-j}] plus the innermost [0, su 2^{-levels}]
    std::vector<double> ub{0.0};
    for (int j = levels; j >= 0; --j) ub.push_back(su * std::ldexp(1.0, -j));
    const auto& g = gl();
    for (std::size_t i = 0; i + 1 < ub.size(); ++i) {
        const double m = 0.5 * (ub[i] + ub[i + 1]), h = 0.5 * (ub[i + 1] - ub[i]);
        for (int q = 0; q < 20; ++q) {
            const double u = m + h * g.x[q];
            const double tau = u * u, s = t - tau;
            if (!(tau > 0)) continue;
            const SourceSlice sl = src.slice(s);
            if (!sl.f) continue;
            const auto inner = radial_pass(sl.f, sl.breaks, sl.support, x, tau, opt.width);
            out.value += 2 * u * h * g.w[q] * inner.value;
            out.gradient += 2 * u * h * g.w[q] * inner.gradient;
        }
    }
    return out;
}

DuhamelValue heat_flow_radial(const std::function<double(double)>& u0, const std::vector<double>& breaks,
                              double support, double x, double t) {
    if (t <= 0) throw std::domain_error("heat flow needs t > 0");
    return radial_pass(u0, breaks, support, x, t, 13.0);
}

double phi1_bulk(const std::function<double(double)>& alpha, double T, double c0, double t, bool sharp) {
    if (t <= 0) return 0.0;
    if (t > T) throw std::domain_error("Φ1 is evaluated on [0,T]");
    const double su = std::sqrt(t);
    // u = √(t-s): 2π^{-1/2} ∫_0^{√t} α(t-u²)[1 - e^{-c0²(T-t+u²)/(4u²)}] du
    const auto integrand = [&](double u) {
        const double a = alpha(t - u * u);
        if (sharp) return a;
        if (u == 0.0) return a;
        return a * -std::expm1(-c0 * c0 * (T - t + u * u) / (4 * u * u));
    };
    // the bracket turns on at u ~ c0√(T-t)/2
    std::vector<double> br{0.0};
    const double knee = 0.5 * c0 * std::sqrt(T - t);
    if (!sharp && knee > 0 && knee < su)
        for (double f : {0.25, 0.5, 1.0, 2.0, 4.0})
            if (f * knee < su) br.push_back(f * knee);
    br.push_back(su);
    return 2.0 / std::sqrt(pi) * gauss_composite(integrand, br, 4);
}

RadialSource phi1_source(const ModulationPath& path) {
    const BlowupParams& p = path.params();
    RadialSource src;
    src.slice = [&path, c0 = p.c0, T = p.T](double t) {
        const double m = path.mu(t), a = path.alpha(t);
        SourceSlice sl;
        sl.f = [m, a](double r) { return a / std::sqrt(m * m + r * r); };
        sl.breaks = {0.25 * m, 0.5 * m, m, 2 * m, 4 * m, 16 * m};
        sl.support = c0 * std::sqrt(T - t);
        return sl;
    };
    src.scale = [&path, T = p.T](double t) { return t < T ? path.mu(t) : 0.0; };
    return src;
}

Phi1Origin phi1_origin(const ModulationPath& path, double t, const Phi1Options& opt) {
    const BlowupParams& p = path.params();
    if (t < 0 || t >= p.T) throw std::domain_error("Φ1 at the origin needs 0 <= t < T");
    if (opt.c.size() != opt.kappa.size()) throw ConfigError("block weights and rates differ in length");
    Phi1Origin out;
    for (std::size_t j = 0; j < opt.c.size(); ++j) out.blocks += opt.c[j] * block_value(opt.kappa[j], t);
    if (path.unmodulated() || t == 0.0) return out;

    // step control: α must be resolved near s = t, where the kernel weight piles up
    const auto& ts = path.times();
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    std::size_t near = 0;
    for (auto j = it; j != ts.begin() && *(j - 1) >= 0.5 * t; --j) ++near;
    if (ts.back() < t || near < 8)
        throw NumericalError("modulation samples too sparse near t for the Φ1 quadrature");

    out.bulk = phi1_bulk([&](double s) { return path.alpha(s); }, p.T, p.c0, t, opt.sharp_bracket);
    if (opt.mu_correction) {
        RadialSource src = phi1_source(path);
        const auto full = src.slice;
        src.slice = [&path, full](double s) {
            SourceSlice sl = full(s);
            const double m = path.mu(s), a = path.alpha(s);
            // (μ²+r²)^{-1/2} - 1/r without the cancellation
            sl.f = [m, a](double r) {
                if (r == 0.0) return 0.0;
                const double q = std::sqrt(m * m + r * r);
                return -a * m * m / (q * r * (q + r));
            };
            return sl;
        };
        out.mu_correction = duhamel_radial(src, 0.0, t).value;
    }
    return out;
}

DuhamelValue Phi1Field::eval(double x, double t) const {
    DuhamelValue d;
    if (path && !path->unmodulated()) d = duhamel_radial(phi1_source(*path), x, t);
    d.value += blocks.value_at(x, t);
    for (std::size_t j = 0; j < blocks.weight.size(); ++j) {
        const double k = blocks.kappa[j], q = 4 * k * t + 1;
        d.gradient += blocks.weight[j] * block_value_at(k, x, t) * (-2 * k * x / q);
    }
    return d;
}

double Phi1Field::value(double x, double t) const { return eval(x, t).value; }

std::string family_name(ProbeFamily f) {
    switch (f) {
        case ProbeFamily::rhs1: return "rhs1";
        case ProbeFamily::rhs2: return "rhs2";
        case ProbeFamily::rhs3: return "rhs3";
    }
    return "?";
}

RadialSource probe_source(ProbeFamily family, const BlowupParams& p) {
    // once μ0 is below 1e-150 the source powers overflow, and those last instants contribute nothing
    const auto rho = [p](double s) {
        if (s >= p.T) return 0.0;
        const double m = mu0(s, p);
        return m < 1e-150 ? 0.0 : m * R_of(s, p);
    };
    RadialSource src;
    src.scale = rho;
    switch (family) {
        case ProbeFamily::rhs1:
            src.slice = [p, rho](double s) {
                SourceSlice sl;
                const double q = rho(s);
                if (q == 0.0) return sl;
                const double amp = std::pow(mu0(s, p), p.nu - 2.5) * std::pow(R_of(s, p), -2 - p.a);
                sl.f = [amp](double) { return amp; };
                sl.breaks = {q};
                sl.support = 2 * q;
                return sl;
            };
            break;
        case ProbeFamily::rhs2:
            src.slice = [p, rho](double s) {
                SourceSlice sl;
                const double q = rho(s);
                if (q == 0.0) return sl;
                const double amp = std::pow(mu0(s, p), p.nu2);
                const double a2 = p.a2;
                if (a2 == 2.0) sl.f = [amp, q](double r) { return r < q ? 0.0 : amp / (r * r); };
                else sl.f = [amp, q, a2](double r) { return r < q ? 0.0 : amp * std::pow(r, -a2); };
                sl.breaks = {q, 2 * q, 4 * q, 8 * q, 32 * q};
                return sl;
            };
            break;
        case ProbeFamily::rhs3:
            src.slice = [](double) {
                SourceSlice sl;
                sl.f = [](double) { return 1.0; };
                return sl;
            };
            src.scale = nullptr;
            break;
    }
    return src;
}

namespace {

// max that keeps a NaN once seen
double nan_max(double a, double b) { return (std::isnan(a) || std::isnan(b)) ? std::numeric_limits<double>::quiet_NaN() : std::max(a, b); }

struct Bound {
    std::string id;
    bool gradient;     // compare ∇ψ instead of ψ
    bool at_T;         // difference with the value at T, majorant at time t
    double power;      // claimed power of μ0
    double r_power;    // power of R in the majorant (divided out before fitting)
};

}  // namespace

std::vector<ProbeRow> bound_probe_appendix(ProbeFamily family, const BlowupParams& p0, const ProbeOptions& opt) {
    const std::string fam = family_name(family);
    std::vector<Bound> bounds;
    const double k4 = 4.0 * p0.k;
    switch (family) {
        case ProbeFamily::rhs1:
            bounds = {{"outer", false, false, p0.nu - 0.5, -p0.a},
                      {"outerT", false, true, p0.nu - 0.5, -p0.a},
                      {"outergradient", true, false, p0.nu - 1.5, -1 - p0.a},
                      {"outergradientT", true, true, p0.nu - 1.5, -1 - p0.a}};
            break;
        case ProbeFamily::rhs2:
            bounds = {{"outer", false, false, p0.nu2 + (2 - p0.a2) / k4, 0.0},
                      {"outerT", false, true, p0.nu2 + (2 - p0.a2) / k4, 0.0},
                      {"outergradient", true, false, p0.nu2 + (1 - p0.a2) / k4, 0.0},
                      {"outergradientT", true, true, p0.nu2 + (1 - p0.a2) / k4, 0.0}};
            break;
        case ProbeFamily::rhs3:
            // |ψ| ≤ t, |ψ(t)-ψ(T)| ≤ T-t; T^{1/2} and (T-t)^{1/2} for the gradients.
            // In powers of μ0: T-t ∝ μ0^{1/(2k)}
            bounds = {{"outer", false, false, 1.0 / (2 * p0.k), 0.0},
                      {"outerT", false, true, 1.0 / (2 * p0.k), 0.0},
                      {"outergradient", true, false, 1.0 / (4 * p0.k), 0.0},
                      {"outergradientT", true, true, 1.0 / (4 * p0.k), 0.0}};
            break;
    }

    struct Acc {
        std::vector<double> by_T;
        std::vector<double> lx, ly;  // log μ0 and log(quantity / R-factor) for the fit
    };
    std::vector<Acc> acc(bounds.size());

    for (double T : opt.T_values) {
        BlowupParams p = p0;
        p.T = T;
        const RadialSource src = probe_source(family, p);
        std::vector<double> times;
        for (int j = opt.t_levels; j >= 1; --j) times.push_back(T * std::ldexp(1.0, -j));
        for (int j = 1; j <= opt.t_levels; ++j) times.push_back(T - T * std::ldexp(1.0, -j));
        const std::size_t nt = times.size();

        // radii: origin, a few multiples of μ0R(t), then geometric out to 2√T
        const auto radii = [&](double t) {
            std::vector<double> x{0.0};
            const double q = mu0(t, p) * R_of(t, p);
            for (double f : {0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 8.0}) x.push_back(f * q);
            const double top = 2 * std::sqrt(T), start = 16 * q;
            if (start < top) {
                const std::size_t n = opt.x_points;
                for (std::size_t i = 0; i <= n; ++i) x.push_back(start * std::pow(top / start, double(i) / n));
            }
            return x;
        };
        std::vector<std::vector<double>> xs(nt);
        std::size_t total = 0;
        for (std::size_t i = 0; i < nt; ++i) {
            xs[i] = radii(times[i]);
            total += xs[i].size();
        }
        // flat job list: (time index, radius index), both ψ(x,t) and ψ(x,T)
        std::vector<std::pair<std::size_t, std::size_t>> jobs;
        for (std::size_t i = 0; i < nt; ++i)
            for (std::size_t j = 0; j < xs[i].size(); ++j) jobs.emplace_back(i, j);
        std::vector<DuhamelValue> now(total), atT(total);
        parallel_for(jobs.size(), [&](std::size_t n) {
            const auto [i, j] = jobs[n];
            const double x = xs[i][j];
            now[n] = duhamel_radial(src, x, times[i]);
            atT[n] = duhamel_radial(src, x, T);
        });

        for (std::size_t b = 0; b < bounds.size(); ++b) {
            const Bound& bd = bounds[b];
            double sup0 = 0.0;  // sup over t for the time-0 majorant
            std::size_t n = 0;
            std::vector<double> dsup(nt, 0.0);
            for (std::size_t i = 0; i < nt; ++i)
                for (std::size_t j = 0; j < xs[i].size(); ++j, ++n) {
                    const double v = bd.gradient ? now[n].gradient : now[n].value;
                    const double vT = bd.gradient ? atT[n].gradient : atT[n].value;
                    if (bd.at_T) dsup[i] = nan_max(dsup[i], std::abs(v - vT));
                    else if (family == ProbeFamily::rhs3 && !bd.gradient)
                        sup0 = nan_max(sup0, std::abs(v) / times[i]);
                    else
                        sup0 = nan_max(sup0, std::abs(v));
                }
            Acc& a = acc[b];
            a.by_T.push_back(0.0);
            if (!bd.at_T) {
                const double m0 = mu0(0.0, p), R0 = R_of(0.0, p);
                double maj;
                if (family == ProbeFamily::rhs3) maj = bd.gradient ? std::sqrt(T) : 1.0;
                else maj = std::pow(m0, bd.power) * std::pow(R0, bd.r_power);
                a.by_T.back() = sup0 / maj;
                // rhs3 |ψ| was already divided by t; refit against T
                const double q = (family == ProbeFamily::rhs3 && !bd.gradient) ? sup0 * T : sup0;
                if (q > 0 && !(family == ProbeFamily::rhs3 && bd.gradient)) {
                    a.lx.push_back(std::log(m0));
                    a.ly.push_back(std::log(q) - bd.r_power * std::log(R0));
                }
            } else {
                for (std::size_t i = 0; i < nt; ++i) {
                    const double t = times[i];
                    if (t <= 0.5 * T) continue;
                    const double m = mu0(t, p), R = R_of(t, p);
                    double maj;
                    if (family == ProbeFamily::rhs3) maj = bd.gradient ? std::sqrt(T - t) : (T - t);
                    else maj = std::pow(m, bd.power) * std::pow(R, bd.r_power);
                    a.by_T.back() = nan_max(a.by_T.back(), dsup[i] / maj);
                    const int level = static_cast<int>(i) - opt.t_levels + 1;  // 1..t_levels
                    if (level > opt.t_levels - opt.fit_levels && dsup[i] > 0 &&
                        !(family == ProbeFamily::rhs3 && bd.gradient)) {
                        a.lx.push_back(std::log(m));
                        a.ly.push_back(std::log(dsup[i]) - bd.r_power * std::log(R));
                    }
                }
            }
        }
    }

    std::vector<ProbeRow> rows;
    for (std::size_t b = 0; b < bounds.size(); ++b) {
        ProbeRow r;
        r.family = fam;
        r.bound_id = bounds[b].id;
        r.ratio_by_T = acc[b].by_T;
        for (double v : r.ratio_by_T) r.ratio_sup = nan_max(r.ratio_sup, v);
        r.claimed_power = bounds[b].power;
        r.fitted_power = acc[b].lx.size() >= 2 ? fit_line(acc[b].lx, acc[b].ly).slope
                                               : std::numeric_limits<double>::quiet_NaN();
        rows.push_back(r);
    }
    return rows;
}

std::string probe_csv(const std::vector<ProbeRow>& rows) {
    std::ostringstream os;
    os << "family,bound_id,ratio_sup,fitted_power,claimed_power\n";
    for (const auto& r : rows)
        os << r.family << ',' << r.bound_id << ',' << fmt17(r.ratio_sup) << ',' << fmt17(r.fitted_power) << ','
           << fmt17(r.claimed_power) << '\n';
    return os.str();
}

}  // namespace blowup
