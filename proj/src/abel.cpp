#include "blowuplab/abel.hpp"

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
#include "blowuplab/profiles.hpp"
#include "json.hpp"

namespace blowup {

namespace {

constexpr double pi = std::numbers::pi;

// 4-point Gauss-Legendre: exact to degree 7, enough for a cubic in s = t - u²
constexpr double g4x[4] = {-0.86113631159405258, -0.33998104358485626, 0.33998104358485626, 0.86113631159405258};
constexpr double g4w[4] = {0.34785484513745386, 0.65214515486254614, 0.65214515486254614, 0.34785484513745386};

std::size_t piece_of(const std::vector<double>& t, double s) {
    auto it = std::upper_bound(t.begin(), t.end(), s);
    std::size_t i = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    return std::min(i, t.size() - 2);
}

// value or derivative of piece i at s
double piece_eval(const TimeSeries& f, std::size_t i, double s, bool deriv) {
    const auto& t = f.times();
    const auto& v = f.values();
    const double a = t[i], b = t[i + 1], h = b - a;
    switch (f.kind()) {
        case Interp::linear: {
            const double m = (v[i + 1] - v[i]) / h;
            return deriv ? m : v[i] + m * (s - a);
        }
        case Interp::sqrt_linear: {
            const double m = (v[i + 1] - v[i]) / (std::sqrt(b) - std::sqrt(a));
            return deriv ? m / (2 * std::sqrt(s)) : v[i] + m * (std::sqrt(s) - std::sqrt(a));
        }
        case Interp::cubic: {
            const auto& d = f.slopes();
            const double x = (s - a) / h, x2 = x * x, x3 = x2 * x;
            if (deriv)
                return ((6 * x2 - 6 * x) * v[i] + (3 * x2 - 4 * x + 1) * h * d[i] + (-6 * x2 + 6 * x) * v[i + 1] +
                        (3 * x2 - 2 * x) * h * d[i + 1]) /
                       h;
            return (2 * x3 - 3 * x2 + 1) * v[i] + (x3 - 2 * x2 + x) * h * d[i] + (-2 * x3 + 3 * x2) * v[i + 1] +
                   (x3 - x2) * h * d[i + 1];
        }
    }
    return 0.0;
}

// ∫_a^b g(s)(t-s)^{-1/2} ds = 2∫ g(t-u²) du over u in [√(t-b), √(t-a)], b <= t
template <class G>
double u_gauss(const G& g, double t, double a, double b) {
    const double ua = std::sqrt(t - a), ub = std::sqrt(t - b);
    const double len = (b - a) / (ua + ub);
    double s = 0.0;
    for (int q = 0; q < 4; ++q) {
        const double u = ub + 0.5 * len * (1 + g4x[q]);
        s += g4w[q] * g(t - u * u);
    }
    return s * len;  // GL weights sum to 2: this is already 2∫ du
}

// θ = asin √(s/t)
double theta(double s, double t) { return std::asin(std::sqrt(std::clamp(s / t, 0.0, 1.0))); }

// ∫ over the pieces of [0,t] of f (or f') times (t-s)^{-1/2}
double product_integral(const TimeSeries& f, double t, bool deriv) {
    const auto& ts = f.times();
    if (t < 0 || t > ts.back() * (1 + 1e-14)) throw std::domain_error("time outside the series");
    t = std::min(t, ts.back());
    if (t == 0.0) {
        // only the sqrt_linear derivative has a nonzero limit, m_0 π/2
        if (deriv && f.kind() == Interp::sqrt_linear)
            return (f.values()[1] - f.values()[0]) / std::sqrt(ts[1]) * pi / 2;
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < ts.size() && ts[i] < t; ++i) {
        const double a = ts[i], b = std::min(ts[i + 1], t);
        if (f.kind() == Interp::sqrt_linear) {
            const double m = (f.values()[i + 1] - f.values()[i]) / (std::sqrt(ts[i + 1]) - std::sqrt(a));
            const double ta = theta(a, t), tb = theta(b, t);
            if (deriv) {
                sum += m * (tb - ta);
            } else {
                // ∫ (t-s)^{-1/2} = 2(√(t-a) - √(t-b)); ∫ √s (t-s)^{-1/2} = t[θ - sinθ cosθ]
                const double base = f.values()[i] - m * std::sqrt(a);
                const double d0 = 2 * (b - a) / (std::sqrt(t - a) + std::sqrt(t - b));
                const double d1 = t * ((tb - ta) - std::cos(ta + tb) * std::sin(tb - ta));
                sum += base * d0 + m * d1;
            }
        } else if (f.kind() == Interp::linear && deriv) {
            const double m = (f.values()[i + 1] - f.values()[i]) / (ts[i + 1] - a);
            sum += m * 2 * (b - a) / (std::sqrt(t - a) + std::sqrt(t - b));
        } else {
            sum += u_gauss([&](double s) { return piece_eval(f, i, s, deriv); }, t, a, b);
        }
    }
    return sum;
}

// 20-point rule on [-1,1] as (node, weight) pairs
const std::vector<std::pair<double, double>>& gauss20_rule() {
    static const std::vector<std::pair<double, double>> rule = [] {
        using G = boost::math::quadrature::gauss<double, 20>;
        std::vector<std::pair<double, double>> r;
        for (std::size_t i = 0; i < G::abscissa().size(); ++i) {
            r.emplace_back(-G::abscissa()[i], G::weights()[i]);
            r.emplace_back(G::abscissa()[i], G::weights()[i]);
        }
        return r;
    }();
    return rule;
}

double sup_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TimeSeries::TimeSeries(std::vector<double> t, std::vector<double> v, Interp kind)
    : t_(std::move(t)), v_(std::move(v)), kind_(kind) {
    if (t_.size() < 2 || v_.size() != t_.size()) throw ConfigError("time series needs matching samples (at least two)");
    if (t_.front() != 0.0) throw ConfigError("time series must start at t = 0");
    for (std::size_t i = 1; i < t_.size(); ++i)
        if (!(t_[i] > t_[i - 1])) throw ConfigError("time series times must increase strictly");
    for (double x : v_)
        if (!std::isfinite(x)) throw ConfigError("time series values must be finite");
    if (kind_ == Interp::cubic) {
        const std::size_t n = t_.size();
        d_.resize(n);
        if (n == 2) {
            d_[0] = d_[1] = (v_[1] - v_[0]) / (t_[1] - t_[0]);
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t j = std::clamp<std::size_t>(i, 1, n - 2);
                const std::vector<double> nodes{t_[j - 1], t_[j], t_[j + 1]};
                const auto w = fd_weights(t_[i], nodes, 1);
                d_[i] = w[1][0] * v_[j - 1] + w[1][1] * v_[j] + w[1][2] * v_[j + 1];
            }
        }
    }
}

TimeSeries TimeSeries::sample(const std::function<double(double)>& f, std::vector<double> t, Interp kind) {
    std::vector<double> v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) v[i] = f(t[i]);
    return TimeSeries(std::move(t), std::move(v), kind);
}

double TimeSeries::operator()(double t) const {
    if (t < 0 || t > t_.back() * (1 + 1e-14)) throw std::domain_error("time outside the series");
    return piece_eval(*this, piece_of(t_, t), std::min(t, t_.back()), false);
}

double TimeSeries::derivative(double t) const {
    if (t < 0 || t > t_.back() * (1 + 1e-14)) throw std::domain_error("time outside the series");
    return piece_eval(*this, piece_of(t_, t), std::min(t, t_.back()), true);
}

std::vector<double> cosine_times(double T, std::size_t M) {
    if (M < 1) throw ConfigError("need at least one interval");
    std::vector<double> t(M + 1);
    for (std::size_t j = 0; j <= M; ++j) {
        const double s = std::sin(pi * static_cast<double>(j) / (2.0 * M));
        t[j] = T * s * s;  // (1 - cos)/2 without cancellation
    }
    t[M] = T;
    return t;
}

std::vector<double> square_times(double T, std::size_t M) {
    if (M < 1) throw ConfigError("need at least one interval");
    std::vector<double> t(M + 1);
    for (std::size_t j = 0; j <= M; ++j) {
        const double s = static_cast<double>(j) / M;
        t[j] = T * s * s;
    }
    t[M] = T;
    return t;
}

double half_integral_at(const TimeSeries& f, double t) { return product_integral(f, t, false) / std::sqrt(pi); }

double abel_derivative_at(const TimeSeries& h, double t) { return product_integral(h, t, true); }

TimeSeries half_integral(const TimeSeries& f, Interp kind) {
    const auto& t = f.times();
    std::vector<double> v(t.size());
    parallel_for(t.size(), [&](std::size_t i) { v[i] = half_integral_at(f, t[i]); });
    return TimeSeries(t, std::move(v), kind);
}

TimeSeries half_integral(const TimeSeries& f) { return half_integral(f, f.kind()); }

AbelSolution abel_solve(const TimeSeries& h, const AbelOptions& opt) {
    const double scale = sup_abs(h.values());
    if (std::abs(h.values().front()) > 1e-14 * scale)
        throw ConfigError("abel_solve needs h(0) = 0; there is no continuous solution otherwise");
    const auto& t = h.times();
    std::vector<double> a(t.size());
    parallel_for(t.size(), [&](std::size_t i) { a[i] = abel_derivative_at(h, t[i]) / pi; });
    AbelSolution out{TimeSeries(t, std::move(a), h.kind())};
    if (scale == 0.0) return out;
    std::vector<double> gap(t.size());
    parallel_for(t.size(), [&](std::size_t i) {
        gap[i] = std::sqrt(pi) * half_integral_at(out.alpha, t[i]) - h.values()[i];
    });
    out.residual = sup_abs(gap) / scale;
    if (!(out.residual <= opt.tolerance))
        throw NumericalError("abel_solve: forward residual " + fmt17(out.residual) + " above tolerance");
    return out;
}

TimeSeries abel_integrated(const TimeSeries& h) {
    const TimeSeries H = half_integral(h, Interp::cubic);
    std::vector<double> v = H.values();
    for (double& x : v) x /= std::sqrt(pi);
    return TimeSeries(H.times(), std::move(v), Interp::cubic);
}

TaylorFit taylor_at_T(const TimeSeries& g, int k) {
    if (k < 0) throw ConfigError("Taylor order must be non-negative");
    const double T = g.end();
    const int deg = k + 2;
    const auto& t = g.times();
    TaylorFit prev, cur;
    bool have_prev = false;
    double cond_seen = 0.0;
    for (int m = 1; m <= 40; ++m) {
        const double w = T * std::ldexp(1.0, -m);
        std::vector<double> x, y;
        for (std::size_t i = 0; i < t.size(); ++i)
            if (T - t[i] <= w) {
                x.push_back((T - t[i]) / w);
                y.push_back(g.values()[i]);
            }
        if (x.size() < 2 * static_cast<std::size_t>(deg + 1)) break;
        const PolyFit pf = fit_poly(x, y, deg);
        cur.d.assign(k + 1, 0.0);
        for (int j = 0; j <= k; ++j) cur.d[j] = pf.coeffs[j] / std::pow(w, j);
        cur.window = w;
        cur.condition = pf.condition;
        cur.halvings = m - 1;
        cond_seen = std::max(cond_seen, pf.condition);
        if (have_prev) {
            const double scale = sup_abs(y);
            bool stable = true;
            for (int j = 0; j <= k; ++j) {
                const double floor = 1e-9 * scale / std::pow(w, j);
                if (std::abs(cur.d[j] - prev.d[j]) > 0.01 * std::abs(cur.d[j]) + floor) stable = false;
            }
            if (stable) return cur;
        }
        prev = cur;
        have_prev = true;
    }
    throw NumericalError("taylor_at_T: coefficients did not settle (condition up to " + fmt17(cond_seen) + ")");
}

// ---- reduced problem ----

double ReducedSolution::alpha_at(double t) const {
    const double s = t > 0 ? alpha_singular / std::sqrt(t)
                           : (alpha_singular == 0.0 ? 0.0 : std::copysign(HUGE_VAL, alpha_singular));
    return alpha(t) + s;
}

ModulationPath ReducedSolution::path(const BlowupParams& p) const {
    return ModulationPath(p, Lambda.times(), Lambda.values(), Lambda_d1.values());
}

namespace {

struct Pass {
    ReducedSolution sol;
    double h_scale = 0.0;
};

Pass reduced_pass(const TimeSeries& h, int k, const BlowupParams& p, const std::vector<UpsilonCombo>& basis) {
    const double T = h.end();
    const auto& t = h.times();
    const std::size_t n = t.size();
    Pass out;
    ReducedSolution& s = out.sol;
    s.T = T;
    s.k = k;
    s.basis = basis;
    out.h_scale = sup_abs(h.values());

    // ∫_0^t h(s)(t-s)^{-1/2} ds and its Taylor data at T
    std::vector<double> H(n);
    parallel_for(n, [&](std::size_t i) { H[i] = product_integral(h, t[i], false); });
    s.d = taylor_at_T(TimeSeries(t, H, Interp::cubic), k).d;
    s.c.assign(k, 0.0);
    for (int j = 1; j <= k; ++j) s.c[j - 1] = -s.d[j];
    s.blocks = blocks_of(basis, s.c);

    // π α = Σ c_j Υ_j' + h(0) t^{-1/2} + ∫ h'(s)(t-s)^{-1/2} ds; Υ_j' carries
    // Σ ℓ̃/(2κ̃) t^{-1/2} at the origin
    double sing = h.values().front();
    for (int j = 0; j < k; ++j)
        for (std::size_t q = 0; q < basis[j].tilde_ell.size(); ++q)
            sing += s.c[j] * basis[j].tilde_ell[q] / (2 * basis[j].tilde_kappa[q]);
    s.alpha_singular = sing / pi;
    const auto alpha_total = [&](double x) {
        double v = abel_derivative_at(h, x) + h.values().front() / std::sqrt(x);
        for (int j = 0; j < k; ++j) v += s.c[j] * upsilon_eval_d1(basis[j], x);
        return v / pi;
    };
    std::vector<double> smooth(n);
    parallel_for(n, [&](std::size_t i) {
        smooth[i] = i == 0 ? abel_derivative_at(h, 0.0) / pi : alpha_total(t[i]) - s.alpha_singular / std::sqrt(t[i]);
    });
    s.alpha = TimeSeries(t, smooth, Interp::cubic);
    s.alpha_at_T = alpha_total(T);

    // decay order from T - t = T 2^{-m}, m = 6..8
    std::vector<double> lx, ly;
    bool vanishes = true;
    for (int m = 6; m <= 8; ++m) {
        const double dt = T * std::ldexp(1.0, -m);
        const double a = std::abs(alpha_total(T - dt));
        if (a != 0.0) vanishes = false;
        lx.push_back(std::log(dt));
        ly.push_back(std::log(a));
    }
    s.decay_exponent = vanishes ? HUGE_VAL : fit_line(lx, ly).slope;

    // μ0 Λ(t) = 3^{-1/4} ∫_t^T μ0^{1/2} α
    const double c4 = std::pow(3.0, -0.25);
    std::vector<double> piece(n - 1);
    parallel_for(n - 1, [&](std::size_t i) {
        const double a = t[i], b = t[i + 1];
        if (i == 0) {
            // b' = b v²: removes the t^{-1/2} of α
            piece[i] = gauss20(
                [&](double v) {
                    const double x = b * v * v;
                    const double al = s.alpha(x) * v + (v > 0 ? s.alpha_singular / std::sqrt(b) : 0.0);
                    return 2 * b * std::sqrt(mu0(x, p)) * al;
                },
                0.0, 1.0);
        } else {
            piece[i] = gauss20([&](double x) { return std::sqrt(mu0(x, p)) * s.alpha_at(x); }, a, b);
        }
    });
    std::vector<double> lam(n, 0.0), dlam(n, 0.0);
    double tail = 0.0;
    for (std::size_t i = n - 1; i-- > 0;) {
        tail += piece[i];
        const double m0 = mu0(t[i], p);
        lam[i] = c4 * tail / m0;
        if (i > 0) dlam[i] = -lam[i] * mu0_d1(t[i], p) / m0 - c4 * s.alpha_at(t[i]) / std::sqrt(m0);
    }
    // Λ' is singular at 0 when α is; a one-sided slope stands in
    dlam[0] = s.alpha_singular == 0.0 ? -lam[0] * mu0_d1(0.0, p) / mu0(0.0, p) - c4 * s.alpha(0.0) / std::sqrt(mu0(0.0, p))
                                      : (lam[1] - lam[0]) / t[1];
    if (n >= 3) dlam[n - 1] = dlam[n - 2] + (dlam[n - 2] - dlam[n - 3]) * (t[n - 1] - t[n - 2]) / (t[n - 2] - t[n - 3]);
    s.Lambda = TimeSeries(t, lam, Interp::cubic);
    s.Lambda_d1 = TimeSeries(t, dlam, Interp::cubic);

    // forward equation on [T/10, T)
    double worst = 0.0;
    std::vector<double> gap(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        if (t[i] < T / 10 || t[i] >= T) return;
        const double lhs = pi * s.alpha_singular + product_integral(s.alpha, t[i], false);
        gap[i] = lhs - s.blocks.value(t[i]) - h.values()[i];
    });
    worst = sup_abs(gap);
    s.forward_residual = out.h_scale > 0 ? worst / out.h_scale : worst;
    return out;
}

}  // namespace

ReducedSolution reduced_solve(const TimeSeries& h, int k, const BlowupParams& p, const ReducedOptions& opt) {
    if (k < 1) throw ConfigError("reduced_solve needs k >= 1");
    const double T = h.end();
    if (std::abs(T - p.T) > 1e-12 * p.T) throw ConfigError("h must be sampled up to the blow-up time T");
    std::vector<double> tk = opt.tilde_kappa;
    if (tk.empty())
        for (int j = 1; j <= k; ++j) tk.push_back(j * T);
    if (static_cast<int>(tk.size()) != k) throw ConfigError("one block rate per coefficient");
    std::vector<UpsilonCombo> basis;
    for (int j = 1; j <= k; ++j) basis.push_back(cardinal_combo(T, tk, j, 1));

    Pass pass = reduced_pass(h, k, p, basis);
    pass.sol.iterations = 1;
    if (opt.refresh && opt.max_iterations > 1) {
        for (int it = 2; it <= opt.max_iterations; ++it) {
            const TimeSeries next = opt.refresh(pass.sol);
            Pass np = reduced_pass(next, k, p, basis);
            std::vector<double> diff(np.sol.alpha.size());
            for (std::size_t i = 0; i < diff.size(); ++i)
                diff[i] = np.sol.alpha.values()[i] - pass.sol.alpha.values()[i];
            const double ref = std::max(sup_abs(np.sol.alpha.values()), 1e-300);
            const double ds = std::abs(np.sol.alpha_singular - pass.sol.alpha_singular);
            np.sol.iterations = it;
            np.sol.converged = false;
            pass = std::move(np);
            if (sup_abs(diff) <= opt.tolerance * ref && ds <= opt.tolerance * (std::abs(pass.sol.alpha_singular) + ref)) {
                pass.sol.converged = true;
                break;
            }
        }
    }
    if (pass.sol.decay_exponent < k - 1)
        throw NumericalError("reduced_solve: α decays like (T-t)^" + fmt17(pass.sol.decay_exponent) +
                             ", below the required order " + std::to_string(k - 1));
    return pass.sol;
}

double c_bound_constant(const std::vector<double>& c, double T, double eps) {
    double m = 0.0;
    for (std::size_t j = 1; j <= c.size(); ++j)
        m = std::max(m, std::abs(c[j - 1]) / std::pow(T, 0.5 - static_cast<double>(j) - eps));
    return m;
}

std::string reduced_csv(const ReducedSolution& s) {
    nlohmann::json head;
    head["T"] = s.T;
    head["k"] = s.k;
    head["c"] = s.c;
    head["d"] = s.d;
    head["alpha_singular"] = s.alpha_singular;
    head["decay_exponent"] = std::isfinite(s.decay_exponent) ? nlohmann::json(s.decay_exponent) : nlohmann::json("inf");
    head["alpha_at_T"] = s.alpha_at_T;
    head["forward_residual"] = s.forward_residual;
    head["iterations"] = s.iterations;
    head["converged"] = s.converged;
    std::ostringstream os;
    os << "# " << head.dump() << "\n";
    os << "t,alpha,Lambda\n";
    const auto& t = s.alpha.times();
    for (std::size_t i = 0; i < t.size(); ++i)
        os << fmt17(t[i]) << ',' << fmt17(s.alpha_at(t[i])) << ',' << fmt17(s.Lambda.values()[i]) << '\n';
    return os.str();
}

// ---- projection onto Z0 ----

double z0_mass(double rho) {
    const double r2 = rho * rho;
    return 10 * pi * std::pow(3.0, 1.25) * rho * r2 * (r2 - 5) / (15 * std::pow(r2 + 1, 2.5));
}

double z0_mass_quadrature(double rho) {
    std::vector<double> br{0.0};
    for (double y = 0.25; y < rho; y *= 2) br.push_back(y);
    br.push_back(rho);
    return gauss_composite(
        [](double y) { return 5 * std::pow(bubble_w(y), 4) * kernel_Z0(y) * 4 * pi * y * y; }, br, 2);
}

OrthogonalityTerms orthogonality_rhs(const RadialField& phi, const RadialField& psi, const ModulationPath& path,
                                     double t, const OrthogonalityOptions& opt) {
    const BlowupParams& p = path.params();
    if (!(t > 0 && t < p.T)) throw std::domain_error("orthogonality_rhs needs 0 < t < T");
    if (!path.unmodulated() && (path.times().front() > 0 || path.times().back() < t))
        throw NumericalError("modulation history does not cover [0,t]");
    if (opt.c.size() != opt.kappa.size()) throw ConfigError("block weights and rates differ in length");

    const Phi1Field field{&path, BlockCombo{opt.c, opt.kappa}};
    RadialField phi1 = opt.phi1;
    if (!phi1.value) {
        phi1.value = [&field](double x, double s) { return field.value(x, s); };
        phi1.gradient = [&field](double x, double s) { return field.eval(x, s).gradient; };
    }

    OrthogonalityTerms out;
    const double m0 = path.mu0(t), sm = std::sqrt(m0);
    const double rho = 2 * R_of(t, p);
    out.mass = z0_mass(rho);
    const double f0 = phi1.value(0.0, t);

    // nodes of B_2R, dyadic shells split into y_subpanels Gauss panels
    std::vector<double> br{0.0};
    for (double y = std::min(0.25, rho / 2); y < rho; y *= 2) br.push_back(y);
    br.push_back(rho);
    const auto& nodes = gauss20_rule();
    std::vector<double> ys, ws;
    const int sub = std::max(1, opt.y_subpanels);
    for (std::size_t b = 0; b + 1 < br.size(); ++b)
        for (int q = 0; q < sub; ++q) {
            const double a = br[b] + (br[b + 1] - br[b]) * q / sub, c = br[b] + (br[b + 1] - br[b]) * (q + 1) / sub;
            for (const auto& [x, w] : nodes) {
                const double y = 0.5 * (a + c) + 0.5 * (c - a) * x;
                ys.push_back(y);
                ws.push_back(0.5 * (c - a) * w * 4 * pi * y * y * kernel_Z0(y));
            }
        }

    // columns: phi, psi, psi_lambda, drift, error, nonlinear (split), projection
    std::vector<std::array<double, 7>> rows(ys.size());
    parallel_for(ys.size(), [&](std::size_t i) {
        const double y = ys[i];
        const HTerms H = rhs_H(y, t, phi, psi, phi1, path);
        const double w4 = std::pow(bubble_w(y), 4);
        const double plain = 5 * w4 * psi.value(m0 * y, t);
        auto& r = rows[i];
        r[0] = H.potential_phi / sm;
        r[1] = plain;
        r[2] = H.potential_psi / sm - plain;
        r[3] = H.drift / sm;
        r[4] = H.error / sm;
        r[5] = H.phi1_nonlinear / sm - 5 * w4 * f0;
        r[6] = H.total() / sm;
    });
    std::array<double, 7> I{};
    for (std::size_t i = 0; i < ys.size(); ++i)
        for (int c = 0; c < 7; ++c) I[c] += ws[i] * rows[i][c];

    const double scale = -std::sqrt(pi) / out.mass;
    out.phi = scale * I[0];
    out.psi = scale * I[1];
    out.psi_lambda = scale * I[2];
    out.drift = scale * I[3];
    out.error = scale * I[4];
    out.nonlinear = scale * I[5];
    out.projection = I[6];
    out.blocks = -std::sqrt(pi) * field.blocks.value(t);

    if (!path.unmodulated()) {
        // u = √(t-s): 2∫ α(t-u²) e^{-c0²(T-t+u²)/(4u²)} du, switching on near u ~ c0√(T-t)/2
        const double su = std::sqrt(t), knee = 0.5 * p.c0 * std::sqrt(p.T - t);
        std::vector<double> ub{0.0};
        for (double f : {0.25, 0.5, 1.0, 2.0, 4.0})
            if (f * knee < su) ub.push_back(f * knee);
        ub.push_back(su);
        out.memory = 2 * gauss_composite(
                             [&](double u) {
                                 if (u == 0.0) return 0.0;
                                 return path.alpha(t - u * u) * std::exp(-p.c0 * p.c0 * (p.T - t + u * u) / (4 * u * u));
                             },
                             ub, 4);
        Phi1Options po;
        po.mu_correction = true;
        out.mu_correction = -std::sqrt(pi) * phi1_origin(path, t, po).mu_correction;
    }
    return out;
}

}  // namespace blowup
