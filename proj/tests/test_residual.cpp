#include <doctest.h>

#include <cmath>
#include <random>

#include "blowuplab/errors.hpp"
#include "blowuplab/numerics.hpp"
#include "blowuplab/profiles.hpp"
#include "blowuplab/residual.hpp"

using namespace blowup;

namespace {

FieldSnapshot sample(const RadialGrid& g, const std::function<double(double)>& f, double t = 0.0) {
    std::vector<double> v;
    for (double r : g.nodes()) v.push_back(f(r));
    return FieldSnapshot(g, v, t);
}

double sup_abs(const std::vector<double>& v, std::size_t skip_last = 0) {
    double m = 0.0;
    for (std::size_t i = 0; i + skip_last < v.size(); ++i) m = std::max(m, std::abs(v[i]));
    return m;
}

ModulationPath wiggle_path(const BlowupParams& p, double lam0) {
    std::vector<double> ts, l, dl;
    const int n = 4000;
    for (int i = 0; i <= n; ++i) {
        const double t = p.T * i / n;
        const double s = (p.T - t) / p.T;
        ts.push_back(t);
        l.push_back(lam0 * std::pow(s, p.k));
        dl.push_back(-lam0 * p.k * std::pow(s, p.k - 1) / p.T);
    }
    return ModulationPath(p, ts, l, dl);
}

}  // namespace

TEST_CASE("radial laplacian on polynomials") {
    for (const auto& g : {RadialGrid::uniform(2.0, 40), RadialGrid::geometric(5.0, 60, 0.01)}) {
        const auto lap = radial_laplacian(sample(g, [](double r) { return r * r; }));
        for (double v : lap.values) CHECK(v == doctest::Approx(6.0).epsilon(1e-9));
        const auto zero = radial_laplacian(sample(g, [](double) { return 1.0; }));
        for (double v : zero.values) CHECK(std::abs(v) < 1e-9);
    }
}

TEST_CASE("radial laplacian of the bubble converges at second order") {
    std::vector<double> lh, le;
    for (int n : {500, 1000, 2000, 4000}) {
        const auto g = RadialGrid::uniform(50.0, n);
        const auto f = sample(g, bubble_w);
        const auto lap = radial_laplacian(f);
        double e = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) e = std::max(e, std::abs(lap.values[i] + std::pow(f.values[i], 5)));
        lh.push_back(std::log(50.0 / n));
        le.push_back(std::log(e));
    }
    CHECK(fit_line(lh, le).slope > 1.95);
}

TEST_CASE("error operator") {
    // steady bubble at fixed scale
    const double mu = 0.3;
    auto bub = [mu](double r) { return bubble_w(r / mu) / std::sqrt(mu); };
    double prev = 0.0;
    for (int n : {400, 800, 1600}) {
        const auto g = RadialGrid::uniform(10.0, n);
        const auto s = error_S(sample(g, bub, 0.1), sample(g, bub, 0.0), 0.1);
        const double e = sup_abs(s.values);
        if (prev > 0.0) CHECK(prev / e > 3.8);
        prev = e;
    }
    // heat polynomial r² + 6t: only the quintic survives
    const auto g = RadialGrid::uniform(1.0, 50);
    const auto heat = [](double t) { return [t](double r) { return r * r + 6 * t; }; };
    const auto s = error_S(sample(g, heat(0.2), 0.2), sample(g, heat(0.1), 0.1), 0.1);
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(s.values[i] == doctest::Approx(std::pow(g[i] * g[i] + 0.9, 5)).epsilon(1e-9));
    CHECK_THROWS_AS(error_S(sample(g, heat(0.2)), sample(RadialGrid::uniform(2.0, 50), heat(0.1)), 0.1), ConfigError);

    // caloric outer solution: S = u⁵ away from the pole
    BlowupParams p;
    p.k = 2;
    p.T = 1.0;
    const double t = 0.5;
    double e_prev = 0.0, e = 0.0;
    for (int n : {250, 500, 1000}) {
        const auto go = RadialGrid::uniform(0.5, 1.0, n);
        std::vector<double> dudt;
        for (double x : go.nodes()) dudt.push_back(u_outer_jet(x, t, p).dt);
        const auto uo = sample(go, [&](double x) { return u_outer(x, t, p); }, t);
        const auto so = error_S_analytic(uo, dudt);
        e = 0.0;
        // interior nodes; the one-sided end stencils converge at the same order with a larger constant
        for (std::size_t i = 1; i + 1 < go.size(); ++i)
            e = std::max(e, std::abs(so.values[i] - std::pow(uo.values[i], 5)));
        if (e_prev > 0.0) CHECK(e_prev / e > 3.8);
        e_prev = e;
    }
    CHECK(e < 1e-5);
}

TEST_CASE("leading term") {
    BlowupParams p;
    p.T = 0.01;
    const ModulationPath flat(p);
    CHECK(leading_term(0.0, 0.005, flat) == 0.0);
    const auto path = wiggle_path(p, 0.3);
    const double t = 0.005;
    CHECK(leading_term(0.0, t, path) == doctest::Approx(path.alpha(t) / path.mu(t)).epsilon(1e-14));
    CHECK(leading_term(1.0001 * p.c0 * std::sqrt(p.T - t), t, path) == 0.0);
    CHECK(leading_term(0.9999 * p.c0 * std::sqrt(p.T - t), t, path) != 0.0);
}

TEST_CASE("g4 bound probe") {
    for (double lam0 : {0.0, 0.2}) {
        double lo = 1e300, hi = 0.0;
        for (double T : {1e-1, 1e-2, 1e-3}) {
            BlowupParams p;
            p.T = T;
            const auto path = lam0 == 0.0 ? ModulationPath(p) : wiggle_path(p, lam0);
            const double t = 0.5 * T;
            const auto a = bound_probe_g4(t, path, g4_probe_grid(t, p, 1500));
            const auto b = bound_probe_g4(t, path, g4_probe_grid(t, p, 3000));
            CHECK(std::isfinite(a.ratio.value));
            CHECK(a.ratio.value > 0.0);
            CHECK(std::abs(a.ratio.value / b.ratio.value - 1.0) < 0.05);
            lo = std::min(lo, b.ratio.value);
            hi = std::max(hi, b.ratio.value);
        }
        // T-independent constant
        CHECK(hi / lo < 2.0);
    }
}

TEST_CASE("inner weighted norm") {
    BlowupParams p;
    p.T = 0.01;
    Samples s;
    for (double t : {0.0, 0.003, 0.006}) {
        const double R = R_of(t, p), m = mu0(t, p);
        const auto g = RadialGrid::uniform(2.0 * R, 200);
        s.push_back(sample(g, [&](double y) { return std::pow(m, p.nu) / (1 + std::pow(y, 2 + p.sigma)); }, t));
    }
    CHECK(norm_inner(s, p).value == doctest::Approx(1.0).epsilon(1e-12));

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Samples a = s, b = s, sum = s, scaled = s;
    for (std::size_t k = 0; k < s.size(); ++k)
        for (std::size_t i = 0; i < s[k].values.size(); ++i) {
            a[k].values[i] = U(rng) * 1e-3;
            b[k].values[i] = U(rng) * 1e-3;
            sum[k].values[i] = a[k].values[i] + b[k].values[i];
            scaled[k].values[i] = -3.0 * a[k].values[i];
        }
    CHECK(norm_inner(sum, p).value <= norm_inner(a, p).value + norm_inner(b, p).value);
    CHECK(norm_inner(scaled, p).value == doctest::Approx(3.0 * norm_inner(a, p).value).epsilon(1e-14));
    CHECK_THROWS_AS(norm_inner({}, p), ConfigError);
    Samples short_cover{sample(RadialGrid::uniform(1.0, 20), [](double) { return 1.0; }, 0.0)};
    CHECK_THROWS_AS(norm_inner(short_cover, p), ConfigError);
}

TEST_CASE("inner norm with gradient") {
    BlowupParams p;
    p.T = 0.01;
    const double t = 0.002, R = R_of(t, p), m = mu0(t, p);
    const auto g = RadialGrid::uniform(2.0 * R, 400);
    auto snap = sample(g, [](double y) { return 1.0 / (1.0 + y); }, t);
    CHECK_THROWS_AS(norm_inner0({snap}, p), ConfigError);
    for (double y : g.nodes()) snap.derivative.push_back(-1.0 / ((1 + y) * (1 + y)));
    // (1+y)[|φ| + (1+y)|φ'|] = 2 everywhere
    const double expect = 2.0 / (std::pow(m, p.nu) * std::pow(R, (4 - p.sigma) / 3));
    CHECK(norm_inner0({snap}, p).value == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("outer right-hand side norm") {
    BlowupParams p;
    p.T = 0.01;
    const double t = 0.004;
    const double m = mu0(t, p), R = R_of(t, p);
    const auto g = RadialGrid::geometric(10.0, 400, 1e-3 * m * R).with_nodes({m * R, 2 * m * R});
    const auto one = norm_outer_rhs({sample(g, [](double) { return 1.0; }, t)}, p);
    CHECK(one.value <= 1.0);
    CHECK(one.value > 0.99);
    const auto r1 = norm_outer_rhs({sample(g, [&](double x) { return outer_weights(x, t, p).rho1; }, t)}, p);
    CHECK(r1.value <= 1.0);
    CHECK(r1.value > 0.5);

    // a bump of height μ0^{ν-5/2} R^{-1-σ} on |x| ~ μ0 R scores like R^{1+a-σ}
    std::vector<double> lr, lv;
    for (double T : {1e-1, 1e-2, 1e-3}) {
        BlowupParams q = p;
        q.T = T;
        const double tt = 0.5 * T, mm = mu0(tt, q), RR = R_of(tt, q);
        const auto gg = RadialGrid::uniform(4 * mm * RR, 800);
        const double h = std::pow(mm, q.nu - 2.5) * std::pow(RR, -1 - q.sigma);
        const auto rep = norm_outer_rhs(
            {sample(gg, [&](double x) { return x >= mm * RR && x <= 2 * mm * RR ? h : 0.0; }, tt)}, q);
        lr.push_back(std::log(RR));
        lv.push_back(std::log(rep.value));
    }
    CHECK(fit_line(lr, lv).slope == doctest::Approx(1 + p.a - p.sigma).epsilon(0.05));
}

TEST_CASE("delta norm") {
    std::vector<double> t{0.0, 0.5, 0.9}, h{1.0, 0.5, 0.1};
    const auto rep = norm_delta(t, h, 1.0, 1.0);
    CHECK(rep.value == doctest::Approx(1.0));
    CHECK_THROWS(norm_delta({1.0}, {1.0}, 1.0, 1.0));
}

TEST_CASE("outer solution norm") {
    BlowupParams p;
    p.T = 0.01;
    p.nu = 0.6;
    OuterSolOptions opt;
    opt.x_max = 0.5;
    opt.x_intervals = 40;
    opt.t_levels = 12;
    opt.pair_levels = 4;
    const auto zero = norm_outer_sol({[](double, double) { return 0.0; }, [](double, double) { return 0.0; }}, p, opt);
    CHECK(zero.total.value == 0.0);

    // μ0^{ν-1/2} R^{-a}, written in T - t so that t = T is allowed
    const double c = std::sqrt(3.0) * p.A;
    auto psi_t = [&](double t) {
        const double m = c * std::pow(p.T - t, 2 * p.k);
        return m == 0.0 ? 0.0 : std::pow(m, p.nu - 0.5 + p.a * p.beta);
    };
    RadialField psi{[&](double, double t) { return psi_t(t); }, [](double, double) { return 0.0; }};
    const auto rep = norm_outer_sol(psi, p, opt);
    CHECK(rep.converged);
    CHECK(rep.terms[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.terms[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.terms[1] == 0.0);
    CHECK(rep.terms[3] == 0.0);
    CHECK(rep.terms[4] < rep.terms[0]);

    RadialField twice{[&](double x, double t) { return -2.0 * psi.value(x, t); }, psi.gradient};
    CHECK(norm_outer_sol(twice, p, opt).total.value == doctest::Approx(2.0 * rep.total.value).epsilon(1e-12));
    CHECK_THROWS_AS(norm_outer_sol({psi.value, {}}, p, opt), ConfigError);
    RadialField no_end{[&](double x, double t) { return t >= p.T ? NAN : psi.value(x, t); }, psi.gradient};
    CHECK_THROWS_AS(norm_outer_sol(no_end, p, opt), ConfigError);
}

TEST_CASE("right-hand sides with vanishing perturbations") {
    BlowupParams p;
    p.T = 0.01;
    const ModulationPath path(p);
    const RadialField zero{[](double, double) { return 0.0; }, [](double, double) { return 0.0; }};
    const double t = 0.005, m = mu0(t, p), sq = std::sqrt(p.T - t);
    for (double x : {0.5 * m, 3.0 * m * R_of(t, p), 0.5 * p.r * sq, 1.5 * p.r * sq, 0.15 * sq}) {
        const GTerms g = rhs_G(x, t, zero, zero, {}, path);
        CHECK(g.cutoff_dt == 0.0);
        CHECK(g.potential == 0.0);
        CHECK(g.quintic == 0.0);
        CHECK(g.phi1_nonlinear == 0.0);
        const double eR = CutoffSet{p}.etaR(x, t).v;
        CHECK(g.total() == doctest::Approx((error_S_U1(x, t, path) - leading_term(x, t, path)) * (1 - eR)));
    }
    for (double y : {0.0, 1.0, 10.0}) {
        const HTerms h = rhs_H(y, t, zero, zero, {}, path);
        CHECK(h.potential_phi == 0.0);
        CHECK(h.drift == 0.0);
        CHECK(h.total() == doctest::Approx(std::pow(m, 2.5) * error_S_U1(m * y, t, path)));
    }
    CHECK_THROWS_AS(rhs_G(0.1, t, {zero.value, {}}, zero, {}, path), ConfigError);
    CHECK_THROWS_AS(rhs_H(0.1, t, zero, {zero.value, {}}, {}, path), ConfigError);
}

TEST_CASE("quintic remainder in G is quadratic in the perturbation") {
    BlowupParams p;
    p.T = 0.01;
    const ModulationPath path(p);
    const double t = 0.005, x = 0.5 * p.r * std::sqrt(p.T - t);
    const RadialField zero{[](double, double) { return 0.0; }, [](double, double) { return 0.0; }};
    std::vector<double> ratios;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        const RadialField psi{[eps](double, double) { return eps; }, [](double, double) { return 0.0; }};
        ratios.push_back(rhs_G(x, t, zero, psi, {}, path).quintic / (eps * eps));
    }
    CHECK(ratios[2] == doctest::Approx(ratios[1]).epsilon(0.05));
    CHECK(std::abs(ratios[0]) < 2 * std::abs(ratios[2]) + 1.0);
}
