#include <doctest.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "blowuplab/errors.hpp"
#include "blowuplab/nonlocal.hpp"

using namespace blowup;

namespace {
const double pi = std::numbers::pi;

double gk(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

// 3D heat kernel
double heat3(double r, double t) { return std::pow(4 * pi * t, -1.5) * std::exp(-r * r / (4 * t)); }

ModulationPath wiggle_path(const BlowupParams& p, double lam0, int n = 4000) {
    std::vector<double> ts, l, dl;
    for (int i = 0; i <= n; ++i) {
        const double t = p.T * i / n;
        const double s = (p.T - t) / p.T;
        ts.push_back(t);
        l.push_back(lam0 * std::pow(s, p.k));
        dl.push_back(-lam0 * p.k * std::pow(s, p.k - 1) / p.T);
    }
    return ModulationPath(p, ts, l, dl);
}

// exponents for which the outer bounds are probed: ν - 1/2 well away from zero,
// a2 below the endpoint 2 (where the rhs2 bound picks up a logarithm)
// and k large
BlowupParams probe_params() {
    BlowupParams q;
    q.k = 6;
    q.beta = 0.05;
    q.a = 0.4;
    q.nu = 0.8;
    q.a2 = 1.8;
    q.nu2 = 0.4;
    return q;
}
}  // namespace

TEST_CASE("block closed forms") {
    CHECK(block_value(3.0, 0.0) == 1.0);
    CHECK(block_value(1.0, 0.75) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(block_half_integral(0.0, 0.3) == doctest::Approx(2 * std::sqrt(0.3)).epsilon(1e-15));
    CHECK(block_half_integral(0.25, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS(block_value(1.0, -1.0));
    const double T = 0.05;
    for (double kappa : {0.5, 3.0, 40.0})
        for (double t : {0.1 * T, T, 2 * T}) {
            // direct 3D convolution of e^{-κ|x|²} with the heat kernel, at the origin
            const double conv = gk([&](double r) { return heat3(r, t) * std::exp(-kappa * r * r) * 4 * pi * r * r; },
                                   0.0, 40 * std::sqrt(t));
            CHECK(std::abs(conv - block_value(kappa, t)) < 1e-8);
            // weakly singular definition through u = √(t-s)
            const double half = 2 * gk([&](double u) { return block_value(kappa, t - u * u); }, 0.0, std::sqrt(t));
            CHECK(std::abs(half - block_half_integral(kappa, t)) < 1e-8);
            // and off the origin
            const double x = 0.3;
            CHECK(std::abs(heat_flow_radial([&](double r) { return std::exp(-kappa * r * r); }, {}, 1e300, x, t).value -
                           block_value_at(kappa, x, t)) < 1e-8);
        }
}

TEST_CASE("upsilon combinations") {
    UpsilonCombo one{{1.0}, {0.3}, 0};
    CHECK(upsilon_eval(one, 0.1) == doctest::Approx(std::sqrt(0.1) / 0.4).epsilon(1e-15));
    UpsilonCombo zero{{0.0, 0.0}, {0.1, 0.2}, 0};
    CHECK(upsilon_eval(zero, 0.05) == 0.0);
    const double h = 1e-6;
    UpsilonCombo two{{1.0, -0.4}, {0.02, 0.05}, 0};
    CHECK(upsilon_eval_d1(two, 0.03) ==
          doctest::Approx((upsilon_eval(two, 0.03 + h) - upsilon_eval(two, 0.03 - h)) / (2 * h)).epsilon(1e-7));
}

TEST_CASE("vanishing system") {
    const double T = 0.01;
    const auto one = solve_vanishing(T, {0.02}, 1);
    CHECK(one.v[0] == doctest::Approx(T + 0.02).epsilon(1e-15));

    const std::vector<double> tk{T, 2 * T, 3 * T};
    const auto s = solve_vanishing(T, tk, 2);
    CHECK(s.residual < 1e-12);
    CHECK(std::isfinite(s.condition));
    // permuted rates give the permuted solution
    const auto sp = solve_vanishing(T, {3 * T, T, 2 * T}, 2);
    CHECK(sp.v[0] == doctest::Approx(s.v[2]).epsilon(1e-10));
    CHECK(sp.v[1] == doctest::Approx(s.v[0]).epsilon(1e-10));
    CHECK(sp.v[2] == doctest::Approx(s.v[1]).epsilon(1e-10));
    // row p is the Taylor coefficient of (t-T)^{p-1}: check against finite differences
    UpsilonCombo c{s.v, tk, 0};
    const auto hat = [&](double t) { return upsilon_eval(c, t) / std::sqrt(t); };
    const double h = 1e-4 * T;
    CHECK(std::abs(hat(T)) < 1e-10 * std::abs(s.v[0]) / T);
    CHECK((hat(T + h) - hat(T - h)) / (2 * h) == doctest::Approx(1.0).epsilon(1e-5));

    CHECK_THROWS_AS(solve_vanishing(T, {T, T}, 1), ConfigError);
    CHECK_THROWS_AS(solve_vanishing(T, {T}, 2), ConfigError);
    CHECK_THROWS_AS(solve_vanishing(T, {T, T * (1 + 1e-9), T * (1 + 2e-9)}, 1), NumericalError);

    // k = 3, rates (1,2,3)T: order-2 combination
    const auto c2 = vanishing_combo(T, tk, 2);
    CHECK(vanishing_order_fit(c2, T) == doctest::Approx(2.0).epsilon(0.02));
    for (int k = 1; k <= 4; ++k) {
        std::vector<double> rates;
        for (int j = 1; j <= k + 1; ++j) rates.push_back(j * T);
        for (int i = 1; i <= k; ++i) CHECK(vanishing_order_fit(vanishing_combo(T, rates, i), T) == doctest::Approx(i).epsilon(0.02));
    }
    CHECK_THROWS_AS(vanishing_combo(T, tk, 3), ConfigError);
}

TEST_CASE("radial kernel") {
    const double tau = 0.02;
    for (double x : {0.05, 0.3})
        for (double r : {0.01, 0.1, 0.4}) {
            const double h = 1e-6;
            const double fd = (radial_kernel(x + h, r, tau).value - radial_kernel(x - h, r, tau).value) / (2 * h);
            CHECK(radial_kernel(x, r, tau).dx == doctest::Approx(fd).epsilon(1e-6));
            // angular average of the 3D kernel
            const double avg = gk([&](double c) { return heat3(std::sqrt(x * x + r * r - 2 * x * r * c), tau); }, -1.0, 1.0);
            CHECK(radial_kernel(x, r, tau).value == doctest::Approx(2 * pi * r * r * avg).epsilon(1e-10));
        }
    // the two branches meet at z = 1/10
    const double x = 0.1, r = 2 * 0.1 * tau / x;
    CHECK(radial_kernel(x, r * (1 - 1e-12), tau).value == doctest::Approx(radial_kernel(x, r * (1 + 1e-12), tau).value).epsilon(1e-10));
    CHECK(radial_kernel(x, r * (1 - 1e-12), tau).dx == doctest::Approx(radial_kernel(x, r * (1 + 1e-12), tau).dx).epsilon(1e-9));
    CHECK(radial_kernel(1e-300, 0.1, tau).value == doctest::Approx(radial_kernel(0.0, 0.1, tau).value).epsilon(1e-12));
}

TEST_CASE("Duhamel oracles") {
    RadialSource one;
    one.slice = [](double) {
        SourceSlice s;
        s.f = [](double) { return 1.0; };
        return s;
    };
    for (double x : {0.0, 0.3, 2.0}) {
        const auto d = duhamel_radial(one, x, 0.7);
        CHECK(d.value == doctest::Approx(0.7).epsilon(1e-10));
        CHECK(std::abs(d.gradient) < 1e-9);
    }
    CHECK(duhamel_radial(one, 0.1, 0.0).value == 0.0);

    // caloric source G(·, s+s0): ψ = t G(x, t+s0)
    const double s0 = 0.05;
    RadialSource cal;
    cal.slice = [s0](double s) {
        SourceSlice sl;
        sl.f = [s, s0](double r) { return heat3(r, s + s0); };
        return sl;
    };
    for (double x : {0.0, 0.1, 0.5}) {
        const double t = 0.3, g = heat3(x, t + s0);
        const auto d = duhamel_radial(cal, x, t);
        CHECK(d.value == doctest::Approx(t * g).epsilon(1e-8));
        CHECK(d.gradient == doctest::Approx(-t * g * x / (2 * (t + s0))).epsilon(1e-8).scale(1e-12));
    }
    // semigroup: heat flow of a heat-kernel slice is the later slice
    for (double x : {0.0, 0.2, 0.7}) {
        const auto d = heat_flow_radial([](double r) { return heat3(r, 0.01); }, {}, 1e300, x, 0.04);
        CHECK(d.value == doctest::Approx(heat3(x, 0.05)).epsilon(1e-6));
    }
}

TEST_CASE("phi1 at the origin") {
    BlowupParams p;
    p.k = 2;
    p.T = 0.01;
    const ModulationPath flat(p);
    CHECK(phi1_origin(flat, 0.005).total() == 0.0);
    CHECK(phi1_bulk([](double) { return 1.0; }, p.T, p.c0, 0.005, true) ==
          doctest::Approx(2 * std::sqrt(0.005 / pi)).epsilon(1e-13));

    // linear in α and in the block weights
    const auto a1 = [](double s) { return std::cos(30 * s); };
    const auto a2 = [](double s) { return s * s; };
    const double b1 = phi1_bulk(a1, p.T, p.c0, 0.006), b2 = phi1_bulk(a2, p.T, p.c0, 0.006);
    CHECK(phi1_bulk([&](double s) { return a1(s) + 2 * a2(s); }, p.T, p.c0, 0.006) ==
          doctest::Approx(b1 + 2 * b2).epsilon(1e-13));
    Phi1Options o;
    o.c = {1.0, -2.0};
    o.kappa = {3.0, 7.0};
    const double blocks = phi1_origin(flat, 0.004, o).blocks;
    CHECK(blocks == doctest::Approx(block_value(3.0, 0.004) - 2 * block_value(7.0, 0.004)).epsilon(1e-14));
    o.c = {2.0, -4.0};
    CHECK(phi1_origin(flat, 0.004, o).blocks == doctest::Approx(2 * blocks).epsilon(1e-14));
    o.c = {1.0};
    CHECK_THROWS_AS(phi1_origin(flat, 0.004, o), ConfigError);

    // the 1D reduction with its correction equals the full radial Duhamel integral
    const auto path = wiggle_path(p, 0.1);
    for (double t : {0.002, 0.005, 0.009, 0.0099}) {
        const auto split = phi1_origin(path, t);
        const double direct = duhamel_radial(phi1_source(path), 0.0, t).value;
        CHECK(std::abs(split.total() - direct) <= 1e-4 * std::abs(direct));
        CHECK(std::abs(split.mu_correction) < std::abs(split.bulk));
    }
    const auto sparse = wiggle_path(p, 0.1, 10);
    CHECK_THROWS_AS(phi1_origin(sparse, 0.005), NumericalError);
}

TEST_CASE("outer bound probes") {
    const auto q = probe_params();
    CHECK(all_satisfied(check_constraints(q)));
    ProbeOptions o;
    o.t_levels = 6;
    o.fit_levels = 3;
    o.x_points = 8;

    const auto r3 = bound_probe_appendix(ProbeFamily::rhs3, q, o);
    CHECK(r3[0].ratio_sup <= 1 + 1e-9);
    CHECK(r3[1].ratio_sup <= 1 + 1e-9);
    CHECK(std::isnan(r3[2].fitted_power));

    const auto r1 = bound_probe_appendix(ProbeFamily::rhs1, q, o);
    for (int b : {0, 1}) {
        CHECK(r1[b].ratio_by_T.size() == 2);
        const auto [lo, hi] = std::minmax_element(r1[b].ratio_by_T.begin(), r1[b].ratio_by_T.end());
        CHECK(*hi / *lo < 2.0);
        CHECK(r1[b].fitted_power == doctest::Approx(r1[b].claimed_power).epsilon(0.1));
    }
    CHECK(r1[1].claimed_power == doctest::Approx(q.nu - 0.5));

    const auto csv = probe_csv(r1);
    CHECK(csv.rfind("family,bound_id,ratio_sup,fitted_power,claimed_power\n", 0) == 0);
    CHECK(csv.find("rhs1,outerT,") != std::string::npos);
}

TEST_CASE("cardinal combinations") {
    const double T = 0.01;
    std::vector<double> tk{T, 2 * T, 3 * T};
    for (int first : {0, 1}) {
        for (int order = first; order < first + 3; ++order) {
            const auto c = cardinal_combo(T, tk, order, first);
            // remove the free constant, then compare with (T-t)^order
            const double c0 = first ? upsilon_eval(c, T) : 0.0;
            for (double d : {1e-3 * T, 1e-2 * T}) {
                const double v = upsilon_eval(c, T - d) - c0;
                const double rel = std::abs(v - std::pow(d, order)) / std::pow(d, order);
                // remainder is O(d^{first+3}) against d^order
                CHECK(rel < 50 * std::pow(d / T, first + 3 - order));
            }
        }
    }
    CHECK_THROWS_AS(cardinal_combo(T, tk, 3, 0), ConfigError);
    CHECK_THROWS_AS(cardinal_combo(T, tk, 0, 1), ConfigError);
    CHECK_THROWS_AS(cardinal_combo(T, {T, T}, 0), ConfigError);
}

TEST_CASE("blocks reproduce the upsilon combination") {
    const double T = 0.01;
    const auto c = cardinal_combo(T, {T, 2 * T}, 1, 1);
    const auto b = blocks_of(c);
    for (double t : {1e-5, 0.003, 0.0099}) CHECK(b.half_integral(t) == doctest::Approx(upsilon_eval(c, t)).epsilon(1e-12));
    // merged combination is linear in the coefficients
    const auto c2 = cardinal_combo(T, {T, 2 * T}, 2, 1);
    const auto m = blocks_of({c, c2}, {2.0, -0.5});
    CHECK(m.kappa.size() == 2);
    for (double t : {0.002, 0.008})
        CHECK(m.value(t) == doctest::Approx(2 * blocks_of(c).value(t) - 0.5 * blocks_of(c2).value(t)).epsilon(1e-12));
    CHECK_THROWS_AS(blocks_of({c}, {1.0, 2.0}), ConfigError);
}
