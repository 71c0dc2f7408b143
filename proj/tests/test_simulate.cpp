#include <doctest.h>

#include <cmath>
#include <sstream>

#include "blowuplab/errors.hpp"
#include "blowuplab/numerics.hpp"
#include "blowuplab/profiles.hpp"
#include "blowuplab/simulate.hpp"

using namespace blowup;

namespace {

FieldSnapshot gaussian(double amp, double r_max, std::size_t n) {
    const RadialGrid g = RadialGrid::uniform(r_max, n);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = amp * std::exp(-g[i] * g[i]);
    return FieldSnapshot(g, v);
}

Trajectory synthetic(double T, double p, int n) {
    Trajectory tr;
    tr.reason = Termination::blowup_threshold;
    for (int i = 0; i < n; ++i) {
        const double t = T * (1 - std::pow(2.0, -0.25 * i));
        tr.samples.push_back({t, 0.0, std::pow(T - t, -p), 1.0});
    }
    return tr;
}

// orthogonal to Z0 on B_2R: (1+y)^{-2-σ} minus a multiple of a Gaussian
std::function<double(double, double)> orthogonal_bump(double R, double sigma) {
    std::vector<double> br{0.0};
    for (double b = 0.5; b < 2 * R; b *= 2) br.push_back(b);
    br.push_back(2 * R);
    const auto f1 = [sigma](double y) { return std::pow(1 + y, -2 - sigma); };
    const auto f2 = [](double y) { return std::exp(-y * y); };
    const double i1 = gauss_composite([&](double y) { return f1(y) * kernel_Z0(y) * y * y; }, br, 4);
    const double i2 = gauss_composite([&](double y) { return f2(y) * kernel_Z0(y) * y * y; }, br, 4);
    const double c = i1 / i2;
    return [=](double y, double) { return f1(y) - c * f2(y); };
}

}  // namespace

TEST_CASE("finite-volume laplacian") {
    SUBCASE("constants and the origin stencil") {
        const RadialGrid g = RadialGrid::geometric(5.0, 64, 0.01);
        std::vector<double> one(g.size(), 1.0), sq(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) sq[i] = g[i] * g[i];
        const auto l1 = fv_laplacian(g.nodes(), one);
        for (std::size_t i = 0; i + 1 < g.size(); ++i) CHECK(l1[i] == 0.0);
        CHECK(fv_laplacian(g.nodes(), sq)[0] == doctest::Approx(6.0).epsilon(1e-13));
    }
    SUBCASE("second order on a smooth radial function") {
        double prev = 0.0;
        for (std::size_t n : {100u, 200u, 400u}) {
            const RadialGrid g = RadialGrid::uniform(6.0, n);
            std::vector<double> u(g.size());
            for (std::size_t i = 0; i < g.size(); ++i) u[i] = std::exp(-g[i] * g[i]);
            const auto l = fv_laplacian(g.nodes(), u);
            double err = 0.0;
            for (std::size_t i = 0; i + 1 < g.size(); ++i) {
                const double r = g[i];
                err = std::max(err, std::abs(l[i] - (4 * r * r - 6) * std::exp(-r * r)));
            }
            if (prev > 0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.1));
            prev = err;
        }
    }
    SUBCASE("grids away from the origin are rejected") {
        const RadialGrid g = RadialGrid::uniform(1.0, 2.0, 16);
        CHECK_THROWS_AS(fv_laplacian(g.nodes(), std::vector<double>(g.size(), 0.0)), ConfigError);
    }
}

TEST_CASE("pointwise blow-up without diffusion") {
    const RadialGrid g = RadialGrid::uniform(1.0, 16);
    SimControls c;
    c.diffusion = false;
    c.regrid = false;
    c.threshold = 1e6;
    const Trajectory tr = run(FieldSnapshot(g, std::vector<double>(g.size(), 2.0)), c);
    CHECK(tr.reason == Termination::blowup_threshold);
    const double exact = std::pow(2.0, -4) / 4;
    CHECK(std::abs(tr.samples.back().t - exact) < 0.01 * exact);
    const RateFit f = fit_rate(tr);
    CHECK(f.exponent == doctest::Approx(0.25).epsilon(1e-4));
    CHECK(f.T_star == doctest::Approx(exact).epsilon(1e-3));
}

TEST_CASE("zero data and steady bubble") {
    SUBCASE("zero stays zero and decays at once") {
        const RadialGrid g = RadialGrid::uniform(5.0, 32);
        const Trajectory tr = run(FieldSnapshot(g, std::vector<double>(g.size(), 0.0)));
        CHECK(tr.reason == Termination::decay);
        CHECK(tr.steps == 0);
    }
    SUBCASE("drift of the bubble is second order in h") {
        double prev = 0.0;
        for (std::size_t n : {200u, 400u}) {
            const RadialGrid g = RadialGrid::uniform(20.0, n);
            std::vector<double> w(g.size());
            for (std::size_t i = 0; i < g.size(); ++i) w[i] = bubble_w(g[i]);
            SimControls c;
            c.regrid = false;
            c.horizon = 0.5;
            const Trajectory tr = run(FieldSnapshot(g, w), c);
            CHECK(tr.reason == Termination::horizon);
            double drift = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) drift = std::max(drift, std::abs(tr.snapshots.back().values[i] - w[i]));
            if (prev > 0) CHECK(prev / drift == doctest::Approx(4.0).epsilon(0.15));
            prev = drift;
        }
    }
}

TEST_CASE("gaussian data") {
    SUBCASE("large data reaches the threshold with the ODE rate") {
        double p[2];
        for (int s = 1; s <= 2; ++s) {
            SimControls c;
            c.core_nodes = 8.0 * s;
            c.cfl = 0.4 / s;
            c.reaction = 0.1 / s;
            const Trajectory tr = run(gaussian(5.0, 10.0, 400 * s), c);
            REQUIRE(tr.reason == Termination::blowup_threshold);
            CHECK(tr.regrids > 0);
            const RateFit f = fit_rate(tr);
            CHECK(std::abs(f.exponent - 0.25) < 0.025);
            p[s - 1] = f.exponent;
            // symmetric profile: the maximum sits at the origin
            const auto& end = tr.snapshots.back();
            CHECK(end.values[0] == doctest::Approx(tr.samples.back().sup));
            CHECK(end.values[1] <= end.values[0]);
        }
        CHECK(std::abs(p[0] - p[1]) < 0.02 * p[1]);
    }
    SUBCASE("small data decays, eventually monotonically") {
        SimControls c;
        c.decay = 1e-5;
        const Trajectory tr = run(gaussian(1e-3, 10.0, 200), c);
        REQUIRE(tr.reason == Termination::decay);
        const std::size_t n = tr.samples.size();
        for (std::size_t i = n / 2; i + 1 < n; ++i) CHECK(tr.samples[i + 1].sup <= tr.samples[i].sup);
        CHECK_THROWS_AS(fit_rate(tr), ConfigError);
    }
}

TEST_CASE("rate fit on synthetic trajectories") {
    for (double p : {0.25, 1.0}) {
        const RateFit f = fit_rate(synthetic(0.3, p, 60));
        CHECK(f.exponent == doctest::Approx(p).epsilon(1e-6));
        CHECK(f.T_star == doctest::Approx(0.3).epsilon(1e-9));
        CHECK(f.residual < 1e-8);
    }
    SUBCASE("short windows are refused") {
        CHECK_THROWS_AS(fit_rate(synthetic(0.3, 0.25, 6)), NumericalError);
    }
    SUBCASE("a poor power law is refused") {
        Trajectory tr = synthetic(0.3, 1.0, 60);
        for (std::size_t i = 0; i < tr.samples.size(); ++i) tr.samples[i].sup *= (i % 2 ? 3.0 : 1.0);
        CHECK_THROWS_AS(fit_rate(tr), NumericalError);
    }
    SUBCASE("text report") {
        const std::string s = rate_fit_text(fit_rate(synthetic(0.3, 1.0, 60)));
        CHECK(s.find("exponent=") != std::string::npos);
        CHECK(s.find("T_star=") != std::string::npos);
    }
}

TEST_CASE("scale tracking") {
    SUBCASE("bubble at a given scale") {
        const double mu = 1e-3;
        const RadialGrid g = RadialGrid::geometric(1.0, 200, mu / 16);
        std::vector<double> v(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) v[i] = std::pow(mu, -0.5) * bubble_w(g[i] / mu);
        Trajectory tr;
        tr.samples.push_back({0.0, 0.0, v[0], v[0]});
        tr.samples.push_back({1e-9, 0.0, v[0], v[0]});
        CHECK(track_mu(tr)(0.0) == doctest::Approx(mu).epsilon(1e-12));
    }
    SUBCASE("nonpositive centre value") {
        Trajectory tr;
        tr.samples.push_back({0.0, 0.0, 1.0, -1.0});
        tr.samples.push_back({1.0, 0.0, 1.0, 1.0});
        CHECK_THROWS_AS(track_mu(tr), NumericalError);
    }
    SUBCASE("glued data starts at the modulation scale") {
        BlowupParams p;
        p.k = 1;
        p.T = 0.01;
        const ModulationPath path(p);
        const double xm = 10 * std::sqrt(p.T);
        const FieldSnapshot u = glued_initial_data(path, xm, 400);
        SimControls c;
        c.boundary = glued_boundary(path, xm);
        const Trajectory tr = run(u, c);
        const TimeSeries mu = track_mu(tr);
        const double r0 = mu(0.0) / path.mu0(0.0);
        CHECK(r0 >= 0.9);
        CHECK(r0 <= 1.1);
        const std::string csv = trajectory_csv(tr);
        CHECK(csv.rfind("t,sup_norm,u0,mu_est\n", 0) == 0);
    }
}

TEST_CASE("inner evolution probe") {
    BlowupParams p;
    SUBCASE("no source, no response") {
        const auto r = inner_evolution_probe([](double, double) { return 0.0; }, p);
        CHECK(r.ratio == 0.0);
    }
    SUBCASE("orthogonal bump stays within the weighted bound as R grows") {
        double prev = 0.0;
        for (double R : {20.0, 40.0}) {
            InnerProbeOptions o;
            o.R = R;
            o.intervals = static_cast<std::size_t>(16 * R);
            const auto r = inner_evolution_probe(orthogonal_bump(R, p.sigma), p, o);
            CHECK(r.lambda_minus == doctest::Approx(-3.63).epsilon(0.01));
            CHECK(r.orthogonality < 1e-10);
            CHECK(r.e0 == doctest::Approx(r.e0_scan).epsilon(1e-6));
            CHECK(r.ratio > 0);
            CHECK(r.ratio < 1.0);
            if (prev > 0) CHECK(r.ratio <= prev);
            prev = r.ratio;
        }
    }
    SUBCASE("a source with a Z0 component is rejected") {
        CHECK_THROWS_AS(inner_evolution_probe([](double y, double) { return std::pow(bubble_w(y), 4); }, p), ConfigError);
    }
}
