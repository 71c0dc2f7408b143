// One line per acceptance criterion; exit status 1 if any fails.
#include <fmt/format.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>

#include "blowuplab/abel.hpp"
#include "blowuplab/ansatz.hpp"
#include "blowuplab/nonlocal.hpp"
#include "blowuplab/profiles.hpp"
#include "blowuplab/simulate.hpp"

using namespace blowup;

namespace {

constexpr double pi = std::numbers::pi;

struct Verdict {
    bool pass = true;
    std::string detail;
    void need(bool ok, const std::string& what) {
        pass = pass && ok;
        detail += (detail.empty() ? "" : "; ") + what + (ok ? "" : " [FAIL]");
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Verdict profiles_converge() {
    Verdict v;
    ProfileResiduals prev;
    double lo = 1e9;
    for (double h : {0.025, 0.0125, 0.00625}) {
        const auto r = profile_residuals(h, 50.0);
        if (prev.h > 0)
            for (double o : {std::log2(prev.bubble / r.bubble), std::log2(prev.kernel / r.kernel), std::log2(prev.corrector / r.corrector)})
                lo = std::min(lo, o);
        prev = r;
    }
    v.need(lo >= 1.95, fmt::format("min observed order {:.4f} (w, Z0, J on [0,50])", lo));
    const double far = CorrectorTable::shared().value(1e3) / 1e3 / (std::pow(3.0, 0.25) / 8);
    v.need(std::abs(far - 1) < 0.01, fmt::format("J(1e3)/1e3 over 3^(1/4)/8 = {:.5f}", far));
    return v;
}

Verdict outer_eigenfunctions() {
    Verdict v;
    EigenResidualOptions o4;
    o4.order = 4;
    double worst = 0;
    for (int k = 1; k <= 4; ++k)
        for (std::size_t n : {800u, 1600u}) {
            const auto m = [k](double z) { return outer_profile_m(z, k, 1.0); };
            worst = std::max(worst, eigen_residual(m, 0.25 - k, RadialGrid::uniform(1.0, 3.0, n), o4).value);
        }
    v.need(worst < 1e-8, fmt::format("max residual {:.3e} for k=1..4 on 800 and 1600 intervals", worst));
    return v;
}

Verdict matching() {
    Verdict v;
    double worst = 0;
    for (int k : {1, 2, 3}) {
        BlowupParams p;
        p.k = k;
        p.T = 1.0;
        const auto r = matching_report(1.0 - 1e-3, p);
        worst = std::max({worst, r.rel_gap_inv, r.rel_gap_lin});
    }
    v.need(worst <= 1e-12, fmt::format("max relative coefficient gap {:.3e}", worst));
    BlowupParams p1;
    p1.k = 1;
    p1.T = 1.0;
    const double mid = matching_report(1.0 - 1e-3, p1).mid_rel_gap;
    v.need(mid <= 0.05, fmt::format("mid-overlap gap {:.3e} (k=1, T-t=1e-3)", mid));
    return v;
}

Verdict abel_suite() {
    Verdict v;
    const auto t = square_times(1.0, 400);
    const std::vector<std::pair<std::function<double(double)>, std::function<double(double)>>> family{
        {[](double) { return 1.0; }, [](double x) { return x; }},
        {[](double x) { return x; }, [](double x) { return x * x / 2; }},
        {[](double x) { return x * x; }, [](double x) { return x * x * x / 3; }},
        {[](double x) { return std::sin(x); }, [](double x) { return 1 - std::cos(x); }},
    };
    double comp = 0;
    for (const auto& [f, F] : family) {
        const auto g = half_integral(half_integral(TimeSeries::sample(f, t, Interp::cubic)));
        for (std::size_t i = 0; i < g.size(); ++i) comp = std::max(comp, std::abs(g.values()[i] - F(g.times()[i])));
    }
    v.need(comp < 1e-6, fmt::format("composition gap {:.3e}", comp));

    const auto h = TimeSeries::sample([](double x) { return 2 * std::sqrt(x); }, square_times(1.0, 100), Interp::sqrt_linear);
    const auto a = abel_solve(h);
    double dev = 0;
    for (double x : a.alpha.values()) dev = std::max(dev, std::abs(x - 1));
    v.need(dev < 1e-3, fmt::format("alpha from 2 sqrt(t): sup|alpha-1| {:.3e}", dev));

    // constant right side: v = ∫α with v(T) = 0 against the shape √T - √t
    const double T = 0.01, c = 1.0;
    const auto V = abel_integrated(TimeSeries::sample([&](double) { return c; }, cosine_times(T, 400), Interp::cubic));
    const double VT = V.values().back();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < V.size(); ++i) {
        const double s = std::sqrt(T) - std::sqrt(V.times()[i]);
        sxy += s * (V.values()[i] - VT);
        sxx += s * s;
    }
    const double coef = sxy / sxx;
    double rss = 0, scale = 0;
    for (std::size_t i = 0; i < V.size(); ++i) {
        const double s = std::sqrt(T) - std::sqrt(V.times()[i]), y = V.values()[i] - VT;
        rss += (y - coef * s) * (y - coef * s);
        scale = std::max(scale, std::abs(y));
    }
    const double res = std::sqrt(rss / V.size()) / scale;
    v.need(res < 1e-4, fmt::format("constant-RHS shape fit residual {:.3e}, c={:.6f} (expected {:.6f})", res, coef, -2 * c / pi));
    return v;
}

Verdict nonlocal_forms() {
    Verdict v;
    double gap = 0;
    const double T = 0.05;
    for (double kappa : {0.5, 3.0, 40.0})
        for (double t : {0.1 * T, T, 2 * T}) {
            const double q = 2 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                                     [&](double u) { return block_value(kappa, t - u * u); }, 0.0, std::sqrt(t), 15, 1e-13);
            gap = std::max(gap, std::abs(q - block_half_integral(kappa, t)));
        }
    v.need(gap < 1e-8, fmt::format("block half-integral vs quadrature {:.3e}", gap));

    double worst = 0;
    const double Tv = 0.01;
    for (int k = 1; k <= 4; ++k) {
        std::vector<double> rates;
        for (int j = 1; j <= k + 1; ++j) rates.push_back(j * Tv);
        for (int i = 1; i <= k; ++i) worst = std::max(worst, std::abs(vanishing_order_fit(vanishing_combo(Tv, rates, i), Tv) / i - 1));
    }
    v.need(worst <= 0.02, fmt::format("vanishing-order slopes within {:.3f}% of i", 100 * worst));

    const double limit = 2.0 / 3 * pi * std::pow(3.0, 1.25);
    double prev = 0, quad = 0, ratio_dev = 0;
    std::string ratios;
    for (double R : {5.0, 10.0, 20.0, 40.0}) {
        quad = std::max(quad, std::abs(z0_mass_quadrature(2 * R) / z0_mass(2 * R) - 1));
        const double err = std::abs(z0_mass_quadrature(2 * R) - limit);
        if (prev > 0) {
            ratio_dev = std::max(ratio_dev, std::abs(prev / err / 4 - 1));
            ratios += fmt::format("{}{:.3f}", ratios.empty() ? "" : ",", prev / err);
        }
        prev = err;
    }
    v.need(quad < 1e-12 && ratio_dev < 0.05, fmt::format("Z0 mass error ratios per doubling of R: {}", ratios));
    return v;
}

Verdict reduced() {
    Verdict v;
    BlowupParams p;
    p.k = 2;
    p.T = 0.01;
    const auto h = TimeSeries::sample([&](double x) { return std::sin(0.4 * x / p.T) + 0.3 * std::cos(x / p.T) - 0.3; },
                                      cosine_times(p.T, 400), Interp::cubic);
    const auto s = reduced_solve(h, 2, p);
    v.need(s.decay_exponent > 1, fmt::format("decay exponent {:.3f}", s.decay_exponent));
    v.need(s.forward_residual <= 1e-4, fmt::format("forward residual {:.3e}", s.forward_residual));
    const double eps = 0.1;
    std::vector<double> C;
    for (double T : {0.1, 0.01}) {
        BlowupParams q = p;
        q.T = T;
        const auto g = TimeSeries::sample([](double x) { return std::sin(4 * x) + 0.3 * std::cos(x) - 0.3; }, cosine_times(T, 400),
                                          Interp::cubic);
        C.push_back(c_bound_constant(reduced_solve(g, 2, q).c, T, eps));
    }
    v.need(C[1] <= C[0], fmt::format("max_j |c_j| T^(j-1/2+eps): {:.3f} (T=0.1), {:.3f} (T=0.01)", C[0], C[1]));
    return v;
}

Verdict outer_bound_probes() {
    Verdict v;
    BlowupParams q;
    q.k = 6;
    q.beta = 0.05;
    q.a = 0.4;
    q.nu = 0.8;
    q.a2 = 1.8;
    q.nu2 = 0.4;
    v.need(all_satisfied(check_constraints(q)), "probe exponents admissible");
    const std::vector<std::pair<ProbeFamily, std::vector<std::string>>> checks{
        {ProbeFamily::rhs1, {"outer", "outerT"}}, {ProbeFamily::rhs2, {"outer"}}, {ProbeFamily::rhs3, {"outer", "outerT"}}};
    for (const auto& [fam, ids] : checks) {
        for (const auto& row : bound_probe_appendix(fam, q)) {
            if (std::find(ids.begin(), ids.end(), row.bound_id) == ids.end()) continue;
            const auto [lo, hi] = std::minmax_element(row.ratio_by_T.begin(), row.ratio_by_T.end());
            const bool bounded = std::isfinite(*hi) && *hi / *lo < 2.0;
            const bool power = std::abs(row.fitted_power - row.claimed_power) <= 0.1 * std::abs(row.claimed_power);
            v.need(bounded && power, fmt::format("{}/{} ratio {:.3g}..{:.3g}, power {:.4f} vs {:.4f}", row.family, row.bound_id, *lo, *hi,
                                                 row.fitted_power, row.claimed_power));
        }
    }
    return v;
}

Verdict type_one_control() {
    Verdict v;
    double p[2];
    for (int s = 1; s <= 2; ++s) {
        const RadialGrid g = RadialGrid::uniform(10.0, 400 * s);
        std::vector<double> u(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) u[i] = 5 * std::exp(-g[i] * g[i]);
        SimControls c;
        c.core_nodes = 8.0 * s;
        c.cfl = 0.4 / s;
        c.reaction = 0.1 / s;
        const Trajectory tr = run(FieldSnapshot(g, u), c);
        p[s - 1] = fit_rate(tr).exponent;
    }
    v.need(std::abs(p[0] - 0.25) <= 0.025, fmt::format("exponent {:.6f}", p[0]));
    const double drift = std::abs(p[0] - p[1]) / p[0];
    v.need(drift < 0.02, fmt::format("refined run {:.6f}, change {:.3f}%", p[1], 100 * drift));
    return v;
}

Verdict ansatz_tracking() {
    Verdict v;
    BlowupParams p;
    p.k = 1;
    p.A = 1.0;
    p.T = 0.01;
    const ModulationPath path(p);
    const double xm = 10 * std::sqrt(p.T);
    SimControls c;
    c.boundary = glued_boundary(path, xm);
    const Trajectory tr = run(glued_initial_data(path, xm, 400), c);
    const double sup0 = tr.samples.front().sup;
    double lo = 1e300, hi = 0, reached = 0;
    bool decade = false;
    for (const auto& s : tr.samples) {
        if (s.t >= p.T) break;
        const double r = std::sqrt(3.0) / (s.u0 * s.u0) / path.mu0(s.t);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
        reached = s.sup / sup0;
        if (s.sup >= 10 * sup0) {
            decade = true;
            break;
        }
    }
    v.need(decade, fmt::format("sup grew by {:.3g}x before T", reached));
    v.need(lo >= 0.5 && hi <= 2.0, fmt::format("mu_est/mu0 in [{:.3g}, {:.3g}] over that window (run ends at t={:.3e}, T={})", lo, hi,
                                               tr.samples.back().t, p.T));
    return v;
}

Verdict constraints() {
    Verdict v;
    BlowupParams p;
    double min_margin = 1e9;
    bool all = true;
    for (const auto& c : check_constraints(p)) {
        if (c.id[0] == 'D') continue;  // domain checks are not part of the systems
        all = all && c.satisfied;
        min_margin = std::min(min_margin, c.margin);
    }
    v.need(all && min_margin > 0, fmt::format("default k=2 tuple: smallest margin {:.4f}", min_margin));
    BlowupParams k1;
    k1.k = 1;
    std::string failing;
    for (const auto& c : check_constraints(k1))
        if (!c.satisfied) failing += (failing.empty() ? "" : ",") + c.id + " " + c.expression;
    v.need(failing == "G7 1/2-1/(2k)-nu2>0", "k=1 failures: " + failing);
    return v;
}

}  // namespace

int main() {
    std::setvbuf(stdout, nullptr, _IONBF, 0);
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"profile residuals", profiles_converge},   {"self-similar eigenfunctions", outer_eigenfunctions},
        {"matching identities", matching},          {"Abel suite", abel_suite},
        {"nonlocal closed forms", nonlocal_forms},  {"reduced equation", reduced},
        {"outer bound probes", outer_bound_probes}, {"type I control experiment", type_one_control},
        {"ansatz tracking", ansatz_tracking},       {"constraint checker", constraints},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("threw: ") + e.what();
        }
        failed += !v.pass;
        std::printf("criterion %zu %s: %s (%.1f s): %s\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), seconds_since(t0),
                    v.detail.c_str());
    }
    std::printf("%d of %zu criteria pass\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
