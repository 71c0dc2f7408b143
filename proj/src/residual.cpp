#include "blowuplab/residual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "blowuplab/errors.hpp"
#include "blowuplab/numerics.hpp"
#include "blowuplab/profiles.hpp"

namespace blowup {

namespace {

void require_same_grid(const FieldSnapshot& a, const FieldSnapshot& b) {
    if (a.grid.nodes() != b.grid.nodes()) throw ConfigError("snapshots live on different grids");
}

double lap_at(const std::vector<double>& r, const std::vector<double>& f, std::size_t i) {
    const std::size_t n = r.size();
    if (i == 0 && r[0] == 0.0) return 6.0 * (f[1] - f[0]) / (r[1] * r[1]);
    std::size_t lo;
    std::size_t count = 3;
    if (i == 0) {
        lo = 0;
        count = 4;
    } else if (i == n - 1) {
        lo = n - 4;
        count = 4;
    } else {
        lo = i - 1;
    }
    std::vector<double> nodes(r.begin() + lo, r.begin() + lo + count);
    const auto w = fd_weights(r[i], nodes, 2);
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
        d1 += w[1][j] * f[lo + j];
        d2 += w[2][j] * f[lo + j];
    }
    return d2 + 2.0 * d1 / r[i];
}

}  // namespace

FieldSnapshot radial_laplacian(const FieldSnapshot& f) {
    const auto& r = f.grid.nodes();
    if (r.size() < 4) throw ConfigError("radial_laplacian needs at least 4 nodes");
    std::vector<double> out(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) out[i] = lap_at(r, f.values, i);
    return FieldSnapshot(f.grid, std::move(out), f.t);
}

FieldSnapshot error_S(const FieldSnapshot& u_now, const FieldSnapshot& u_prev, double dt) {
    require_same_grid(u_now, u_prev);
    if (!(dt > 0.0)) throw ConfigError("error_S needs dt > 0");
    const std::size_t n = u_now.values.size();
    std::vector<double> mid(n);
    for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (u_now.values[i] + u_prev.values[i]);
    FieldSnapshot lap = radial_laplacian(FieldSnapshot(u_now.grid, mid, u_prev.t + 0.5 * dt));
    for (std::size_t i = 0; i < n; ++i)
        lap.values[i] += -(u_now.values[i] - u_prev.values[i]) / dt + std::pow(mid[i], 5);
    return lap;
}

FieldSnapshot error_S_analytic(const FieldSnapshot& u, const std::vector<double>& dudt) {
    if (dudt.size() != u.values.size()) throw ConfigError("time derivative has the wrong length");
    FieldSnapshot lap = radial_laplacian(u);
    for (std::size_t i = 0; i < dudt.size(); ++i) lap.values[i] += -dudt[i] + std::pow(u.values[i], 5);
    return lap;
}

double leading_term(double x, double t, const ModulationPath& path) {
    const BlowupParams& p = path.params();
    if (!(t < p.T)) throw std::domain_error("time must satisfy t < T");
    if (std::abs(x) > p.c0 * std::sqrt(p.T - t)) return 0.0;
    const double m = path.mu(t);
    return path.alpha(t) / std::sqrt(m * m + x * x);
}

double corrector_majorant(double y) { return y * y / (1.0 + y); }

double g4_lhs(double x, double t, const ModulationPath& path) {
    const CutoffSet cut{path.params()};
    const double e = cut.eta1(x, t).v;
    const double s = e == 0.0 ? 0.0 : e * error_S_inner(x, t, path);
    return s - leading_term(x, t, path);
}

double g4_majorant(double x, double t, const ModulationPath& path) {
    const BlowupParams& p = path.params();
    const double m = path.mu(t), m0 = path.mu0(t);
    const double m_t = std::abs(path.mu_d1(t));
    const double m0p = std::abs(path.mu0_d1(t)), m0pp = std::abs(path.mu0_d2(t));
    const double al = std::abs(path.alpha(t)), lam = path.Lambda(t);
    const double sq = std::sqrt(p.T - t);
    const double e = CutoffSet{p}.eta1(x, t).v;
    const double c = std::pow(3.0, 0.25);
    const double q = m * m + x * x;
    const double rq = std::sqrt(q);
    const double h = corrector_majorant(x / m);
    const double h0 = corrector_majorant(x / m0);
    const double s = x / sq;
    double out = al / rq * ((s >= p.r && x <= p.c0 * sq) ? 1.0 : 0.0);
    if (e == 0.0) return out;
    out += e * (al * m * m / (q * rq) +
                lam * lam * m0p / std::sqrt(m) * std::abs(c * m * m / (q * rq) - 0.5 * c / rq) +
                2.0 * m0pp * std::sqrt(m) * h + 3.0 * m0p * m_t / std::sqrt(m) * h +
                std::pow(m, 2.5) / (q * rq) * m0p * m0p * h0 * h0);
    return out;
}

RadialGrid g4_probe_grid(double t, const BlowupParams& p, std::size_t intervals) {
    const double sq = std::sqrt(p.T - t);
    const double m0 = mu0(t, p);
    const double x_end = std::max(2.0 * p.r, p.c0) * sq;
    const double rr = R_of(t, p) * m0;
    std::vector<double> extra{p.r * sq, p.c0 * sq, 2.0 * p.r * sq};
    for (double v : {rr, 2.0 * rr})
        if (v < x_end) extra.push_back(v);
    return RadialGrid::geometric(x_end, intervals, 0.02 * m0).with_nodes(extra);
}

G4Probe bound_probe_g4(double t, const ModulationPath& path, const RadialGrid& x_grid) {
    G4Probe out;
    out.ratio.id = "g4_ratio";
    const auto& x = x_grid.nodes();
    std::vector<double> lhs(x.size()), maj(x.size());
    parallel_for(x.size(), [&](std::size_t i) {
        lhs[i] = g4_lhs(x[i], t, path);
        maj[i] = g4_majorant(x[i], t, path);
    });
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = std::abs(lhs[i]);
        out.lhs_sup = std::max(out.lhs_sup, a);
        out.majorant_sup = std::max(out.majorant_sup, maj[i]);
        double ratio;
        if (maj[i] > 0.0)
            ratio = a / maj[i];
        else if (a == 0.0)
            continue;
        else
            ratio = std::numeric_limits<double>::infinity();
        if (ratio > out.ratio.value) {
            out.ratio.value = ratio;
            out.ratio.arg_x = x[i];
        }
    }
    out.ratio.arg_t = t;
    return out;
}

namespace {

template <class Weight>
NormReport weighted_sup(const Samples& s, const char* id, Weight weight) {
    if (s.empty()) throw ConfigError(std::string(id) + ": empty sample set");
    NormReport rep;
    rep.id = id;
    for (const auto& snap : s) {
        const auto& r = snap.grid.nodes();
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double v = weight(snap, i);
            if (v > rep.value) {
                rep.value = v;
                rep.arg_x = r[i];
                rep.arg_t = snap.t;
            }
        }
    }
    return rep;
}

void require_ball(const FieldSnapshot& snap, double radius, const char* id) {
    if (snap.grid.r_max() < radius * (1.0 - 1e-12))
        throw ConfigError(std::string(id) + ": samples do not cover |y| <= 2R(t)");
}

}  // namespace

NormReport norm_inner(const Samples& h, const BlowupParams& p) {
    return weighted_sup(h, "inner(nu,2+sigma)", [&](const FieldSnapshot& s, std::size_t i) {
        const double R = R_of(s.t, p);
        if (i == 0) require_ball(s, 2.0 * R, "norm_inner");
        const double y = s.grid[i];
        if (y > 2.0 * R * (1.0 + 1e-12)) return 0.0;
        return std::pow(mu0(s.t, p), -p.nu) * (1.0 + std::pow(y, 2.0 + p.sigma)) * std::abs(s.values[i]);
    });
}

NormReport norm_inner0(const Samples& phi, const BlowupParams& p) {
    for (const auto& s : phi)
        if (!s.has_derivative()) throw ConfigError("norm_inner0: gradient samples missing");
    return weighted_sup(phi, "inner0(nu,sigma)", [&](const FieldSnapshot& s, std::size_t i) {
        const double R = R_of(s.t, p);
        if (i == 0) require_ball(s, 2.0 * R, "norm_inner0");
        const double y = s.grid[i];
        if (y > 2.0 * R * (1.0 + 1e-12)) return 0.0;
        const double wt = (1.0 + y) / (std::pow(mu0(s.t, p), p.nu) * std::pow(R, (4.0 - p.sigma) / 3.0));
        return wt * (std::abs(s.values[i]) + (1.0 + y) * std::abs(s.derivative[i]));
    });
}

OuterWeights outer_weights(double x, double t, const BlowupParams& p) {
    const double m0 = mu0(t, p), R = R_of(t, p);
    OuterWeights w;
    if (x <= 2.0 * m0 * R) w.rho1 = std::pow(m0, p.nu - 2.5) * std::pow(R, -2.0 - p.a);
    if (x >= m0 * R) w.rho2 = std::pow(m0, p.nu2) * std::pow(x, -p.a2);
    return w;
}

NormReport norm_outer_rhs(const Samples& f, const BlowupParams& p) {
    return weighted_sup(f, "starstar", [&](const FieldSnapshot& s, std::size_t i) {
        const OuterWeights w = outer_weights(s.grid[i], s.t, p);
        return std::abs(s.values[i]) / (w.rho1 + w.rho2 + w.rho3);
    });
}

NormReport norm_delta(const std::vector<double>& t, const std::vector<double>& h, double T, double delta) {
    if (t.empty() || t.size() != h.size()) throw ConfigError("norm_delta: bad sample set");
    NormReport rep;
    rep.id = "delta";
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] < T)) throw ConfigError("norm_delta: sample at or beyond T");
        const double v = std::pow(T - t[i], -delta) * std::abs(h[i]);
        if (v > rep.value || i == 0) {
            rep.value = v;
            rep.arg_t = t[i];
        }
    }
    return rep;
}

namespace {

struct Lattice {
    std::vector<double> x;
    std::vector<double> t;     // 0 and T - T·2^{-j/density}
    std::vector<double> gaps;  // fractions of (T - t2)/10
};

Lattice make_lattice(const BlowupParams& p, const OuterSolOptions& opt, int doubling) {
    Lattice L;
    L.x = RadialGrid::geometric(opt.x_max, opt.x_intervals, opt.x_max * 1e-6).nodes();
    const std::size_t scale = std::size_t{1} << doubling;
    const std::size_t nt = opt.t_levels * scale;
    L.t.push_back(0.0);
    // T - t from T/2 down to T·2^{-t_levels/2}, density doubled each round
    for (std::size_t j = 0; j <= nt; ++j) {
        const double e = 1.0 + 0.5 * double(opt.t_levels) * double(j) / double(nt);
        L.t.push_back(p.T - p.T * std::pow(2.0, -e));
    }
    const std::size_t ng = opt.pair_levels * scale;
    for (std::size_t j = 0; j <= ng; ++j) L.gaps.push_back(std::pow(2.0, -double(opt.pair_levels) * double(j) / double(ng)));
    return L;
}

struct TermMax {
    double v[5] = {0, 0, 0, 0, 0};
    double x[5] = {0, 0, 0, 0, 0};
    double t[5] = {0, 0, 0, 0, 0};
    void offer(int k, double val, double xx, double tt) {
        if (val > v[k]) {
            v[k] = val;
            x[k] = xx;
            t[k] = tt;
        }
    }
};

TermMax evaluate_outer(const RadialField& psi, const BlowupParams& p, const Lattice& L) {
    const std::size_t nx = L.x.size();
    std::vector<double> vT(nx), gT(nx);
    for (std::size_t i = 0; i < nx; ++i) {
        vT[i] = psi.value(L.x[i], p.T);
        gT[i] = psi.gradient(L.x[i], p.T);
        if (!std::isfinite(vT[i]) || !std::isfinite(gT[i]))
            throw ConfigError("norm_outer_sol: terminal-time samples missing");
    }
    const double m00 = mu0(0.0, p), R00 = R_of(0.0, p);
    const double w1 = std::pow(m00, 0.5 - p.nu) * std::pow(R00, p.a);
    const double w2 = std::pow(m00, 1.5 - p.nu) * std::pow(R00, 1.0 + p.a);
    std::vector<TermMax> part(L.t.size());
    parallel_for(L.t.size(), [&](std::size_t k) {
        const double t2 = L.t[k];
        const double m = mu0(t2, p), R = R_of(t2, p);
        const double w3 = std::pow(m, 0.5 - p.nu) * std::pow(R, p.a);
        const double w4 = std::pow(m, 1.5 - p.nu) * std::pow(R, 1.0 + p.a);
        const double w5 = std::pow(m, 2.0 * p.gamma + 0.5 - p.nu) * std::pow(R, 2.0 * p.gamma + p.a);
        TermMax& tm = part[k];
        std::vector<double> v2(nx);
        for (std::size_t i = 0; i < nx; ++i) {
            const double x = L.x[i];
            const double v = psi.value(x, t2), g = psi.gradient(x, t2);
            v2[i] = v;
            tm.offer(0, w1 * std::abs(v), x, t2);
            tm.offer(1, w2 * std::abs(g), x, t2);
            tm.offer(2, w3 * std::abs(v - vT[i]), x, t2);
            tm.offer(3, w4 * std::abs(g - gT[i]), x, t2);
        }
        const double gmax = 0.1 * (p.T - t2);
        for (double frac : L.gaps) {
            const double d = frac * gmax;
            const double t1 = t2 - d;
            if (t1 < 0.0) continue;
            const double q = w5 / std::pow(d, p.gamma);
            for (std::size_t i = 0; i < nx; ++i)
                tm.offer(4, q * std::abs(v2[i] - psi.value(L.x[i], t1)), L.x[i], t2);
        }
    });
    TermMax all;
    for (const auto& tm : part)
        for (int k = 0; k < 5; ++k) all.offer(k, tm.v[k], tm.x[k], tm.t[k]);
    return all;
}

}  // namespace

OuterSolReport norm_outer_sol(const RadialField& psi, const BlowupParams& p, const OuterSolOptions& opt) {
    if (!psi.value) throw ConfigError("norm_outer_sol: no field values");
    if (!psi.has_gradient()) throw ConfigError("norm_outer_sol: gradient data missing");
    OuterSolReport rep;
    rep.total.id = "star";
    double prev = -1.0;
    for (int d = 0; d <= opt.max_doublings; ++d) {
        const TermMax tm = evaluate_outer(psi, p, make_lattice(p, opt, d));
        double total = 0.0;
        int arg = 0;
        for (int k = 0; k < 5; ++k) {
            rep.terms[k] = tm.v[k];
            total += tm.v[k];
            if (tm.v[k] > tm.v[arg]) arg = k;
        }
        rep.total.value = total;
        rep.total.arg_x = tm.x[arg];
        rep.total.arg_t = tm.t[arg];
        rep.doublings = d;
        if (prev >= 0.0 && std::abs(total - prev) <= opt.tolerance * std::max(total, 1e-300)) {
            rep.converged = true;
            break;
        }
        if (total == 0.0 && prev == 0.0) {
            rep.converged = true;
            break;
        }
        prev = total;
    }
    return rep;
}

namespace {

double field_or_zero(const RadialField& f, double x, double t) { return f.value ? f.value(x, t) : 0.0; }

void require_gradients(const RadialField& phi, const RadialField& psi) {
    if (!phi.value || !psi.value) throw ConfigError("rhs: field values missing");
    if (!phi.has_gradient() || !psi.has_gradient()) throw ConfigError("rhs: gradient data missing");
}

}  // namespace

GTerms rhs_G(double x, double t, const RadialField& phi, const RadialField& psi, const RadialField& phi1,
             const ModulationPath& path) {
    require_gradients(phi, psi);
    const BlowupParams& p = path.params();
    const double m0 = path.mu0(t), m = path.mu(t);
    const Jet eR = CutoffSet{p}.etaR(x, t);
    const double ps = psi.value(x, t);
    const double u1 = glued_U1(x, t, path);
    const double f1 = field_or_zero(phi1, x, t);
    const double base = u1 + f1;
    GTerms g;
    double inner_part = 0.0;
    if (eR.v != 0.0 || eR.dx != 0.0) {
        const double y = x / m0;
        const double ph = phi.value(y, t), dph = phi.gradient(y, t);
        g.cutoff_dt = -eR.dt * ph / std::sqrt(m0);
        g.cutoff_lap = eR.laplacian(x) * ph / std::sqrt(m0);
        g.cutoff_grad = 2.0 * eR.dx * dph / (m0 * std::sqrt(m0));
        inner_part = eR.v * ph / std::sqrt(m0);
    }
    const double b4 = std::pow(base, 4);
    const double wm = bubble_w(x / m) / std::sqrt(m);
    g.potential = 5.0 * (b4 * (1.0 - eR.v) + (b4 - std::pow(wm, 4)) * eR.v) * ps;
    g.quintic = quintic_remainder(base, ps + inner_part);
    if (eR.v != 1.0) {
        g.error = (error_S_U1(x, t, path) - leading_term(x, t, path)) * (1.0 - eR.v);
        g.phi1_nonlinear = quintic_increment(u1, f1) * (1.0 - eR.v);
    }
    return g;
}

HTerms rhs_H(double y, double t, const RadialField& phi, const RadialField& psi, const RadialField& phi1,
             const ModulationPath& path) {
    require_gradients(phi, psi);
    const double m0 = path.mu0(t), lam = 1.0 + path.Lambda(t);
    const double x = m0 * y;
    const double ui = u_inner(x, t, path);
    const double f1 = field_or_zero(phi1, x, t);
    const double ph = phi.value(y, t), dph = phi.gradient(y, t);
    const double m52 = std::pow(m0, 2.5);
    HTerms h;
    const double wy = bubble_w(y) / std::sqrt(m0);
    h.potential_phi = 5.0 * (std::pow(ui + f1, 4) - std::pow(wy, 4)) * m0 * m0 * ph;
    h.potential_psi = 5.0 * std::sqrt(m0) * std::pow(lam, -4) * std::pow(bubble_w(y / (lam * lam)), 4) * psi.value(x, t);
    h.drift = m0 * path.mu0_d1(t) * (0.5 * ph + y * dph);
    h.error = m52 * (error_S_U1(x, t, path) - leading_term(x, t, path));
    h.phi1_nonlinear = m52 * quintic_increment(ui, f1);
    return h;
}

}  // namespace blowup
