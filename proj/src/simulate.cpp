#include "blowuplab/simulate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "blowuplab/errors.hpp"
#include "blowuplab/format.hpp"
#include "blowuplab/numerics.hpp"
#include "blowuplab/profiles.hpp"

namespace blowup {

namespace {

const double sqrt3 = std::sqrt(3.0);

double sup_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// error-free a + b = s + e
void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    const double bb = s - a;
    e = (a - (s - bb)) + (b - bb);
}

std::vector<double> rhs(const std::vector<double>& r, const std::vector<double>& u, const SimControls& c) {
    std::vector<double> f = c.diffusion ? fv_laplacian(r, u) : std::vector<double>(u.size(), 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double u2 = u[i] * u[i];
        f[i] += u2 * u2 * u[i];
    }
    if (c.diffusion) f.back() = 0.0;  // Dirichlet node is set directly
    return f;
}

// cubic interpolation on the evenly reflected data
double interpolate_even(const std::vector<double>& r, const std::vector<double>& u, double x) {
    const std::size_t n = r.size();
    std::size_t i = static_cast<std::size_t>(std::upper_bound(r.begin(), r.end(), x) - r.begin());
    i = std::clamp<std::size_t>(i, 1, n - 1);
    // nodes i-2..i+1 in reflected indexing
    std::vector<double> xs, vs;
    for (long j = static_cast<long>(i) - 2; j <= static_cast<long>(i) + 1; ++j) {
        if (j >= static_cast<long>(n)) continue;
        if (j < 0) {
            xs.push_back(-r[-j]);
            vs.push_back(u[-j]);
        } else {
            xs.push_back(r[j]);
            vs.push_back(u[j]);
        }
    }
    const auto w = fd_weights(x, xs, 0);
    double s = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) s += w[0][j] * vs[j];
    return s;
}

FieldSnapshot refine_core(const FieldSnapshot& u, double sup, const SimControls& c) {
    const auto& r = u.grid.nodes();
    const double ell = sqrt3 / (sup * sup);
    const double target = ell / c.core_nodes, zone = c.core_extent * ell;
    std::vector<double> nr{r[0]}, nv{u.values[0]};
    bool changed = false;
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        const double len = r[i + 1] - r[i];
        // spacing may grow linearly past the core
        const double want = target * std::max(1.0, r[i] / zone);
        if (len > want * 1.0001) {
            const int m = static_cast<int>(std::ceil(std::log2(len / want)));
            const int pieces = 1 << std::min(m, 20);
            for (int q = 1; q < pieces; ++q) {
                const double x = r[i] + len * q / pieces;
                nr.push_back(x);
                nv.push_back(interpolate_even(r, u.values, x));
            }
            changed = true;
        }
        nr.push_back(r[i + 1]);
        nv.push_back(u.values[i + 1]);
    }
    if (!changed) return u;
    return FieldSnapshot(RadialGrid(std::move(nr)), std::move(nv), u.t);
}

}  // namespace

std::vector<double> fv_laplacian(const std::vector<double>& r, const std::vector<double>& u) {
    const std::size_t n = r.size();
    if (n < 3 || u.size() != n) throw ConfigError("fv_laplacian needs matching nodes (at least three)");
    if (r[0] != 0.0) throw ConfigError("fv_laplacian needs a grid starting at the origin");
    std::vector<double> out(n, 0.0);
    out[0] = 6.0 * (u[1] - u[0]) / (r[1] * r[1]);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double rm = 0.5 * (r[i] + r[i - 1]), rp = 0.5 * (r[i] + r[i + 1]);
        const double vol = (rp * rp * rp - rm * rm * rm) / 3.0;
        const double fp = rp * rp * (u[i + 1] - u[i]) / (r[i + 1] - r[i]);
        const double fm = rm * rm * (u[i] - u[i - 1]) / (r[i] - r[i - 1]);
        out[i] = (fp - fm) / vol;
    }
    return out;
}

FieldSnapshot step(const FieldSnapshot& u, double dt, const SimControls& c) {
    const auto& r = u.grid.nodes();
    const std::size_t n = r.size();
    const double t = u.t;
    const double hold = u.values.back();
    const auto bc = [&](double s) { return c.boundary ? c.boundary(s) : hold; };
    const auto stage = [&](const std::vector<double>& base, const std::vector<double>& k, double a, double s) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = base[i] + a * k[i];
        if (c.diffusion) v.back() = bc(s);
        return v;
    };
    std::vector<double> u0 = u.values;
    if (c.diffusion) u0.back() = bc(t);
    const auto k1 = rhs(r, u0, c);
    const auto k2 = rhs(r, stage(u0, k1, 0.5 * dt, t + 0.5 * dt), c);
    const auto k3 = rhs(r, stage(u0, k2, 0.5 * dt, t + 0.5 * dt), c);
    const auto k4 = rhs(r, stage(u0, k3, dt, t + dt), c);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = u0[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        if (!std::isfinite(out[i])) throw NumericalError("non-finite value in step (blow-up overshoot)");
    }
    if (c.diffusion) out.back() = bc(t + dt);
    return FieldSnapshot(u.grid, std::move(out), t + dt);
}

std::string termination_name(Termination t) {
    switch (t) {
        case Termination::blowup_threshold: return "blowup-threshold";
        case Termination::horizon: return "horizon";
        case Termination::decay: return "decay";
    }
    return "?";
}

double Trajectory::time_before_end(std::size_t i) const {
    const auto& e = samples.back();
    const auto& s = samples.at(i);
    return (e.t - s.t) + (e.t_lo - s.t_lo);
}

Trajectory run(const FieldSnapshot& u0, const SimControls& c) {
    for (double v : u0.values)
        if (!std::isfinite(v)) throw ConfigError("initial data must be finite");
    if (!u0.grid.starts_at_origin()) throw ConfigError("simulation grid must start at the origin");
    Trajectory tr;
    FieldSnapshot u = u0;
    double t_hi = u0.t, t_lo = 0.0;
    double sup = sup_abs(u.values);
    double last_regrid = 0.0;
    if (c.regrid && sup > 0) {
        u = refine_core(u, sup, c);
        last_regrid = sup;
    }
    tr.samples.push_back({t_hi, t_lo, sup, u.values.front()});
    tr.snapshots.push_back(u);
    while (true) {
        if (sup > c.threshold) {
            tr.reason = Termination::blowup_threshold;
            break;
        }
        if (sup < c.decay) {
            tr.reason = Termination::decay;
            break;
        }
        const double left = c.horizon - t_hi - t_lo;
        if (left <= 0) {
            tr.reason = Termination::horizon;
            break;
        }
        if (tr.steps >= c.max_steps) throw NumericalError("simulation exceeded the step budget");
        double dt = left;
        if (c.diffusion) {
            const double h = u.grid.h_min();
            dt = std::min(dt, c.cfl * h * h / 2);
        }
        if (sup > 0) dt = std::min(dt, c.reaction / std::pow(sup, 4));
        FieldSnapshot next = u;
        for (int tries = 0;; ++tries) {
            if (tries > 60 || dt < 1e-300) throw NumericalError("step-size underflow");
            try {
                FieldSnapshot probe = u;
                probe.t = t_hi;
                next = step(probe, dt, c);
                break;
            } catch (const NumericalError&) {
                dt *= 0.5;
                ++tr.halvings;
            }
        }
        u = std::move(next);
        double s, e;
        two_sum(t_hi, dt, s, e);
        t_lo += e;
        two_sum(s, t_lo, t_hi, t_lo);
        u.t = t_hi;
        ++tr.steps;
        sup = sup_abs(u.values);
        tr.samples.push_back({t_hi, t_lo, sup, u.values.front()});
        if (c.regrid && sup >= 2 * last_regrid) {
            u = refine_core(u, sup, c);
            last_regrid = sup;
            ++tr.regrids;
            tr.snapshots.push_back(u);
        }
    }
    tr.snapshots.push_back(u);
    return tr;
}

RateFit fit_rate(const Trajectory& traj, const RateFitOptions& opt) {
    if (traj.reason != Termination::blowup_threshold) throw ConfigError("fit_rate needs a run stopped by the blow-up threshold");
    const auto& sm = traj.samples;
    const std::size_t n = sm.size();
    const double cut = sm.back().sup * std::pow(10.0, -opt.window_decades);
    std::size_t first = n - 1;
    while (first > 0 && sm[first - 1].sup >= cut) --first;
    RateFit f;
    f.first = first;
    f.last = n - 1;
    const std::size_t m = n - first;
    if (m < 8) throw NumericalError("rate fit window holds fewer than 8 samples");
    std::vector<double> back(m), ly(m);
    for (std::size_t i = 0; i < m; ++i) {
        back[i] = traj.time_before_end(first + i);
        ly[i] = std::log(sm[first + i].sup);
    }
    const auto rms_at = [&](double ls) {
        const double s = std::exp(ls);
        std::vector<double> lx(m);
        for (std::size_t i = 0; i < m; ++i) lx[i] = std::log(s + back[i]);
        return fit_line(lx, ly).rms;
    };
    // T* - t_last = s; coarse scan in log s, then Brent around the best point
    const double smallest = back[m - 2] > 0 ? back[m - 2] : back[0] * 1e-30;
    const double lo = std::log(smallest) - 30.0, hi = std::log(back[0]) + 3.0;
    const int scan = 400;
    int best = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= scan; ++j) {
        const double v = rms_at(lo + (hi - lo) * j / scan);
        if (v < best_v) best_v = v, best = j;
    }
    const double a = lo + (hi - lo) * std::max(0, best - 1) / scan, b = lo + (hi - lo) * std::min(scan, best + 1) / scan;
    const auto res = boost::math::tools::brent_find_minima(rms_at, a, b, 50);
    const double s = std::exp(res.first);
    std::vector<double> lx(m);
    for (std::size_t i = 0; i < m; ++i) lx[i] = std::log(s + back[i]);
    const LineFit lf = fit_line(lx, ly);
    f.time_to_blowup = s;
    f.T_star = sm.back().t + s;
    f.exponent = -lf.slope;
    f.residual = lf.rms;
    f.window_hi = s + back[0];
    f.window_lo = s;
    if (f.window_hi / f.window_lo < 4.0) throw NumericalError("rate fit window spans fewer than two dyadic scales");
    if (!(f.residual <= opt.tolerance))
        throw NumericalError("rate fit residual " + fmt17(f.residual) + " above tolerance; exponent unreliable");
    return f;
}

std::string rate_fit_text(const RateFit& f) {
    std::ostringstream os;
    os << "T_star=" << fmt17(f.T_star) << "\n"
       << "time_to_blowup=" << fmt17(f.time_to_blowup) << "\n"
       << "exponent=" << fmt17(f.exponent) << "\n"
       << "residual=" << fmt17(f.residual) << "\n"
       << "window_first=" << f.first << "\n"
       << "window_last=" << f.last << "\n"
       << "window_lo=" << fmt17(f.window_lo) << "\n"
       << "window_hi=" << fmt17(f.window_hi) << "\n";
    return os.str();
}

TimeSeries track_mu(const Trajectory& traj) {
    std::vector<double> t, mu;
    for (const auto& s : traj.samples) {
        if (!(s.u0 > 0)) throw NumericalError("track_mu: nonpositive center value");
        if (!t.empty() && !(s.t > t.back())) continue;
        t.push_back(s.t);
        mu.push_back(sqrt3 / (s.u0 * s.u0));
    }
    if (t.empty() || t.front() != 0.0) throw ConfigError("track_mu needs a trajectory starting at t = 0");
    if (t.size() < 2) throw ConfigError("track_mu needs at least two distinct times");
    return TimeSeries(std::move(t), std::move(mu), Interp::linear);
}

std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << "t,sup_norm,u0,mu_est\n";
    for (const auto& s : traj.samples) {
        const double mu = s.u0 > 0 ? sqrt3 / (s.u0 * s.u0) : std::numeric_limits<double>::quiet_NaN();
        os << fmt17(s.t) << ',' << fmt17(s.sup) << ',' << fmt17(s.u0) << ',' << fmt17(mu) << '\n';
    }
    return os.str();
}

FieldSnapshot glued_initial_data(const ModulationPath& path, double x_max, std::size_t intervals) {
    const double m = path.mu(0.0);
    const RadialGrid g = RadialGrid::geometric(x_max, intervals, m / 16);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = glued_U1(g[i], 0.0, path);
    return FieldSnapshot(g, std::move(v), 0.0);
}

std::function<double(double)> glued_boundary(const ModulationPath& path, double x_max) {
    return [&path, x_max](double t) { return t < path.params().T ? glued_U1(x_max, t, path) : 0.0; };
}

InnerProbeReport inner_evolution_probe(const std::function<double(double, double)>& h, const BlowupParams& p,
                                       const InnerProbeOptions& opt) {
    if (!(opt.R > 1)) throw ConfigError("inner probe needs R > 1");
    const double ymax = 2 * opt.R;
    const double tau_max = opt.tau_max > 0 ? opt.tau_max : 2 * ymax * ymax;
    const RadialGrid grid = RadialGrid::geometric(ymax, opt.intervals, 0.02);
    const auto& y = grid.nodes();
    const std::size_t n = y.size() - 1;  // unknowns 0..n-1, φ(2R) = 0

    // finite-volume Δ + 5w⁴, symmetrised by the cell volumes
    std::vector<double> vol(n);
    Eigen::VectorXd diag(n), sub(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double rm = i == 0 ? 0.0 : 0.5 * (y[i] + y[i - 1]), rp = 0.5 * (y[i] + y[i + 1]);
        vol[i] = (rp * rp * rp - rm * rm * rm) / 3.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double rm = i == 0 ? 0.0 : 0.5 * (y[i] + y[i - 1]), rp = 0.5 * (y[i] + y[i + 1]);
        const double cp = rp * rp / (y[i + 1] - y[i]);
        const double cm = i == 0 ? 0.0 : rm * rm / (y[i] - y[i - 1]);
        const double w = bubble_w(y[i]);
        diag(i) = -(cp + cm) / vol[i] + 5 * w * w * w * w;
        if (i + 1 < n) sub(i) = cp / std::sqrt(vol[i] * vol[i + 1]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) throw NumericalError("inner probe eigen solve failed");
    const Eigen::VectorXd ev = es.eigenvalues();
    const Eigen::MatrixXd Q = es.eigenvectors();
    const Eigen::Index top = n - 1;  // the single growing mode
    const double grow = ev(top);
    if (!(grow > 0) || ev(top - 1) > 0) throw NumericalError("inner operator does not have exactly one growing mode");

    InnerProbeReport rep;
    rep.lambda_minus = -grow;
    Eigen::VectorXd sq(n);
    for (std::size_t i = 0; i < n; ++i) sq(i) = std::sqrt(vol[i]);
    Eigen::VectorXd zminus = Q.col(top).cwiseQuotient(sq);
    if (zminus(0) < 0) zminus = -zminus;
    const double zscale = zminus.cwiseAbs().maxCoeff();

    // report times: 0 and log-spaced up to tau_max
    std::vector<double> taus{0.0};
    for (std::size_t j = 0; j < opt.samples; ++j)
        taus.push_back(tau_max * std::pow(1e-4, 1.0 - static_cast<double>(j) / (opt.samples - 1)));

    // source in modal form, and the two preconditions
    const auto modal = [&](double tau) {
        Eigen::VectorXd v(n);
        for (std::size_t i = 0; i < n; ++i) v(i) = sq(i) * h(y[i], tau);
        return Eigen::VectorXd(Q.transpose() * v);
    };
    std::vector<double> zbreaks{0.0};
    for (double b = 0.5; b < ymax; b *= 2) zbreaks.push_back(b);
    zbreaks.push_back(ymax);
    const double pi = 3.14159265358979323846;
    for (double tau : taus) {
        for (std::size_t i = 0; i <= n; ++i)
            rep.h_norm = std::max(rep.h_norm, std::pow(1 + y[i], 2 + p.sigma) * std::abs(h(y[i], tau)));
        const double proj = gauss_composite([&](double r) { return h(r, tau) * kernel_Z0(r) * 4 * pi * r * r; }, zbreaks, 4);
        rep.orthogonality = std::max(rep.orthogonality, std::abs(proj));
    }
    if (rep.h_norm == 0.0) return rep;
    rep.orthogonality /= rep.h_norm;
    if (rep.orthogonality > 1e-6) throw ConfigError("inner source is not orthogonal to Z0 on B_2R");

    // growing mode: bounded solution, integrated backward from the quasi-static end value
    const std::size_t nt = taus.size();
    std::vector<Eigen::VectorXd> g(nt - 1);
    for (std::size_t j = 0; j + 1 < nt; ++j) g[j] = modal(0.5 * (taus[j] + taus[j + 1]));
    std::vector<double> a_top(nt);
    a_top[nt - 1] = -modal(taus.back())(top) / grow;
    for (std::size_t j = nt - 1; j-- > 0;) {
        const double d = taus[j + 1] - taus[j], e = std::exp(-grow * d);
        a_top[j] = e * a_top[j + 1] - (1 - e) * g[j](top) / grow;
    }
    rep.e0 = a_top[0] * zscale;

    // the scan: sign of the growing coefficient after a horizon short enough to stay finite
    const double tau_scan = std::min(tau_max, 25.0 / grow);
    const auto growing_at_scan = [&](double e0) {
        double a = e0 / zscale;
        for (std::size_t j = 0; j + 1 < nt && taus[j] < tau_scan; ++j) {
            const double d = std::min(taus[j + 1], tau_scan) - taus[j], e = std::exp(grow * d);
            a = e * a + (e - 1) * g[j](top) / grow;
        }
        return a;
    };
    double lo = -opt.e0_bracket, hi = opt.e0_bracket;
    double flo = growing_at_scan(lo), fhi = growing_at_scan(hi);
    if (!(flo * fhi < 0)) throw NumericalError("e0 bracket does not control the growing mode");
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi), fm = growing_at_scan(mid);
        if ((fm < 0) == (flo < 0)) lo = mid, flo = fm;
        else hi = mid;
    }
    rep.e0_scan = 0.5 * (lo + hi);

    // remaining modes forward, exact for piecewise constant sources
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    const double bound = std::pow(opt.R, (4 - p.sigma) / 3);
    const auto ratio_now = [&](const Eigen::VectorXd& coef) {
        const Eigen::VectorXd phi = (Q * coef).cwiseQuotient(sq);
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, (1 + y[i]) * std::abs(phi(i)));
        return m / (bound * rep.h_norm);
    };
    a(top) = a_top[0];
    rep.ratio = ratio_now(a);
    for (std::size_t j = 0; j + 1 < nt; ++j) {
        const double d = taus[j + 1] - taus[j];
        for (Eigen::Index m = 0; m < top; ++m) {
            const double lam = ev(m), e = std::exp(lam * d);
            a(m) = e * a(m) + (lam == 0.0 ? d : std::expm1(lam * d) / lam) * g[j](m);
        }
        a(top) = a_top[j + 1];
        rep.final_ratio = ratio_now(a);
        rep.ratio = std::max(rep.ratio, rep.final_ratio);
    }
    return rep;
}

}  // namespace blowup
