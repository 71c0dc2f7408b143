#include "blowuplab/config.hpp"

#include <algorithm>
#include <charconv>
#include <fmt/format.h>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "blowuplab/abel.hpp"
#include "blowuplab/errors.hpp"
#include "blowuplab/format.hpp"
#include "blowuplab/nonlocal.hpp"
#include "blowuplab/profiles.hpp"
#include "blowuplab/residual.hpp"
#include "blowuplab/simulate.hpp"
#include "blowuplab/svg.hpp"

namespace fs = std::filesystem;

namespace blowup {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x))
        throw ConfigError("bad value for " + key + ": '" + v + "'");
    return x;
}

long to_long(const std::string& key, const std::string& v) {
    long x = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError("bad integer for " + key + ": '" + v + "'");
    return x;
}

std::size_t to_count(const std::string& key, const std::string& v) {
    const long x = to_long(key, v);
    if (x < 1) throw ConfigError(key + " must be positive");
    return static_cast<std::size_t>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("bad boolean for " + key + ": '" + v + "'");
}

std::string one_of(const std::string& key, const std::string& v, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (v == a) return v;
    throw ConfigError("bad value for " + key + ": '" + v + "'");
}

struct Key {
    const char* name;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define REAL(NAME, FIELD) \
    Key{NAME, [](RunConfig& c, const std::string& v) { c.FIELD = to_double(NAME, v); }, [](const RunConfig& c) { return fmt17(c.FIELD); }}
#define COUNT(NAME, FIELD)                                                                \
    Key {                                                                                 \
        NAME, [](RunConfig& c, const std::string& v) { c.FIELD = to_count(NAME, v); },    \
            [](const RunConfig& c) { return std::to_string(c.FIELD); }                    \
    }
#define TEXT(NAME, FIELD) \
    Key{NAME, [](RunConfig& c, const std::string& v) { c.FIELD = v; }, [](const RunConfig& c) { return c.FIELD; }}

const std::vector<Key>& keys() {
    static const std::vector<Key> table = {
        Key{"subcommand",
            [](RunConfig& c, const std::string& v) {
                c.subcommand = one_of("subcommand", v, {"profiles", "ansatz", "residual", "nonlocal", "abel", "simulate", "report"});
            },
            [](const RunConfig& c) { return c.subcommand; }},
        Key{"k", [](RunConfig& c, const std::string& v) { c.params.k = static_cast<int>(to_long("k", v)); },
            [](const RunConfig& c) { return std::to_string(c.params.k); }},
        REAL("A", params.A),
        REAL("T", params.T),
        REAL("r", params.r),
        REAL("r1", params.r1),
        REAL("r2", params.r2),
        REAL("c0", params.c0),
        REAL("beta", params.beta),
        REAL("nu", params.nu),
        REAL("sigma", params.sigma),
        REAL("a", params.a),
        REAL("a2", params.a2),
        REAL("nu2", params.nu2),
        REAL("gamma", params.gamma),
        REAL("epsilon", params.epsilon),
        TEXT("output_dir", output_dir),
        TEXT("run_dir", run_dir),
        Key{"seed", [](RunConfig& c, const std::string& v) { c.seed = static_cast<unsigned long>(to_long("seed", v)); },
            [](const RunConfig& c) { return std::to_string(c.seed); }},
        Key{"override_constraints", [](RunConfig& c, const std::string& v) { c.override_constraints = to_bool("override_constraints", v); },
            [](const RunConfig& c) { return std::string(c.override_constraints ? "true" : "false"); }},
        REAL("y_max", y_max),
        REAL("profile_h", profile_h),
        COUNT("x_intervals", x_intervals),
        COUNT("time_samples", time_samples),
        TEXT("abel_input", abel_input),
        Key{"abel_mode", [](RunConfig& c, const std::string& v) { c.abel_mode = one_of("abel_mode", v, {"auto", "invert", "reduced"}); },
            [](const RunConfig& c) { return c.abel_mode; }},
        REAL("abel_tolerance", abel_tolerance),
        Key{"probe_t_levels", [](RunConfig& c, const std::string& v) { c.probe_t_levels = static_cast<int>(to_count("probe_t_levels", v)); },
            [](const RunConfig& c) { return std::to_string(c.probe_t_levels); }},
        COUNT("probe_x_points", probe_x_points),
        Key{"sim_data", [](RunConfig& c, const std::string& v) { c.sim_data = one_of("sim_data", v, {"gaussian", "glued"}); },
            [](const RunConfig& c) { return c.sim_data; }},
        REAL("sim_amplitude", sim_amplitude),
        REAL("sim_r_max", sim_r_max),
        COUNT("sim_intervals", sim_intervals),
        REAL("threshold", threshold),
        REAL("horizon", horizon),
        REAL("cfl", cfl),
        REAL("reaction", reaction),
        REAL("core_nodes", core_nodes),
    };
    return table;
}

#undef REAL
#undef COUNT
#undef TEXT

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& raw) {
    const auto eq = raw.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + raw + "'");
    const std::string key = trim(raw.substr(0, eq)), value = trim(raw.substr(eq + 1));
    for (const auto& k : keys())
        if (key == k.name) {
            k.set(cfg, value);
            return;
        }
    throw ConfigError("unknown key '" + key + "'");
}

void finalize_config(RunConfig& cfg) {
    cfg.params.validate();
    if (!(cfg.y_max > 1)) throw ConfigError("y_max must exceed 1");
    if (!(cfg.profile_h > 0) || cfg.y_max / cfg.profile_h < 64) throw ConfigError("profile_h too coarse for y_max");
    if (cfg.x_intervals < 16 || cfg.sim_intervals < 16) throw ConfigError("grids need at least 16 intervals");
    if (cfg.time_samples < 8) throw ConfigError("time_samples must be at least 8");
    if (!(cfg.sim_amplitude > 0) || !(cfg.sim_r_max > 0)) throw ConfigError("sim_amplitude and sim_r_max must be positive");
    if (!(cfg.threshold > 0) || !(cfg.horizon > 0) || !(cfg.cfl > 0) || !(cfg.reaction > 0) || !(cfg.core_nodes >= 1))
        throw ConfigError("simulation controls must be positive");
    if (!(cfg.abel_tolerance > 0)) throw ConfigError("abel_tolerance must be positive");
    cfg.warnings.clear();
    for (const auto& c : check_constraints(cfg.params))
        if (!c.satisfied) cfg.warnings.push_back(c.id);
    if (!cfg.warnings.empty() && !cfg.override_constraints) {
        std::string ids;
        for (const auto& w : cfg.warnings) ids += (ids.empty() ? "" : ", ") + w;
        throw ConstraintError("exponent constraints fail (" + ids + "); set override_constraints=true to run anyway");
    }
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        apply_setting(cfg, line);
    }
    finalize_config(cfg);
    return cfg;
}

std::string config_text(const RunConfig& cfg) {
    std::string out;
    for (const auto& k : keys()) out += std::string(k.name) + "=" + k.get(cfg) + "\n";
    return out;
}

std::vector<std::pair<std::string, std::string>> config_keys() {
    const RunConfig def;
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : keys()) out.emplace_back(k.name, k.get(def));
    return out;
}

int exit_code_of_current_exception() {
    try {
        throw;
    } catch (const ConstraintError&) {
        return 4;
    } catch (const ConfigError&) {
        return 2;
    } catch (const NumericalError&) {
        return 3;
    } catch (const fs::filesystem_error&) {
        return 2;
    } catch (const std::invalid_argument&) {
        return 2;
    } catch (const std::domain_error&) {
        return 2;
    } catch (...) {
        return 3;
    }
}

// ---------------------------------------------------------------- subcommands

namespace {

struct Out {
    fs::path dir;
    std::vector<std::string> written;
    void file(const std::string& name, const std::string& content) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + (dir / name).string());
        f << content;
        if (!f) throw ConfigError("cannot write " + (dir / name).string());
        written.push_back(name);
    }
};

std::string kv(const std::string& k, double v) { return k + "=" + fmt17(v) + "\n"; }
std::string kv(const std::string& k, const std::string& v) { return k + "=" + v + "\n"; }

double observed_order(double coarse, double fine) { return std::log2(coarse / fine); }

void run_profiles(const RunConfig& cfg, Out& out) {
    const auto& tab = CorrectorTable::shared();
    const std::size_t n = 500;
    std::vector<ProfileSample> w, z, j;
    for (std::size_t i = 0; i <= n; ++i) {
        const double y = cfg.y_max * i / n;
        w.push_back({y, bubble_w(y), bubble_w_d1(y), false});
        z.push_back({y, kernel_Z0(y), kernel_Z0_d1(y), false});
        j.push_back(tab.sample(y));
    }
    out.file("bubble.csv", profile_csv(w));
    out.file("kernel.csv", profile_csv(z));
    out.file("corrector.csv", profile_csv(j));

    std::string rep;
    ProfileResiduals prev;
    for (double h : {2 * cfg.profile_h, cfg.profile_h, cfg.profile_h / 2}) {
        const auto r = profile_residuals(h, cfg.y_max);
        rep += kv(fmt::format("residual_h{}", fmt17(h)), fmt17(r.bubble) + "," + fmt17(r.kernel) + "," + fmt17(r.corrector));
        if (prev.h > 0) {
            rep += kv("order_bubble", observed_order(prev.bubble, r.bubble));
            rep += kv("order_kernel", observed_order(prev.kernel, r.kernel));
            rep += kv("order_corrector", observed_order(prev.corrector, r.corrector));
        }
        prev = r;
    }
    rep += kv("J_far_slope_ratio", tab.value(1e3) / 1e3 / kJSlope);
    const auto ep = negative_eigenpair(RadialGrid::uniform(30.0, 6000));
    rep += kv("lambda_minus", ep.lambda_minus);
    rep += kv("eigen_gap", ep.next_eigenvalue - ep.lambda_minus);
    EigenResidualOptions o4;
    o4.order = 4;
    const int k = cfg.params.k;
    const double A = cfg.params.A;
    const auto m = [k, A](double zz) { return outer_profile_m(zz, k, A); };
    rep += kv("outer_eigen_residual", eigen_residual(m, 0.25 - k, RadialGrid::uniform(1.0, 3.0, 800), o4).value);
    out.file("ode_residual.txt", rep);

    std::vector<PlotSeries> s(3);
    s[0].label = "w";
    s[1].label = "Z0";
    s[2].label = "J";
    for (std::size_t i = 0; i <= n; ++i) {
        if (w[i].y > 10) break;
        for (auto* p : {&s[0], &s[1], &s[2]}) p->x.push_back(w[i].y);
        s[0].y.push_back(w[i].value);
        s[1].y.push_back(z[i].value);
        s[2].y.push_back(j[i].value);
    }
    PlotStyle st;
    st.title = "profiles";
    st.x_label = "y";
    out.file("profiles.svg", emit_plot(s, st));
}

void run_ansatz(const RunConfig& cfg, Out& out) {
    const auto& p = cfg.params;
    std::string c = "id,expression,satisfied,margin\n";
    for (const auto& x : check_constraints(p))
        c += x.id + ",\"" + x.expression + "\"," + (x.satisfied ? "true" : "false") + "," + fmt17(x.margin) + "\n";
    out.file("constraints.csv", c);

    const double gap = std::min(1e-3, p.T / 10);
    const auto m = matching_report(p.T - gap, p);
    std::string r;
    r += kv("T_minus_t", gap);
    r += kv("inner_coeff_inv", m.inner_coeff_inv) + kv("outer_coeff_inv", m.outer_coeff_inv);
    r += kv("inner_coeff_lin", m.inner_coeff_lin) + kv("outer_coeff_lin", m.outer_coeff_lin);
    r += kv("rel_gap_inv", m.rel_gap_inv) + kv("rel_gap_lin", m.rel_gap_lin);
    r += kv("mid_radius", m.mid_radius) + kv("mid_rel_gap", m.mid_rel_gap);
    out.file("matching.txt", r);

    PlotSeries s;
    s.label = "mu0";
    std::string csv = "t,T_minus_t,mu0,R\n";
    for (int j = 0; j <= 48; ++j) {
        const double tau = p.T * std::pow(10.0, -j / 8.0), t = p.T - tau;
        csv += fmt17(t) + "," + fmt17(tau) + "," + fmt17(mu0(t, p)) + "," + fmt17(R_of(t, p)) + "\n";
        s.x.push_back(tau);
        s.y.push_back(mu0(t, p));
    }
    out.file("mu0.csv", csv);
    PlotStyle st;
    st.title = "scaling law";
    st.x_label = "T - t";
    st.y_label = "mu0";
    st.log_x = st.log_y = true;
    st.slope_annotation = true;
    out.file("mu0.svg", emit_plot({s}, st));

    const ModulationPath path(p);
    const double t = p.T / 2;
    const RadialGrid g = RadialGrid::geometric(10 * std::sqrt(p.T), cfg.x_intervals, mu0(t, p) / 16);
    std::string u = "x,U1,S_U1\n";
    for (double x : g.nodes()) u += fmt17(x) + "," + fmt17(glued_U1(x, t, path)) + "," + fmt17(error_S_U1(x, t, path)) + "\n";
    out.file("glued.csv", u);
}

void run_residual(const RunConfig& cfg, Out& out) {
    const auto& p = cfg.params;
    const ModulationPath path(p);
    std::string csv = "t,ratio,arg_x,lhs_sup,majorant_sup\n";
    for (int j = 1; j <= 6; ++j) {
        const double t = p.T * (1 - std::pow(2.0, -j));
        const auto g = bound_probe_g4(t, path, g4_probe_grid(t, p, cfg.x_intervals));
        csv += fmt17(t) + "," + fmt17(g.ratio.value) + "," + fmt17(g.ratio.arg_x) + "," + fmt17(g.lhs_sup) + "," +
               fmt17(g.majorant_sup) + "\n";
    }
    out.file("g4_probe.csv", csv);
}

void run_nonlocal(const RunConfig& cfg, Out& out) {
    const auto& p = cfg.params;
    std::vector<double> rates;
    for (int j = 1; j <= p.k + 1; ++j) rates.push_back(j * p.T);
    std::string u = "order,fitted_slope\n";
    for (int i = 1; i <= p.k; ++i) u += std::to_string(i) + "," + fmt17(vanishing_order_fit(vanishing_combo(p.T, rates, i), p.T)) + "\n";
    out.file("upsilon.csv", u);

    std::string b = "t,block_value,block_half_integral\n";
    const double kappa = 1 / (4 * p.T);
    for (int j = 0; j <= 40; ++j) {
        const double t = p.T * j / 40;
        b += fmt17(t) + "," + fmt17(block_value(kappa, t)) + "," + fmt17(block_half_integral(kappa, t)) + "\n";
    }
    out.file("blocks.csv", b);

    ProbeOptions o;
    o.t_levels = cfg.probe_t_levels;
    o.fit_levels = std::min(4, cfg.probe_t_levels);
    o.x_points = cfg.probe_x_points;
    std::vector<ProbeRow> rows;
    for (auto f : {ProbeFamily::rhs1, ProbeFamily::rhs2, ProbeFamily::rhs3}) {
        auto r = bound_probe_appendix(f, p, o);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    out.file("probes.csv", probe_csv(rows));
}

TimeSeries read_table(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read abel_input " + path);
    std::vector<double> t, h;
    std::string line;
    while (std::getline(f, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("abel_input rows must be t,h");
        t.push_back(to_double("abel_input", trim(line.substr(0, comma))));
        h.push_back(to_double("abel_input", trim(line.substr(comma + 1))));
    }
    try {
        return TimeSeries(t, h, Interp::sqrt_linear);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("abel_input: ") + e.what());
    }
}

void run_abel(const RunConfig& cfg, Out& out) {
    const auto& p = cfg.params;
    const bool invert = cfg.abel_mode == "invert" || (cfg.abel_mode == "auto" && !cfg.abel_input.empty());
    if (invert) {
        if (cfg.abel_input.empty()) throw ConfigError("abel_mode=invert needs abel_input");
        const TimeSeries h = read_table(cfg.abel_input);
        AbelOptions o;
        o.tolerance = cfg.abel_tolerance;
        const auto s = abel_solve(h, o);
        std::string csv = "t,alpha\n";
        for (std::size_t i = 0; i < s.alpha.size(); ++i) csv += fmt17(s.alpha.times()[i]) + "," + fmt17(s.alpha.values()[i]) + "\n";
        out.file("alpha.csv", csv);
        out.file("abel.txt", kv("samples", std::to_string(h.size())) + kv("forward_residual", s.residual));
        PlotSeries a;
        a.label = "alpha";
        a.x = s.alpha.times();
        a.y = s.alpha.values();
        PlotStyle st;
        st.title = "Abel inversion";
        st.x_label = "t";
        out.file("alpha.svg", emit_plot({a}, st));
        return;
    }
    TimeSeries h = cfg.abel_input.empty()
                       ? TimeSeries::sample([&](double x) { return std::sin(4 * x / p.T) + 0.3 * std::cos(10 * x / p.T) - 0.3; },
                                            cosine_times(p.T, cfg.time_samples), Interp::cubic)
                       : read_table(cfg.abel_input);
    if (!cfg.abel_input.empty()) h = TimeSeries(h.times(), h.values(), Interp::cubic);
    const auto s = reduced_solve(h, p.k, p);
    out.file("reduced.csv", reduced_csv(s));
    std::string r;
    for (std::size_t j = 0; j < s.c.size(); ++j) r += kv("c" + std::to_string(j + 1), s.c[j]);
    r += kv("alpha_singular", s.alpha_singular) + kv("decay_exponent", s.decay_exponent) + kv("alpha_at_T", s.alpha_at_T);
    r += kv("forward_residual", s.forward_residual);
    r += kv("c_bound_constant", c_bound_constant(s.c, p.T, p.epsilon));
    out.file("reduced.txt", r);
    PlotSeries a, l;
    a.label = "alpha (smooth part)";
    a.x = s.alpha.times();
    a.y = s.alpha.values();
    l.label = "Lambda";
    l.x = s.Lambda.times();
    l.y = s.Lambda.values();
    PlotStyle st;
    st.title = "reduced problem";
    st.x_label = "t";
    out.file("reduced.svg", emit_plot({a, l}, st));
}

void run_simulate(const RunConfig& cfg, Out& out) {
    const auto& p = cfg.params;
    SimControls c;
    c.threshold = cfg.threshold;
    c.horizon = cfg.horizon;
    c.cfl = cfg.cfl;
    c.reaction = cfg.reaction;
    c.core_nodes = cfg.core_nodes;
    const ModulationPath path(p);
    FieldSnapshot u0 = [&] {
        if (cfg.sim_data == "glued") {
            const double xm = 10 * std::sqrt(p.T);
            c.boundary = glued_boundary(path, xm);
            return glued_initial_data(path, xm, cfg.sim_intervals);
        }
        const RadialGrid g = RadialGrid::uniform(cfg.sim_r_max, cfg.sim_intervals);
        std::vector<double> v(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) v[i] = cfg.sim_amplitude * std::exp(-g[i] * g[i]);
        return FieldSnapshot(g, v);
    }();
    const Trajectory tr = run(u0, c);
    out.file("trajectory.csv", trajectory_csv(tr));
    std::string summary = kv("termination", termination_name(tr.reason)) + kv("steps", std::to_string(tr.steps)) +
                          kv("halvings", std::to_string(tr.halvings)) + kv("regrids", std::to_string(tr.regrids)) +
                          kv("t_end", tr.samples.back().t) + kv("sup_end", tr.samples.back().sup);
    if (cfg.sim_data == "glued") {
        const TimeSeries mu = track_mu(tr);
        std::string csv = "t,mu_est,mu0,ratio\n";
        double lo = 1e300, hi = 0;
        const double sup0 = tr.samples.front().sup;
        double tracked_until = 0;
        bool inside = true;
        for (std::size_t i = 0; i < mu.size(); ++i) {
            const double t = mu.times()[i];
            if (t >= p.T) break;
            const double ratio = mu.values()[i] / path.mu0(t);
            csv += fmt17(t) + "," + fmt17(mu.values()[i]) + "," + fmt17(path.mu0(t)) + "," + fmt17(ratio) + "\n";
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            if (inside && ratio >= 0.5 && ratio <= 2) tracked_until = t;
            else inside = false;
        }
        out.file("mu_tracking.csv", csv);
        summary += kv("mu_ratio_min", lo) + kv("mu_ratio_max", hi) + kv("tracked_until", tracked_until) + kv("sup_initial", sup0);
    }
    if (tr.reason != Termination::blowup_threshold) {
        out.file("simulate.txt", summary);
        return;
    }
    RateFit f;
    try {
        f = fit_rate(tr);
    } catch (const NumericalError& e) {
        out.file("simulate.txt", summary + kv("rate_fit", std::string("failed: ") + e.what()));
        throw;
    }
    out.file("simulate.txt", summary);
    out.file("rate_fit.txt", rate_fit_text(f));
    PlotSeries data, fit;
    data.label = "sup|u|";
    data.markers = true;
    fit.label = fmt::format("fit (T*-t)^-{:.4f}", f.exponent);
    const double logc = [&] {
        double s = 0;
        for (std::size_t i = f.first; i <= f.last; ++i)
            s += std::log(tr.samples[i].sup) + f.exponent * std::log(f.time_to_blowup + tr.time_before_end(i));
        return s / static_cast<double>(f.last - f.first + 1);
    }();
    const std::size_t stride = std::max<std::size_t>(1, tr.samples.size() / 400);
    for (std::size_t i = 0; i < tr.samples.size(); i += stride) {
        const double s = f.time_to_blowup + tr.time_before_end(i);
        data.x.push_back(s);
        data.y.push_back(tr.samples[i].sup);
        if (i >= f.first) {
            fit.x.push_back(s);
            fit.y.push_back(std::exp(logc - f.exponent * std::log(s)));
        }
    }
    PlotStyle st;
    st.title = "blow-up rate";
    st.x_label = "T* - t";
    st.y_label = "sup|u|";
    st.log_x = st.log_y = true;
    out.file("rate_fit.svg", emit_plot({data, fit}, st));
}

void run_report(const RunConfig& cfg, Out& out) {
    const fs::path dir = cfg.run_dir.empty() ? fs::path(cfg.output_dir) : fs::path(cfg.run_dir);
    if (!fs::is_directory(dir)) throw ConfigError("run_dir " + dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() != "summary.txt") files.push_back(fs::relative(e.path(), dir));
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ConfigError("run_dir " + dir.string() + " holds no artifacts");
    std::string s;
    for (const auto& rel : files) {
        std::ifstream f(dir / rel, std::ios::binary);
        std::stringstream buf;
        buf << f.rdbuf();
        const std::string text = buf.str();
        const std::string ext = rel.extension().string();
        s += "[" + rel.generic_string() + "]\n";
        if (ext == ".txt") {
            s += text;
            if (!text.empty() && text.back() != '\n') s += "\n";
        } else if (ext == ".csv") {
            std::istringstream in(text);
            std::string line, header;
            std::size_t rows = 0;
            while (std::getline(in, line)) {
                if (line.empty() || line[0] == '#') continue;
                if (header.empty()) header = line;
                else ++rows;
            }
            s += kv("columns", header) + kv("rows", std::to_string(rows));
        } else {
            s += kv("bytes", std::to_string(text.size()));
        }
    }
    out.file("summary.txt", s);
}

}  // namespace

std::vector<std::string> run_subcommand(const RunConfig& cfg) {
    Out out;
    out.dir = cfg.output_dir;
    std::error_code ec;
    fs::create_directories(out.dir, ec);
    if (ec || !fs::is_directory(out.dir)) throw ConfigError("cannot create output directory " + cfg.output_dir);
    if (cfg.subcommand != "report") {
        std::string w;
        for (const auto& id : cfg.warnings) w += "# constraint failing (override): " + id + "\n";
        out.file("config.txt", w + config_text(cfg));
    }
    if (cfg.subcommand == "profiles") run_profiles(cfg, out);
    else if (cfg.subcommand == "ansatz") run_ansatz(cfg, out);
    else if (cfg.subcommand == "residual") run_residual(cfg, out);
    else if (cfg.subcommand == "nonlocal") run_nonlocal(cfg, out);
    else if (cfg.subcommand == "abel") run_abel(cfg, out);
    else if (cfg.subcommand == "simulate") run_simulate(cfg, out);
    else if (cfg.subcommand == "report") run_report(cfg, out);
    else throw ConfigError("unknown subcommand " + cfg.subcommand);
    std::sort(out.written.begin(), out.written.end());
    return out.written;
}

}  // namespace blowup
