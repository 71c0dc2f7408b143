#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "blowuplab/abel.hpp"
#include "blowuplab/ansatz.hpp"
#include "blowuplab/config.hpp"
#include "blowuplab/errors.hpp"
#include "blowuplab/profiles.hpp"
#include "blowuplab/simulate.hpp"
#include "blowuplab/svg.hpp"

namespace py = pybind11;
using namespace blowup;

namespace {

Interp interp_of(const std::string& s) {
    if (s == "linear") return Interp::linear;
    if (s == "cubic") return Interp::cubic;
    if (s == "sqrt_linear") return Interp::sqrt_linear;
    throw ConfigError("interpolation must be linear, cubic or sqrt_linear");
}

SimControls controls(double threshold, double horizon, double cfl, double reaction, double core_nodes, bool diffusion) {
    SimControls c;
    c.threshold = threshold;
    c.horizon = horizon;
    c.cfl = cfl;
    c.reaction = reaction;
    c.core_nodes = core_nodes;
    c.diffusion = diffusion;
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    auto config_error = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ConstraintError>(m, "ConstraintError", config_error.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<BlowupParams>(m, "BlowupParams")
        .def(py::init<>())
        .def_readwrite("k", &BlowupParams::k)
        .def_readwrite("A", &BlowupParams::A)
        .def_readwrite("T", &BlowupParams::T)
        .def_readwrite("r", &BlowupParams::r)
        .def_readwrite("r1", &BlowupParams::r1)
        .def_readwrite("r2", &BlowupParams::r2)
        .def_readwrite("c0", &BlowupParams::c0)
        .def_readwrite("beta", &BlowupParams::beta)
        .def_readwrite("nu", &BlowupParams::nu)
        .def_readwrite("sigma", &BlowupParams::sigma)
        .def_readwrite("a", &BlowupParams::a)
        .def_readwrite("a2", &BlowupParams::a2)
        .def_readwrite("nu2", &BlowupParams::nu2)
        .def_readwrite("gamma", &BlowupParams::gamma)
        .def_readwrite("epsilon", &BlowupParams::epsilon)
        .def("validate", &BlowupParams::validate);

    m.def("check_constraints", [](const BlowupParams& p) {
        py::list out;
        for (const auto& c : check_constraints(p))
            out.append(py::dict(py::arg("id") = c.id, py::arg("expression") = c.expression,
                                py::arg("satisfied") = c.satisfied, py::arg("margin") = c.margin));
        return out;
    });

    m.def("bubble_w", &bubble_w);
    m.def("kernel_Z0", &kernel_Z0);
    m.def("corrector_J", [](double y) { return corrector_J(y).value; });
    m.def("profile_residuals", [](double h, double y_max) {
        const auto r = profile_residuals(h, y_max);
        return py::dict(py::arg("h") = r.h, py::arg("bubble") = r.bubble, py::arg("kernel") = r.kernel,
                        py::arg("corrector") = r.corrector);
    }, py::arg("h"), py::arg("y_max") = 50.0);

    m.def("mu0", &mu0);
    m.def("glued_U1", [](double x, double t, const BlowupParams& p) { return glued_U1(x, t, ModulationPath(p)); });

    m.def("abel_solve", [](std::vector<double> t, std::vector<double> h, const std::string& interp, double tolerance) {
        AbelOptions opt;
        opt.tolerance = tolerance;
        const auto s = abel_solve(TimeSeries(std::move(t), std::move(h), interp_of(interp)), opt);
        return py::make_tuple(s.alpha.times(), s.alpha.values(), s.residual);
    }, py::arg("t"), py::arg("h"), py::arg("interp") = "linear", py::arg("tolerance") = 1e-2,
       "alpha with ∫α(s)(t-s)^{-1/2} ds = h; returns (t, alpha, residual)");

    py::class_<RateFit>(m, "RateFit")
        .def_readonly("T_star", &RateFit::T_star)
        .def_readonly("time_to_blowup", &RateFit::time_to_blowup)
        .def_readonly("exponent", &RateFit::exponent)
        .def_readonly("residual", &RateFit::residual);

    py::class_<Trajectory>(m, "Trajectory")
        .def_property_readonly("t", [](const Trajectory& tr) {
            std::vector<double> v;
            for (const auto& s : tr.samples) v.push_back(s.t);
            return v;
        })
        .def_property_readonly("sup", [](const Trajectory& tr) {
            std::vector<double> v;
            for (const auto& s : tr.samples) v.push_back(s.sup);
            return v;
        })
        .def_property_readonly("u0", [](const Trajectory& tr) {
            std::vector<double> v;
            for (const auto& s : tr.samples) v.push_back(s.u0);
            return v;
        })
        .def_property_readonly("reason", [](const Trajectory& tr) { return termination_name(tr.reason); })
        .def_readonly("steps", &Trajectory::steps)
        .def_readonly("regrids", &Trajectory::regrids)
        .def("fit_rate", [](const Trajectory& tr, double window_decades, double tolerance) {
            RateFitOptions opt;
            opt.window_decades = window_decades;
            opt.tolerance = tolerance;
            return fit_rate(tr, opt);
        }, py::arg("window_decades") = 4.0, py::arg("tolerance") = 0.05);

    m.def("simulate", [](std::vector<double> r, std::vector<double> u, double threshold, double horizon, double cfl,
                         double reaction, double core_nodes, bool diffusion) {
        const FieldSnapshot u0(RadialGrid(std::move(r)), std::move(u));
        py::gil_scoped_release nogil;
        return run(u0, controls(threshold, horizon, cfl, reaction, core_nodes, diffusion));
    }, py::arg("r"), py::arg("u"), py::arg("threshold") = 1e8, py::arg("horizon") = 100.0, py::arg("cfl") = 0.4,
       py::arg("reaction") = 0.1, py::arg("core_nodes") = 8.0, py::arg("diffusion") = true,
       "u_t = Δu + u⁵ from radial data u on nodes r (r[0] = 0); Dirichlet at r[-1]");

    m.def("run_config", [](const std::string& text, const std::vector<std::string>& settings) {
        RunConfig c = parse_config(text);
        for (const auto& s : settings) apply_setting(c, s);
        finalize_config(c);
        return run_subcommand(c);
    }, py::arg("text"), py::arg("settings") = std::vector<std::string>{},
       "parse key=value text, apply extra settings, run the subcommand; returns the files written");
    m.def("config_keys", &config_keys);

    py::class_<PlotSeries>(m, "PlotSeries")
        .def(py::init([](std::string label, std::vector<double> x, std::vector<double> y, bool markers) {
            return PlotSeries{std::move(label), std::move(x), std::move(y), markers};
        }), py::arg("label"), py::arg("x"), py::arg("y"), py::arg("markers") = false);
    m.def("emit_plot", [](const std::vector<PlotSeries>& series, std::string title, std::string x_label,
                          std::string y_label, bool log_x, bool log_y, bool slope_annotation) {
        PlotStyle st;
        st.title = std::move(title);
        st.x_label = std::move(x_label);
        st.y_label = std::move(y_label);
        st.log_x = log_x;
        st.log_y = log_y;
        st.slope_annotation = slope_annotation;
        return emit_plot(series, st);
    }, py::arg("series"), py::arg("title") = "", py::arg("x_label") = "", py::arg("y_label") = "",
       py::arg("log_x") = false, py::arg("log_y") = false, py::arg("slope_annotation") = false);
}
