#include "owrc/cli.hpp"
#include "owrc/diagnostics.hpp"
#include "owrc/io.hpp"
#include "owrc/line_search.hpp"
#include "owrc/problem.hpp"
#include "owrc/solver.hpp"
#include "owrc/subproblem.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>
#include <stdexcept>

namespace py = pybind11;
using namespace owrc;

namespace {

// Records as a dict of arrays: one row per iteration.
py::dict trace_arrays(const SolverTrace& trace) {
    const auto K = static_cast<Eigen::Index>(trace.records.size());
    const auto n = trace.records.empty() ? 0 : trace.records.front().x.size();
    const auto m = trace.records.empty() ? 0 : trace.records.front().phi.size();
    Matrix x(K, n), phi(K, m), t(K, n);
    Vector theta(K), alpha(K), tnorm(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const auto& r = trace.records[static_cast<std::size_t>(k)];
        x.row(k) = r.x.transpose();
        phi.row(k) = r.phi.transpose();
        t.row(k) = r.direction.transpose();
        theta(k) = r.theta;
        alpha(k) = r.alpha;
        tnorm(k) = r.direction_norm;
    }
    py::dict d;
    d["x"] = x;
    d["phi"] = phi;
    d["t"] = t;
    d["theta"] = theta;
    d["alpha"] = alpha;
    d["t_norm"] = tnorm;
    return d;
}

// Holds a Python callable; the reference is dropped under the GIL.
struct PyObjective {
    py::function fn;
    ~PyObjective() {
        py::gil_scoped_acquire gil;
        fn = py::function();
    }
};

// f(x, scenario) -> (value, gradient) from Python.
ObjectiveEvaluator wrap_objective(py::function fn) {
    auto holder = std::make_shared<PyObjective>(PyObjective{std::move(fn)});
    return [holder](const Vector& x, const Vector& scenario) {
        py::gil_scoped_acquire gil;
        const py::tuple r = holder->fn(x, scenario);
        if (r.size() != 2) throw std::runtime_error("objective must return (value, gradient)");
        return ValueGradient{r[0].cast<double>(), r[1].cast<Vector>()};
    };
}

}  // namespace

PYBIND11_MODULE(_owrc, mod) {
    mod.doc() = "Robust multiobjective steepest descent over finite scenario sets";

    py::register_exception<diagnostics::CheckError>(mod, "CheckError", PyExc_ValueError);
    py::register_exception<io::FormatError>(mod, "FormatError", PyExc_ValueError);
    py::register_exception<LineSearchError>(mod, "LineSearchError", PyExc_RuntimeError);

    py::class_<ValueGradient>(mod, "ValueGradient")
        .def_readonly("value", &ValueGradient::value)
        .def_readonly("gradient", &ValueGradient::gradient);

    py::class_<ProblemInstance>(mod, "Problem")
        .def(py::init([](std::string name, std::size_t n, std::vector<Vector> scenarios,
                         std::vector<py::function> objectives) {
                 std::vector<ObjectiveEvaluator> evals;
                 for (auto& f : objectives) evals.push_back(wrap_objective(std::move(f)));
                 return ProblemInstance(std::move(name), n, ScenarioSet(std::move(scenarios)), std::move(evals));
             }),
             py::arg("name"), py::arg("n"), py::arg("scenarios"), py::arg("objectives"))
        .def_property_readonly("name", &ProblemInstance::name)
        .def_property_readonly("description", &ProblemInstance::description)
        .def_property_readonly("n", &ProblemInstance::dimension)
        .def_property_readonly("m", &ProblemInstance::num_objectives)
        .def_property_readonly("p", &ProblemInstance::num_scenarios)
        .def_property_readonly("gamma", &ProblemInstance::smoothness_constant)
        .def_property_readonly("mu", &ProblemInstance::strong_convexity_modulus)
        .def_property_readonly("known_solution", &ProblemInstance::known_solution)
        .def("evaluate", &ProblemInstance::evaluate, py::arg("j"), py::arg("i"), py::arg("x"))
        .def("phi", [](const ProblemInstance& p, const Vector& x) { return evaluate_phi(p, x); }, py::arg("x"));

    mod.def("builtin_problems", [] {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& e : builtin_problem_list()) out.emplace_back(e.name, e.description);
        return out;
    });
    mod.def("builtin_problem", &builtin_problem, py::arg("name"));
    mod.def(
        "load_problem", [](const std::string& path) { return io::build_problem(io::read_problem_file(path)); },
        py::arg("path"));
    mod.def(
        "parse_problem", [](const std::string& text) { return io::build_problem(io::parse_problem_file(text)); },
        py::arg("text"));
    mod.def(
        "quadratic_problem",
        [](std::vector<std::vector<Matrix>> Q, std::vector<std::vector<Vector>> b, std::vector<std::vector<double>> c) {
            return make_quadratic_problem({std::move(Q), std::move(b), std::move(c)});
        },
        py::arg("Q"), py::arg("b"), py::arg("c"));

    py::class_<SubproblemSolution>(mod, "SubproblemSolution")
        .def_readonly("direction", &SubproblemSolution::direction)
        .def_readonly("theta", &SubproblemSolution::theta)
        .def_readonly("lam", &SubproblemSolution::lambda)
        .def_readonly("rho", &SubproblemSolution::rho)
        .def_readonly("kkt_residual", &SubproblemSolution::kkt_residual)
        .def_readonly("dual_value", &SubproblemSolution::dual_value)
        .def_readonly("iterations", &SubproblemSolution::iterations)
        .def_readonly("certified", &SubproblemSolution::certified);

    mod.def(
        "solve_subproblem",
        [](const ProblemInstance& p, const Vector& x, double tol) { return solve_subproblem(p, x, {tol, 0}); },
        py::arg("problem"), py::arg("x"), py::arg("tol") = 1e-8);
    mod.def(
        "phi_star",
        [](const ProblemInstance& p, const Vector& x, const Vector& t) { return phi_star(evaluate_robust(p, x), t); },
        py::arg("problem"), py::arg("x"), py::arg("t"));

    py::class_<LineSearchResult>(mod, "LineSearchResult")
        .def_readonly("alpha", &LineSearchResult::alpha)
        .def_readonly("r", &LineSearchResult::r)
        .def_readonly("trials", &LineSearchResult::trials)
        .def_readonly("phi_star", &LineSearchResult::phi_star)
        .def_readonly("phi_new", &LineSearchResult::phi_new);
    mod.def(
        "armijo_search",
        [](const ProblemInstance& p, const Vector& x, const Vector& t, double beta) {
            return armijo_search(p, x, t, beta);
        },
        py::arg("problem"), py::arg("x"), py::arg("t"), py::arg("beta") = kDefaultArmijoBeta);

    py::class_<SolverConfig>(mod, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("epsilon", &SolverConfig::epsilon)
        .def_readwrite("beta", &SolverConfig::beta)
        .def_readwrite("max_iterations", &SolverConfig::max_iterations)
        .def_readwrite("constant_alpha", &SolverConfig::constant_alpha)
        .def_property(
            "mode", [](const SolverConfig& c) { return std::string(to_string(c.step_mode)); },
            [](SolverConfig& c, const std::string& s) { c.step_mode = step_mode_from_string(s); });

    py::class_<SolverTrace>(mod, "Trace")
        .def_readonly("problem_name", &SolverTrace::problem_name)
        .def_readonly("config", &SolverTrace::config)
        .def_readonly("final_x", &SolverTrace::final_x)
        .def_readonly("message", &SolverTrace::message)
        .def_property_readonly("termination",
                               [](const SolverTrace& t) { return std::string(to_string(t.termination)); })
        .def_property_readonly("iterations", [](const SolverTrace& t) { return t.records.empty() ? 0 : t.records.size() - 1; })
        .def("arrays", &trace_arrays)
        .def("save", [](const SolverTrace& t, const std::string& path) { io::write_trace_file(path, t); },
             py::arg("path"));

    mod.def(
        "run",
        [](const ProblemInstance& p, const Vector& x0, const SolverConfig& config) {
            py::gil_scoped_release release;
            return run(p, x0, config);
        },
        py::arg("problem"), py::arg("x0"), py::arg("config") = SolverConfig{});
    mod.def("load_trace", &io::read_trace_file, py::arg("path"));

    auto diag = mod.def_submodule("diagnostics");
    diag.def(
        "fejer",
        [](const SolverTrace& t, const Vector& x_tilde) {
            const auto r = diagnostics::check_fejer(t, x_tilde);
            py::dict d;
            d["all_hold"] = r.all_hold;
            d["min_slack"] = r.min_slack;
            d["delta_sum"] = r.delta_sum;
            return d;
        },
        py::arg("trace"), py::arg("x_tilde"));
    diag.def(
        "rate",
        [](const SolverTrace& t, const ProblemInstance& p) {
            const auto r = diagnostics::check_rate(t, p);
            py::dict d;
            d["ratios"] = r.ratios;
            d["bound"] = r.bound;
            d["holds_fraction"] = r.holds_fraction;
            d["geometric_mean"] = r.geometric_mean;
            return d;
        },
        py::arg("trace"), py::arg("problem"));
    diag.def(
        "summability",
        [](const SolverTrace& t, double beta, const Vector& y_hat) {
            const auto r = diagnostics::check_summability(t, beta, y_hat);
            py::dict d;
            d["partial_sum"] = r.partial_sum;
            d["bounds"] = r.bounds;
            d["holds"] = r.holds;
            return d;
        },
        py::arg("trace"), py::arg("beta"), py::arg("y_hat"));
    diag.def(
        "armijo", [](const SolverTrace& t, const ProblemInstance& p) { return diagnostics::check_armijo(t, p).holds; },
        py::arg("trace"), py::arg("problem"));
    diag.def(
        "gradients",
        [](const ProblemInstance& p, const std::vector<Vector>& points) {
            return diagnostics::check_gradients(p, points).max_relative_error;
        },
        py::arg("problem"), py::arg("points"));
    diag.def(
        "oracle",
        [](const ProblemInstance& p, const Vector& x, double radius, double resolution) {
            const auto r = diagnostics::brute_force_subproblem(p, x, radius, resolution);
            return py::make_tuple(r.direction, r.theta);
        },
        py::arg("problem"), py::arg("x"), py::arg("radius") = 0.0, py::arg("resolution") = 1e-3);

    mod.def(
        "cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = cli::run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
