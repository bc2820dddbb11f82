#include "owrc/cli.hpp"

#include "owrc/diagnostics.hpp"
#include "owrc/io.hpp"
#include "owrc/problem.hpp"
#include "owrc/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

namespace owrc::cli {

namespace {

using nlohmann::json;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::string vector_text(const Vector& v) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += io::format_double(v(i));
    }
    return out + "]";
}

Vector parse_vector(const std::string& text, const std::string& what) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item.empty()) continue;
        char* end = nullptr;
        const double d = std::strtod(item.c_str(), &end);
        if (end != item.c_str() + item.size()) throw InputError("malformed number '" + item + "' in " + what);
        values.push_back(d);
    }
    Vector v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
    return v;
}

// "@path" reads the vector from a file, anything else is a comma list.
Vector read_vector_arg(const std::string& text, const std::string& what) {
    if (!text.empty() && text[0] == '@') {
        std::ifstream in(text.substr(1));
        if (!in) throw InputError("cannot open " + text.substr(1));
        std::stringstream ss;
        ss << in.rdbuf();
        std::string content = ss.str();
        std::replace_if(content.begin(), content.end(), [](char c) { return c == '\n' || c == ' '; }, ',');
        return parse_vector(content, what);
    }
    return parse_vector(text, what);
}

ProblemInstance load_problem(const std::string& spec) {
    if (std::filesystem::exists(spec)) {
        try {
            return io::build_problem(io::read_problem_file(spec));
        } catch (const io::FormatError& e) {
            throw InputError(e.what());
        } catch (const std::invalid_argument& e) {
            throw InputError(spec + ": " + e.what());
        }
    }
    try {
        return builtin_problem(spec);
    } catch (const NotFoundError&) {
        throw InputError("problem '" + spec + "' is neither a readable file nor a builtin name");
    }
}

// Accepts a plain number or a multiple of 1/gamma written "c/gamma".
double parse_alpha(const std::string& text, const ProblemInstance& problem) {
    const auto slash = text.find('/');
    if (slash != std::string::npos && (text.substr(slash + 1) == "gamma" || text.substr(slash + 1) == "\u03b3")) {
        if (!problem.smoothness_constant()) throw InputError("--alpha uses gamma but the problem declares none");
        char* end = nullptr;
        const std::string head = text.substr(0, slash);
        const double c = std::strtod(head.c_str(), &end);
        if (head.empty() || end != head.c_str() + head.size()) throw InputError("malformed --alpha '" + text + "'");
        return c / *problem.smoothness_constant();
    }
    char* end = nullptr;
    const double a = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size()) throw InputError("malformed --alpha '" + text + "'");
    return a;
}

int exit_code_for(Termination t) {
    switch (t) {
        case Termination::Converged: return kOk;
        case Termination::MaxIterations: return kIterationCap;
        default: return kSolverFailure;
    }
}

struct RunOptions {
    std::string problem;
    std::string x0;
    double eps = 1e-8;
    double beta = kDefaultArmijoBeta;
    std::string mode = "armijo";
    std::string alpha;
    std::size_t max_iters = 10000;
    std::string out;
    std::string plot_data;
    std::size_t batch = 0;
    unsigned seed = 1;
    bool quiet = false;
};

void summarize(std::ostream& out, const SolverTrace& trace) {
    out << "termination: " << to_string(trace.termination) << "\n";
    if (trace.records.empty()) {
        out << "message: " << trace.message << "\n";
        return;
    }
    const auto& last = trace.records.back();
    out << "iterations: " << trace.records.size() - 1 << "\n";
    out << "final x: " << vector_text(trace.final_x) << "\n";
    out << "Phi: " << vector_text(last.phi) << "\n";
    out << "Theta: " << io::format_double(last.theta) << "\n";
    if (!trace.message.empty()) out << "message: " << trace.message << "\n";
}

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
    const ProblemInstance problem = load_problem(opt.problem);
    SolverConfig config;
    config.epsilon = opt.eps;
    config.beta = opt.beta;
    config.max_iterations = opt.max_iters;
    try {
        config.step_mode = step_mode_from_string(opt.mode);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    if (config.step_mode == StepMode::Constant) {
        config.constant_alpha = opt.alpha.empty() ? (problem.smoothness_constant()
                                                         ? 1.0 / *problem.smoothness_constant()
                                                         : throw InputError("constant mode needs --alpha or gamma"))
                                                  : parse_alpha(opt.alpha, problem);
    }
    try {
        validate(config, problem);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }

    if (opt.batch > 0) {
        std::mt19937_64 rng(opt.seed);
        std::uniform_real_distribution<double> dist(-5.0, 5.0);
        std::vector<Vector> starts(opt.batch, Vector(static_cast<Eigen::Index>(problem.dimension())));
        for (auto& s : starts) {
            for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = dist(rng);
        }
        const auto results = run_batch({&problem}, starts, config);
        int worst = kOk;
        for (std::size_t b = 0; b < results.size(); ++b) {
            const auto& item = results[b];
            if (!item.trace) {
                err << "start " << b << ": " << item.error << "\n";
                worst = std::max(worst, static_cast<int>(kInputError));
                continue;
            }
            out << "start " << b << " " << vector_text(starts[b]) << ": " << to_string(item.trace->termination)
                << ", final x " << vector_text(item.trace->final_x) << "\n";
            if (!opt.out.empty() && !item.trace->records.empty()) io::write_trace_file(opt.out + "." + std::to_string(b), *item.trace);
            worst = std::max(worst, exit_code_for(item.trace->termination));
        }
        return worst;
    }

    Vector x0 = opt.x0.empty() ? Vector::Zero(static_cast<Eigen::Index>(problem.dimension()))
                               : read_vector_arg(opt.x0, "--x0");
    if (static_cast<std::size_t>(x0.size()) != problem.dimension()) {
        throw InputError("--x0 has " + std::to_string(x0.size()) + " entries, problem has n = " +
                         std::to_string(problem.dimension()));
    }
    const SolverTrace trace = run(problem, x0, config);
    if (!opt.out.empty() && !trace.records.empty()) {
        try {
            io::write_trace_file(opt.out, trace);
        } catch (const io::FormatError& e) {
            throw InputError(e.what());
        }
    }
    if (!opt.plot_data.empty() && !trace.records.empty()) {
        std::ofstream plot(opt.plot_data);
        if (!plot) throw InputError("cannot write " + opt.plot_data);
        io::write_plot_data(plot, trace, problem.known_solution());
    }
    if (!opt.quiet) summarize(out, trace);
    return exit_code_for(trace.termination);
}

struct CheckOptions {
    std::string which;
    std::string trace;
    std::string problem;
    std::string x_tilde;
    std::string y_hat;
    double resolution = 1e-3;
    std::size_t samples = 5;
};

int cmd_check(const CheckOptions& opt, std::ostream& out) {
    SolverTrace trace;
    try {
        trace = io::read_trace_file(opt.trace);
    } catch (const io::FormatError& e) {
        throw InputError(e.what());
    }
    const ProblemInstance problem = load_problem(opt.problem);
    if (static_cast<std::size_t>(trace.final_x.size()) != problem.dimension() ||
        static_cast<std::size_t>(trace.records.front().phi.size()) != problem.num_objectives()) {
        throw InputError("trace and problem dimensions do not match");
    }

    json report;
    report["check"] = opt.which;
    report["trace"] = opt.trace;
    report["problem"] = problem.name();
    bool pass = false;
    try {
        if (opt.which == "fejer") {
            Vector x_tilde;
            if (!opt.x_tilde.empty()) {
                x_tilde = read_vector_arg(opt.x_tilde, "--x-tilde");
            } else if (problem.known_solution()) {
                x_tilde = *problem.known_solution();
            } else {
                throw InputError("fejer check needs --x-tilde or a problem with known_solution");
            }
            const auto r = diagnostics::check_fejer(trace, x_tilde);
            report["reference_point"] = to_json(r.reference_point);
            report["min_slack"] = r.min_slack;
            report["delta_sum"] = r.delta_sum;
            report["steps"] = r.per_k.size();
            report["all_hold"] = r.all_hold;
            pass = r.all_hold;
        } else if (opt.which == "rate") {
            const auto r = diagnostics::check_rate(trace, problem);
            report["alpha"] = r.alpha;
            report["mu"] = r.mu;
            report["bound"] = r.bound;
            report["ratios"] = r.ratios.size();
            report["holds_fraction"] = r.holds_fraction;
            report["geometric_mean"] = r.geometric_mean;
            pass = r.holds_fraction >= 0.95 && r.geometric_mean <= r.bound + 1e-6;
        } else if (opt.which == "summability") {
            Vector y_hat;
            if (!opt.y_hat.empty()) {
                y_hat = read_vector_arg(opt.y_hat, "--y-hat");
            } else if (problem.known_solution()) {
                y_hat = evaluate_phi(problem, *problem.known_solution());
            } else {
                y_hat = trace.records.front().phi;
                for (const auto& rec : trace.records) y_hat = y_hat.cwiseMin(rec.phi);
            }
            const auto r = diagnostics::check_summability(trace, trace.config.beta, y_hat);
            report["y_hat"] = to_json(r.y_hat);
            report["partial_sum"] = r.partial_sum;
            report["bounds"] = to_json(r.bounds);
            report["delta_sum"] = r.delta_sum;
            report["holds"] = r.holds;
            pass = r.holds;
        } else if (opt.which == "gradients") {
            std::vector<Vector> points;
            for (const auto& rec : trace.records) points.push_back(rec.x);
            const auto r = diagnostics::check_gradients(problem, points, 1e-6);
            report["probes"] = r.entries.size();
            report["max_relative_error"] = r.max_relative_error;
            report["worst"] = {{"point", r.worst.point},
                               {"objective", r.worst.objective + 1},
                               {"scenario", r.worst.scenario + 1}};
            pass = r.max_relative_error <= 1e-5;
        } else if (opt.which == "oracle") {
            if (problem.dimension() > 3) throw InputError("oracle limited to n <= 3");
            const std::size_t count = std::min(opt.samples, trace.records.size());
            double theta_gap = 0.0;
            double t_gap = 0.0;
            for (std::size_t s = 0; s < count; ++s) {
                const std::size_t k = count == 1 ? 0 : s * (trace.records.size() - 1) / (count - 1);
                const Vector& x = trace.records[k].x;
                const auto sol = solve_subproblem(problem, x);
                const auto grid = diagnostics::brute_force_subproblem(problem, x, 0.0, opt.resolution);
                theta_gap = std::max(theta_gap, std::abs(sol.theta - grid.theta));
                t_gap = std::max(t_gap, (sol.direction - grid.direction).lpNorm<Eigen::Infinity>());
            }
            report["points"] = count;
            report["resolution"] = opt.resolution;
            report["max_theta_gap"] = theta_gap;
            report["max_direction_gap"] = t_gap;
            pass = theta_gap <= 1e-2 && t_gap <= 5e-3;
        } else if (opt.which == "armijo") {
            const auto r = diagnostics::check_armijo(trace, problem);
            report["max_violation"] = r.max_violation;
            pass = r.holds;
        } else {
            throw InputError("unknown check '" + opt.which + "'");
        }
    } catch (const diagnostics::CheckError& e) {
        throw InputError(e.what());
    }
    report["pass"] = pass;
    out << report.dump(2) << "\n";
    return pass ? kOk : kCheckFailed;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Robust multiobjective steepest descent over finite scenario sets"};
    app.require_subcommand(1);

    RunOptions run_opt;
    auto* run_cmd = app.add_subcommand("run", "Solve a problem and write its iteration trace");
    run_cmd->add_option("problem", run_opt.problem, "Problem file or builtin name")->required();
    run_cmd->add_option("--x0", run_opt.x0, "Start point: comma list or @file (default: origin)");
    run_cmd->add_option("--eps", run_opt.eps, "Stop when |Theta| < eps")->capture_default_str();
    run_cmd->add_option("--beta", run_opt.beta, "Armijo constant in (0,1)")->capture_default_str();
    run_cmd->add_option("--mode", run_opt.mode, "Step rule")->check(CLI::IsMember({"armijo", "constant"}))
        ->capture_default_str();
    run_cmd->add_option("--alpha", run_opt.alpha, "Constant step: number or c/gamma (default 1/gamma)");
    run_cmd->add_option("--max-iters", run_opt.max_iters, "Iteration cap")->capture_default_str();
    run_cmd->add_option("--out", run_opt.out, "Trace CSV output path");
    run_cmd->add_option("--plot-data", run_opt.plot_data, "Plot-ready CSV output path");
    run_cmd->add_option("--batch", run_opt.batch, "Solve from this many random starts in [-5,5]^n");
    run_cmd->add_option("--seed", run_opt.seed, "Seed for --batch start generation")->capture_default_str();
    run_cmd->add_flag("--quiet", run_opt.quiet, "Do not print the summary");

    CheckOptions check_opt;
    auto* check_cmd = app.add_subcommand("check", "Verify a recorded trace against the convergence theory");
    check_cmd->add_option("which", check_opt.which, "fejer | rate | summability | gradients | oracle | armijo")
        ->required();
    check_cmd->add_option("trace", check_opt.trace, "Trace CSV written by run")->required();
    check_cmd->add_option("problem", check_opt.problem, "Problem file or builtin name")->required();
    check_cmd->add_option("--x-tilde", check_opt.x_tilde, "Fejer reference point (default: known_solution)");
    check_cmd->add_option("--y-hat", check_opt.y_hat, "Summability lower bound (default: Phi(known_solution))");
    check_cmd->add_option("--resolution", check_opt.resolution, "Oracle grid resolution")->capture_default_str();
    check_cmd->add_option("--samples", check_opt.samples, "Trace points compared by the oracle")
        ->capture_default_str();

    app.add_subcommand("list", "List builtin problems");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(run_opt, out, err);
        if (check_cmd->parsed()) return cmd_check(check_opt, out);
        for (const auto& entry : builtin_problem_list()) {
            out << entry.name << "\t" << entry.description << "\n";
        }
        return kOk;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
}

}  // namespace owrc::cli
