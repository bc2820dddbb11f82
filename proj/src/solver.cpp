#include "owrc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>
#include <thread>

namespace owrc {

std::string_view to_string(StepMode mode) {
    return mode == StepMode::Armijo ? "armijo" : "constant";
}

StepMode step_mode_from_string(std::string_view text) {
    if (text == "armijo") return StepMode::Armijo;
    if (text == "constant") return StepMode::Constant;
    throw std::invalid_argument("unknown step mode '" + std::string(text) + "' (expected armijo or constant)");
}

std::string_view to_string(Termination termination) {
    switch (termination) {
        case Termination::Converged: return "converged";
        case Termination::MaxIterations: return "max_iterations";
        case Termination::LineSearchFailure: return "line_search_failure";
        case Termination::SubproblemFailure: return "subproblem_failure";
    }
    return "unknown";
}

Termination termination_from_string(std::string_view text) {
    for (auto t : {Termination::Converged, Termination::MaxIterations, Termination::LineSearchFailure,
                   Termination::SubproblemFailure}) {
        if (to_string(t) == text) return t;
    }
    throw std::invalid_argument("unknown termination '" + std::string(text) + "'");
}

void validate(const SolverConfig& config, const ProblemInstance& problem) {
    if (!(config.epsilon > 0.0)) {
        throw std::invalid_argument("epsilon must be positive");
    }
    if (!(config.beta > 0.0 && config.beta < 1.0)) {
        throw std::invalid_argument("beta must lie in (0, 1)");
    }
    if (!(config.subproblem_tol > 0.0)) {
        throw std::invalid_argument("subproblem tolerance must be positive");
    }
    if (config.max_halvings < 1) {
        throw std::invalid_argument("max_halvings must be at least 1");
    }
    if (config.step_mode == StepMode::Constant) {
        const auto& gamma = problem.smoothness_constant();
        if (!gamma) {
            throw std::invalid_argument("constant step mode requires a problem with a smoothness constant");
        }
        // Allow the last ulp so that alpha = 1/gamma computed elsewhere is accepted.
        const double cap = (1.0 / *gamma) * (1.0 + 4 * std::numeric_limits<double>::epsilon());
        if (!(config.constant_alpha > 0.0 && config.constant_alpha <= cap)) {
            throw std::invalid_argument("constant step alpha must lie in (0, 1/gamma]");
        }
    }
}

SolverTrace run(const ProblemInstance& problem, const Vector& x0, const SolverConfig& config) {
    if (static_cast<std::size_t>(x0.size()) != problem.dimension()) {
        throw std::invalid_argument("x0 has dimension " + std::to_string(x0.size()) + ", problem expects " +
                                    std::to_string(problem.dimension()));
    }
    validate(config, problem);

    SolverTrace trace;
    trace.problem_name = problem.name();
    trace.config = config;
    const DualSolverOptions dual_options{config.subproblem_tol, 0};

    Vector x = x0;
    for (std::size_t k = 0;; ++k) {
        IterationRecord rec;
        rec.k = k;
        rec.x = x;
        RobustEvaluation ev;
        try {
            ev = evaluate_robust(problem, x, config.active_tolerance);
        } catch (const EvaluationError& e) {
            trace.termination = Termination::SubproblemFailure;
            trace.message = e.what();
            break;
        }
        rec.phi = ev.phi;

        const SubproblemSolution sub = solve_subproblem(ev, dual_options);
        rec.theta = sub.theta;
        rec.direction = sub.direction;
        rec.direction_norm = sub.direction.norm();
        if (config.record_multipliers) {
            rec.lambda = sub.lambda;
        }

        auto finish = [&](Termination why, std::string message = {}) {
            trace.records.push_back(std::move(rec));
            trace.termination = why;
            trace.message = std::move(message);
        };

        if (!sub.certified) {
            finish(Termination::SubproblemFailure,
                   "direction subproblem not certified (KKT residual " + std::to_string(sub.kkt_residual) + ")");
            break;
        }
        if (std::abs(sub.theta) < config.epsilon ||
            (config.direction_tolerance && rec.direction_norm < *config.direction_tolerance)) {
            finish(Termination::Converged);
            break;
        }
        if (k >= config.max_iterations) {
            finish(Termination::MaxIterations);
            break;
        }

        if (config.step_mode == StepMode::Constant) {
            rec.alpha = config.constant_alpha;
            rec.line_search_trials = 0;
        } else {
            try {
                if (rec.direction_norm == 0.0) {
                    throw LineSearchError("zero direction at a noncritical point", Vector());
                }
                const LineSearchResult ls = armijo_search(problem, ev, sub.direction, config.beta,
                                                          config.max_halvings);
                rec.alpha = ls.alpha;
                rec.line_search_trials = ls.trials;
            } catch (const LineSearchError& e) {
                finish(Termination::LineSearchFailure, e.what());
                break;
            } catch (const EvaluationError& e) {
                finish(Termination::LineSearchFailure, e.what());
                break;
            }
        }
        x = x + rec.alpha * sub.direction;
        trace.records.push_back(std::move(rec));
    }
    trace.final_x = x;
    return trace;
}

std::vector<BatchItem> run_batch(const std::vector<const ProblemInstance*>& problems,
                                 const std::vector<Vector>& starts, const SolverConfig& config,
                                 std::size_t threads) {
    if (problems.size() != 1 && problems.size() != starts.size()) {
        throw std::invalid_argument("run_batch needs one problem or one problem per start");
    }
    std::vector<BatchItem> results(starts.size());
    auto work = [&](std::size_t idx) {
        const ProblemInstance* problem = problems.size() == 1 ? problems[0] : problems[idx];
        try {
            if (problem == nullptr) {
                throw std::invalid_argument("null problem");
            }
            results[idx].trace = run(*problem, starts[idx], config);
        } catch (const std::exception& e) {
            results[idx].error = e.what();
        }
    };

    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = std::min(threads, starts.size());
    if (threads <= 1) {
        for (std::size_t idx = 0; idx < starts.size(); ++idx) work(idx);
        return results;
    }
    std::vector<std::future<void>> workers;
    for (std::size_t w = 0; w < threads; ++w) {
        workers.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t idx = w; idx < starts.size(); idx += threads) work(idx);
        }));
    }
    for (auto& f : workers) f.get();
    return results;
}

}  // namespace owrc
