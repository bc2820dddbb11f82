#pragma once

#include "owrc/line_search.hpp"
#include "owrc/problem.hpp"
#include "owrc/subproblem.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace owrc {

enum class StepMode { Armijo, Constant };

std::string_view to_string(StepMode mode);
StepMode step_mode_from_string(std::string_view text);

struct SolverConfig {
    double epsilon = 1e-8;              ///< stop when |Theta(x^k)| < epsilon
    double beta = kDefaultArmijoBeta;
    std::size_t max_iterations = 10000;
    StepMode step_mode = StepMode::Armijo;
    double constant_alpha = 0.0;        ///< used when step_mode == Constant
    int max_halvings = kDefaultMaxHalvings;
    double subproblem_tol = 1e-8;
    std::optional<double> active_tolerance;  ///< absolute; unset -> relative default
    bool record_multipliers = false;
    /// Optional secondary stop on |t(x^k)| < direction_tolerance.
    std::optional<double> direction_tolerance;
};

/// Throws std::invalid_argument if the configuration is unusable for `problem`.
void validate(const SolverConfig& config, const ProblemInstance& problem);

struct IterationRecord {
    std::size_t k = 0;
    Vector x;
    Vector phi;
    double theta = 0.0;
    double direction_norm = 0.0;
    Vector direction;
    double alpha = 0.0;     ///< 0 on the terminal record
    std::optional<Vector> lambda;
    int line_search_trials = 0;
};

enum class Termination { Converged, MaxIterations, LineSearchFailure, SubproblemFailure };

std::string_view to_string(Termination termination);
Termination termination_from_string(std::string_view text);

struct SolverTrace {
    std::string problem_name;
    SolverConfig config;
    std::vector<IterationRecord> records;
    Termination termination = Termination::Converged;
    Vector final_x;
    std::string message;   ///< failure detail, empty on success
};

/// Steepest descent for min Phi(x): solve the direction problem, stop on
/// |Theta| < epsilon, otherwise step by Armijo backtracking or a constant
/// alpha. The last record always describes final_x and has alpha = 0.
SolverTrace run(const ProblemInstance& problem, const Vector& x0, const SolverConfig& config = {});

struct BatchItem {
    std::optional<SolverTrace> trace;
    std::string error;  ///< set when the element could not run at all
};

/// Element-wise run; results keep input order and failures stay per element.
/// `problems` may hold one entry (shared by every start) or one per start.
std::vector<BatchItem> run_batch(const std::vector<const ProblemInstance*>& problems,
                                 const std::vector<Vector>& starts, const SolverConfig& config,
                                 std::size_t threads = 0);

}  // namespace owrc
