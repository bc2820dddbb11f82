#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace owrc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when an objective returns a non-finite value or gradient.
class EvaluationError : public std::runtime_error {
public:
    EvaluationError(const std::string& what, std::size_t objective, std::size_t scenario)
        : std::runtime_error(what), objective_(objective), scenario_(scenario) {}

    /// 0-based objective index j.
    std::size_t objective() const noexcept { return objective_; }
    /// 0-based scenario index i.
    std::size_t scenario() const noexcept { return scenario_; }

private:
    std::size_t objective_;
    std::size_t scenario_;
};

class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Finite uncertainty set: p scenario vectors of a common dimension k (k may be 0).
class ScenarioSet {
public:
    ScenarioSet() = default;
    explicit ScenarioSet(std::vector<Vector> scenarios);

    std::size_t size() const noexcept { return scenarios_.size(); }
    std::size_t dimension() const noexcept { return dimension_; }
    const Vector& operator[](std::size_t i) const { return scenarios_[i]; }
    const std::vector<Vector>& scenarios() const noexcept { return scenarios_; }

private:
    std::vector<Vector> scenarios_;
    std::size_t dimension_ = 0;
};

struct ValueGradient {
    double value = 0.0;
    Vector gradient;
};

/// f_j(x, xi) together with its gradient in x. Must be deterministic.
using ObjectiveEvaluator = std::function<ValueGradient(const Vector& x, const Vector& scenario)>;

/// An uncertain multiobjective problem over a finite scenario set.
///
/// Immutable after construction; safe to share between threads as long as the
/// evaluators themselves are re-entrant (all evaluators built by this library are).
class ProblemInstance {
public:
    ProblemInstance(std::string name, std::size_t n, ScenarioSet scenarios,
                    std::vector<ObjectiveEvaluator> objectives);

    const std::string& name() const noexcept { return name_; }
    const std::string& description() const noexcept { return description_; }
    std::size_t dimension() const noexcept { return n_; }
    std::size_t num_objectives() const noexcept { return objectives_.size(); }
    std::size_t num_scenarios() const noexcept { return scenarios_.size(); }
    const ScenarioSet& scenarios() const noexcept { return scenarios_; }
    const ObjectiveEvaluator& objective(std::size_t j) const { return objectives_.at(j); }

    /// Raw f_j(x, xi_i) evaluation; throws EvaluationError on non-finite output.
    ValueGradient evaluate(std::size_t j, std::size_t i, const Vector& x) const;

    /// Upper bound gamma on every per-scenario gradient Lipschitz constant.
    const std::optional<double>& smoothness_constant() const noexcept { return gamma_; }
    /// Common strong-convexity modulus mu of every f_j(., xi_i).
    const std::optional<double>& strong_convexity_modulus() const noexcept { return mu_; }
    /// A known robust minimizer / critical point, if one is available.
    const std::optional<Vector>& known_solution() const noexcept { return solution_; }

    ProblemInstance& set_description(std::string text);
    ProblemInstance& set_smoothness_constant(double gamma);
    ProblemInstance& set_strong_convexity_modulus(double mu);
    ProblemInstance& set_known_solution(Vector x);

private:
    std::string name_;
    std::string description_;
    std::size_t n_;
    ScenarioSet scenarios_;
    std::vector<ObjectiveEvaluator> objectives_;
    std::optional<double> gamma_;
    std::optional<double> mu_;
    std::optional<Vector> solution_;
};

/// Phi(x), the per-(j,i) values and gradients, and the active index sets I_j(x).
struct RobustEvaluation {
    Vector x;
    Matrix values;                              ///< m x p, values(j, i) = f_j(x, xi_i)
    std::vector<std::vector<Vector>> gradients; ///< gradients[j][i]
    Vector phi;                                 ///< Phi_j(x) = max_i values(j, i)
    std::vector<std::vector<std::size_t>> active_sets; ///< I_j(x), 0-based scenario indices
    std::vector<double> active_tolerance;       ///< tolerance actually used for each j

    std::size_t num_objectives() const noexcept { return static_cast<std::size_t>(values.rows()); }
    std::size_t num_scenarios() const noexcept { return static_cast<std::size_t>(values.cols()); }

    bool operator==(const RobustEvaluation& other) const;
};

/// Default relative active-set tolerance: 1e-10 * (1 + |Phi_j|).
inline constexpr double kDefaultActiveRelTol = 1e-10;

/// Evaluates the worst-case objective vector at x.
///
/// With `active_tol` unset the tolerance for objective j is
/// kDefaultActiveRelTol * (1 + |Phi_j(x)|); otherwise the given absolute value is
/// used for every j. Ties are all kept in the active set.
RobustEvaluation evaluate_robust(const ProblemInstance& problem, const Vector& x,
                                 std::optional<double> active_tol = std::nullopt);

/// Evaluates only Phi(x); cheaper than evaluate_robust when gradients are not needed.
Vector evaluate_phi(const ProblemInstance& problem, const Vector& x);

/// Coefficients of the quadratic family f_j(x, xi_i) = 1/2 x'Qx + b'x + c.
/// Indexed [j][i].
struct QuadraticCoefficients {
    std::vector<std::vector<Matrix>> Q;
    std::vector<std::vector<Vector>> b;
    std::vector<std::vector<double>> c;
};

struct QuadraticOptions {
    std::string name = "quadratic";
    /// Set gamma to the largest eigenvalue magnitude over all Q_ij.
    bool compute_smoothness = true;
    /// Set mu to the smallest eigenvalue when every Q_ij is positive definite.
    bool compute_strong_convexity = true;
};

/// Builds a problem from the quadratic family. Scenario i carries the
/// coefficients of every objective as its parameter vector.
ProblemInstance make_quadratic_problem(const QuadraticCoefficients& coeffs,
                                       const QuadraticOptions& options = {});

struct BuiltinEntry {
    std::string name;
    std::string description;
};

/// Names and one-line descriptions in registry order.
std::vector<BuiltinEntry> builtin_problem_list();

/// Looks up a builtin by name; throws NotFoundError for unknown names.
ProblemInstance builtin_problem(const std::string& name);

}  // namespace owrc
