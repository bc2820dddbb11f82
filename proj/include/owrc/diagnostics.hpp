#pragma once

#include "owrc/problem.hpp"
#include "owrc/solver.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace owrc::diagnostics {

/// Precondition failures of a check (wrong trace kind, missing data, bad input).
class CheckError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double kFejerSlackTol = 1e-10;
inline constexpr double kRateTol = 1e-8;
inline constexpr double kSummabilityTol = 1e-8;

struct FejerStep {
    double lhs = 0.0;    ///< |x~ - x^{k+1}|^2
    double rhs = 0.0;    ///< |x~ - x^k|^2 + |x^k - x^{k+1}|^2
    double slack = 0.0;  ///< rhs - lhs
};

struct FejerReport {
    Vector reference_point;
    std::vector<FejerStep> per_k;
    bool all_hold = true;
    double min_slack = 0.0;
    double delta_sum = 0.0;  ///< sum_k |x^k - x^{k+1}|^2
};

FejerReport check_fejer(const SolverTrace& trace, const Vector& x_tilde);

struct RateReport {
    Vector reference_solution;
    std::vector<double> ratios;  ///< |x^{k+1} - x*|^2 / |x^k - x*|^2
    double alpha = 0.0;
    double mu = 0.0;
    double bound = 0.0;          ///< 1 - mu alpha
    double holds_fraction = 1.0;
    double geometric_mean = 0.0; ///< 0 when ratios is empty
};

/// Contraction of the squared distance to the known solution for a
/// constant-step trace. Iterations with |x^k - x*| <= 1e-10 are skipped.
RateReport check_rate(const SolverTrace& trace, const ProblemInstance& problem);

struct OracleResult {
    Vector direction;
    double theta = 0.0;
    std::size_t evaluations = 0;
};

/// Grid minimization of theta_x(t) + 1/2 |t|^2 for n <= 3. The first level
/// covers the box of half-width `radius` (0 selects 2 (1 + max |g_l|));
/// following levels are exhaustive grids over the ball that strong convexity
/// certifies to contain the minimizer, down to `resolution`.
OracleResult brute_force_subproblem(const ProblemInstance& problem, const Vector& x,
                                    double radius, double resolution);

struct GradientEntry {
    std::size_t point = 0;
    std::size_t objective = 0;
    std::size_t scenario = 0;
    double relative_error = 0.0;
};

struct GradientReport {
    std::vector<GradientEntry> entries;
    double max_relative_error = 0.0;
    GradientEntry worst;
};

/// Central differences with step h * (1 + |x|). The relative error of one
/// entry is |g - g_fd|_inf / max(1, |g|_inf).
GradientReport check_gradients(const ProblemInstance& problem, const std::vector<Vector>& points,
                               double h = 1e-6);

struct SummabilityReport {
    Vector y_hat;
    double partial_sum = 0.0;   ///< sum_k alpha_k (|Theta_k| + |t_k|^2 / 2)
    Vector bounds;              ///< (Phi_j(x^0) - y_hat_j) / beta
    double delta_sum = 0.0;     ///< sum_k |x^{k+1} - x^k|^2
    bool holds = true;
};

SummabilityReport check_summability(const SolverTrace& trace, double beta, const Vector& y_hat);

struct ArmijoReport {
    double max_violation = 0.0;  ///< max over k, j of lhs - rhs
    bool holds = true;
};

/// Re-evaluates the sufficient-decrease test of every step of an Armijo trace.
ArmijoReport check_armijo(const SolverTrace& trace, const ProblemInstance& problem, double tol = 1e-12);

struct ConstantDescentReport {
    double max_violation = 0.0;
    bool holds = true;
};

/// Phi_j(x^{k+1}) <= Phi_j(x^k) - alpha (1 - gamma alpha / 2) |t^k|^2 + tol.
ConstantDescentReport check_constant_descent(const SolverTrace& trace, const ProblemInstance& problem,
                                             double tol = 1e-10);

}  // namespace owrc::diagnostics
