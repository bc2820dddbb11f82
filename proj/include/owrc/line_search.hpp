#pragma once

#include "owrc/problem.hpp"

#include <stdexcept>
#include <string>

namespace owrc {

struct LineSearchResult {
    double alpha = 0.0;       ///< accepted step, 2^-r
    int r = 0;
    int trials = 0;
    Vector phi_star;          ///< Phi*_j(x, t)
    Vector phi_new;           ///< Phi(x + alpha t)
};

/// No step in {2^-1, ..., 2^-r_max} satisfied the sufficient-decrease test.
class LineSearchError : public std::runtime_error {
public:
    LineSearchError(const std::string& what, Vector residuals)
        : std::runtime_error(what), residuals_(std::move(residuals)) {}

    /// Phi_j(x + alpha t) - Phi_j(x) - alpha beta Phi*_j at the smallest step tried.
    const Vector& residuals() const noexcept { return residuals_; }

private:
    Vector residuals_;
};

inline constexpr double kDefaultArmijoBeta = 0.1;
inline constexpr int kDefaultMaxHalvings = 60;

/// Phi*_j(x, t) = max_i (f_j(x, xi_i) + grad f_j(x, xi_i)'t) - Phi_j(x).
Vector phi_star(const RobustEvaluation& evaluation, const Vector& direction);

/// Largest alpha in {1/2, 1/4, ...} with Phi_j(x + alpha t) <= Phi_j(x) + alpha beta Phi*_j
/// for every j. Rejects t = 0 and beta outside (0, 1) with std::invalid_argument.
LineSearchResult armijo_search(const ProblemInstance& problem, const RobustEvaluation& evaluation,
                               const Vector& direction, double beta = kDefaultArmijoBeta,
                               int r_max = kDefaultMaxHalvings);

LineSearchResult armijo_search(const ProblemInstance& problem, const Vector& x,
                               const Vector& direction, double beta = kDefaultArmijoBeta,
                               int r_max = kDefaultMaxHalvings);

}  // namespace owrc
