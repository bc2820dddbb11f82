#pragma once

#include "owrc/problem.hpp"

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace owrc {

/// Linear model data of the direction-finding problem at a point x.
///
/// Column l of `gradients` is grad f_j(x, xi_i) and offsets(l) = f_j(x, xi_i) - Phi_j(x),
/// with l = j * p + i (j-major, i-minor). All m*p pairs are included.
struct SubproblemData {
    Matrix gradients;  ///< n x K
    Vector offsets;    ///< K, all <= 0 up to rounding
    std::vector<std::pair<std::size_t, std::size_t>> index_map;  ///< l -> (j, i)

    std::size_t size() const noexcept { return static_cast<std::size_t>(offsets.size()); }
};

struct SubproblemSolution {
    Vector direction;        ///< t(x) = -G lambda
    double theta = 0.0;      ///< rho + 1/2 |t|^2, recomputed from t
    Vector lambda;           ///< multipliers on the unit simplex
    double rho = 0.0;        ///< max_l (a_l + g_l't)
    double kkt_residual = 0.0;
    double dual_value = 0.0; ///< a'lambda - 1/2 |G lambda|^2
    std::size_t iterations = 0;
    bool certified = false;  ///< kkt_residual <= tol
    /// Dual objective after each accepted iterate (first entry is the start).
    std::vector<double> dual_history;
};

struct DualSolverOptions {
    double tol = 1e-8;
    /// 0 selects the default 10*K*n + 1000.
    std::size_t max_iter = 0;
};

SubproblemData assemble(const RobustEvaluation& evaluation);

/// Euclidean projection onto {lambda >= 0, sum lambda = 1}.
Vector project_simplex(const Vector& v);

/// Max-norm KKT violation of (t, lambda) for the epigraph form of the
/// direction problem, with rho := max_l (a_l + g_l't).
double kkt_residual(const SubproblemData& data, const Vector& lambda, const Vector& direction);

/// Solves min_{lambda in simplex} 1/2 |G lambda|^2 - a'lambda by projected
/// gradient with Barzilai-Borwein steps, monotone safeguard and a final
/// face polish. Never throws on non-convergence: the result is flagged
/// `certified = false` instead.
SubproblemSolution solve_dual(const SubproblemData& data, const DualSolverOptions& options = {});

SubproblemSolution solve_subproblem(const RobustEvaluation& evaluation,
                                    const DualSolverOptions& options = {});

SubproblemSolution solve_subproblem(const ProblemInstance& problem, const Vector& x,
                                    const DualSolverOptions& options = {},
                                    std::optional<double> active_tol = std::nullopt);

/// theta_x(t) = max_l (a_l + g_l't) for the data's linear model.
double linear_model_max(const SubproblemData& data, const Vector& t);

}  // namespace owrc
