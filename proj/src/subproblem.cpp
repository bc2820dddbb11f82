#include "owrc/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace owrc {

SubproblemData assemble(const RobustEvaluation& evaluation) {
    const std::size_t m = evaluation.num_objectives();
    const std::size_t p = evaluation.num_scenarios();
    const auto n = evaluation.x.size();
    const std::size_t K = m * p;

    SubproblemData data;
    data.gradients.resize(n, static_cast<Eigen::Index>(K));
    data.offsets.resize(static_cast<Eigen::Index>(K));
    data.index_map.reserve(K);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < p; ++i) {
            const auto l = static_cast<Eigen::Index>(j * p + i);
            data.gradients.col(l) = evaluation.gradients[j][i];
            data.offsets(l) = evaluation.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) -
                              evaluation.phi(static_cast<Eigen::Index>(j));
            data.index_map.emplace_back(j, i);
        }
    }
    return data;
}

Vector project_simplex(const Vector& v) {
    const auto K = v.size();
    if (K == 0) {
        throw std::invalid_argument("cannot project an empty vector onto the simplex");
    }
    std::vector<double> sorted(v.data(), v.data() + K);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double threshold = 0.0;
    for (Eigen::Index r = 0; r < K; ++r) {
        cumulative += sorted[static_cast<std::size_t>(r)];
        const double candidate = (cumulative - 1.0) / static_cast<double>(r + 1);
        if (sorted[static_cast<std::size_t>(r)] - candidate > 0.0) {
            threshold = candidate;
        }
    }
    Vector out = (v.array() - threshold).max(0.0).matrix();
    const double total = out.sum();
    if (total > 0.0) {
        out /= total;
    } else {
        // Only reachable through rounding when all entries collapse; pick the largest.
        Eigen::Index best = 0;
        v.maxCoeff(&best);
        out.setZero();
        out(best) = 1.0;
    }
    return out;
}

double linear_model_max(const SubproblemData& data, const Vector& t) {
    return (data.offsets + data.gradients.transpose() * t).maxCoeff();
}

double kkt_residual(const SubproblemData& data, const Vector& lambda, const Vector& direction) {
    const Vector slack = data.offsets + data.gradients.transpose() * direction;
    const double rho = slack.maxCoeff();
    double r = std::abs(lambda.sum() - 1.0);
    r = std::max(r, std::max(0.0, -lambda.minCoeff()));
    r = std::max(r, (direction + data.gradients * lambda).cwiseAbs().maxCoeff());
    // Primal feasibility a_l + g_l't <= rho holds by the choice of rho.
    r = std::max(r, (slack.array() - rho).max(0.0).maxCoeff());
    r = std::max(r, (lambda.array() * (slack.array() - rho).abs()).maxCoeff());
    return r;
}

namespace {

struct DualState {
    Vector lambda;
    Vector Glambda;   // G * lambda
    double value = 0; // a'lambda - 1/2 |G lambda|^2
};

DualState make_state(const SubproblemData& data, Vector lambda) {
    DualState s;
    s.Glambda = data.gradients * lambda;
    s.value = data.offsets.dot(lambda) - 0.5 * s.Glambda.squaredNorm();
    s.lambda = std::move(lambda);
    return s;
}

// Primal objective at t = -G lambda minus the dual value; bounds the KKT residual.
double duality_gap(const SubproblemData& data, const DualState& s) {
    const Vector t = -s.Glambda;
    const double rho = linear_model_max(data, t);
    return rho + 0.5 * t.squaredNorm() - s.value;
}

// Columns [g_l; w] for l in the support; independent columns make the face
// problem strictly convex.
Matrix lifted_columns(const SubproblemData& data, const std::vector<Eigen::Index>& support) {
    const auto n = data.gradients.rows();
    const double w = 1.0 + data.gradients.cwiseAbs().maxCoeff();
    Matrix A(n + 1, static_cast<Eigen::Index>(support.size()));
    for (std::size_t c = 0; c < support.size(); ++c) {
        A.col(static_cast<Eigen::Index>(c)).head(n) = data.gradients.col(support[c]);
        A(n, static_cast<Eigen::Index>(c)) = w;
    }
    return A;
}

// Moves lambda along d (restricted to the support) until the first
// coordinate hits zero, then drops the zero coordinates.
void step_to_boundary(DualState& state, const SubproblemData& data, std::vector<Eigen::Index>& support,
                      const Vector& d, double cap) {
    double theta = cap;
    std::size_t blocking = support.size();
    for (std::size_t c = 0; c < support.size(); ++c) {
        const double dc = d(static_cast<Eigen::Index>(c));
        if (dc < 0.0) {
            const double r = state.lambda(support[c]) / -dc;
            if (r < theta) {
                theta = r;
                blocking = c;
            }
        }
    }
    Vector lambda = state.lambda;
    for (std::size_t c = 0; c < support.size(); ++c) lambda(support[c]) += theta * d(static_cast<Eigen::Index>(c));
    if (blocking < support.size()) lambda(support[blocking]) = 0.0;
    lambda = lambda.cwiseMax(0.0);
    lambda /= lambda.sum();
    std::erase_if(support, [&](Eigen::Index l) { return lambda(l) == 0.0; });
    state = make_state(data, std::move(lambda));
}

// Finite active-set refinement on the simplex, warm-started from state.
// A dependent support is first reduced along a null direction that does not
// lower the dual value; afterwards each pass either jumps to the exact face
// optimum or stops at the face boundary, and a column with the most negative
// reduced gradient enters when the face is optimal. Accepts only iterates
// that do not lower the dual value beyond rounding.
void refine(const SubproblemData& data, DualState& state, double& gap, double target, std::size_t budget) {
    const auto K = data.offsets.size();
    std::vector<Eigen::Index> support;
    for (Eigen::Index l = 0; l < K; ++l) {
        if (state.lambda(l) > 0.0) support.push_back(l);
    }
    const double round = 1e-14 * (1.0 + std::abs(state.value));
    std::size_t steps = 0;
    while (gap > target && steps++ < budget) {
        const Vector grad = data.gradients.transpose() * state.Glambda - data.offsets;  // of -dual
        const Matrix A = lifted_columns(data, support);
        Eigen::FullPivLU<Matrix> lu(A);
        lu.setThreshold(1e-12);
        DualState next = state;
        auto next_support = support;
        if (lu.rank() < A.cols()) {
            Vector d = lu.kernel().col(0);
            // Along a null direction G lambda is fixed and the objective is linear.
            double slope = 0.0;
            for (std::size_t c = 0; c < support.size(); ++c) slope += grad(support[c]) * d(static_cast<Eigen::Index>(c));
            if (slope > 0.0) d = -d;
            step_to_boundary(next, data, next_support, d, std::numeric_limits<double>::infinity());
        } else {
            const auto s = A.cols();
            Matrix kkt = Matrix::Zero(s + 1, s + 1);
            Vector as(s);
            for (Eigen::Index c = 0; c < s; ++c) {
                as(c) = data.offsets(support[static_cast<std::size_t>(c)]);
                for (Eigen::Index r = 0; r < s; ++r) {
                    kkt(r, c) = data.gradients.col(support[static_cast<std::size_t>(r)])
                                    .dot(data.gradients.col(support[static_cast<std::size_t>(c)]));
                }
            }
            kkt.topRightCorner(s, 1).setOnes();
            kkt.bottomLeftCorner(1, s).setOnes();
            Vector rhs(s + 1);
            rhs.head(s) = as;
            rhs(s) = 1.0;
            const Vector mu = kkt.fullPivLu().solve(rhs).head(s);
            if (!mu.allFinite()) break;
            if (mu.minCoeff() > 0.0) {
                Vector lambda = Vector::Zero(K);
                for (Eigen::Index c = 0; c < s; ++c) lambda(support[static_cast<std::size_t>(c)]) = mu(c);
                next = make_state(data, lambda / lambda.sum());
                // Face optimal: the column with the most negative reduced gradient enters.
                const Vector g2 = data.gradients.transpose() * next.Glambda - data.offsets;
                Eigen::Index best = -1;
                for (Eigen::Index l = 0; l < K; ++l) {
                    if (next.lambda(l) == 0.0 && (best < 0 || g2(l) < g2(best))) best = l;
                }
                if (best >= 0 && g2(best) < next.lambda.dot(g2)) {
                    next_support.push_back(best);
                    std::sort(next_support.begin(), next_support.end());
                } else if (next.value >= state.value - round) {
                    state = std::move(next);
                    gap = duality_gap(data, state);
                    break;
                }
            } else {
                Vector d(s);
                for (Eigen::Index c = 0; c < s; ++c) d(c) = mu(c) - state.lambda(support[static_cast<std::size_t>(c)]);
                step_to_boundary(next, data, next_support, d, 1.0);
            }
        }
        if (next.value < state.value - round) break;
        const double next_gap = duality_gap(data, next);
        state = std::move(next);
        support = std::move(next_support);
        gap = next_gap;
    }
}

}  // namespace

SubproblemSolution solve_dual(const SubproblemData& data, const DualSolverOptions& options) {
    if (!(options.tol > 0.0)) {
        throw std::invalid_argument("subproblem tolerance must be positive");
    }
    const auto K = data.offsets.size();
    const auto n = data.gradients.rows();
    if (K == 0) {
        throw std::invalid_argument("subproblem has no constraints");
    }
    const std::size_t max_iter = options.max_iter > 0
                                     ? options.max_iter
                                     : 10 * static_cast<std::size_t>(K) * static_cast<std::size_t>(n) + 1000;

    SubproblemSolution sol;
    DualState state = make_state(data, Vector::Constant(K, 1.0 / static_cast<double>(K)));
    sol.dual_history.push_back(state.value);
    double gap = duality_gap(data, state);

    // Curvature bound for the first step: |G'G|_2 <= |G|_F^2.
    const double lipschitz = data.gradients.squaredNorm();
    double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;
    constexpr std::size_t kRefineEvery = 25;

    std::size_t it = 0;
    while (gap > 0.01 * options.tol && it < max_iter) {
        ++it;
        const Vector grad = data.gradients.transpose() * state.Glambda - data.offsets;  // of -dual
        const Vector target = project_simplex(state.lambda - step * grad);
        const Vector d = target - state.lambda;
        if (d.lpNorm<Eigen::Infinity>() == 0.0) {
            break;
        }
        const Vector Gd = data.gradients * d;
        const double slope = grad.dot(d);  // directional derivative of -dual, <= 0
        const double curvature = Gd.squaredNorm();
        if (slope >= 0.0) {
            break;
        }
        const double tau = curvature > 0.0 ? std::min(1.0, -slope / curvature) : 1.0;
        DualState next;
        next.lambda = state.lambda + tau * d;
        next.Glambda = state.Glambda + tau * Gd;
        next.value = data.offsets.dot(next.lambda) - 0.5 * next.Glambda.squaredNorm();
        if (next.value < state.value) {
            break;  // no further progress representable in floating point
        }
        // Barzilai-Borwein step from the accepted displacement.
        const double ss = (tau * d).squaredNorm();
        const double sy = tau * tau * curvature;
        step = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : 1e12;

        state = std::move(next);
        // Re-anchor G lambda periodically to avoid drift from the incremental update.
        if (it % 64 == 0) {
            state = make_state(data, state.lambda);
        }
        gap = duality_gap(data, state);
        if (it % kRefineEvery == 0 && gap > 0.01 * options.tol) {
            refine(data, state, gap, 0.01 * options.tol, max_iter);
        }
        sol.dual_history.push_back(state.value);
    }
    state = make_state(data, state.lambda);
    gap = duality_gap(data, state);
    if (gap > 0.01 * options.tol) {
        refine(data, state, gap, 0.01 * options.tol, max_iter);
        sol.dual_history.push_back(state.value);
    }

    sol.lambda = state.lambda;
    sol.direction = -state.Glambda;
    sol.rho = linear_model_max(data, sol.direction);
    sol.theta = sol.rho + 0.5 * sol.direction.squaredNorm();
    sol.dual_value = state.value;
    sol.kkt_residual = kkt_residual(data, sol.lambda, sol.direction);
    sol.iterations = it;
    sol.certified = sol.kkt_residual <= options.tol;
    return sol;
}

SubproblemSolution solve_subproblem(const RobustEvaluation& evaluation, const DualSolverOptions& options) {
    return solve_dual(assemble(evaluation), options);
}

SubproblemSolution solve_subproblem(const ProblemInstance& problem, const Vector& x,
                                    const DualSolverOptions& options, std::optional<double> active_tol) {
    return solve_subproblem(evaluate_robust(problem, x, active_tol), options);
}

}  // namespace owrc
