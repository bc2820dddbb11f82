#include "owrc/line_search.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace owrc {

Vector phi_star(const RobustEvaluation& evaluation, const Vector& direction) {
    if (direction.size() != evaluation.x.size()) {
        throw std::invalid_argument("direction has dimension " + std::to_string(direction.size()) +
                                    ", evaluation point has " + std::to_string(evaluation.x.size()));
    }
    const std::size_t m = evaluation.num_objectives();
    const std::size_t p = evaluation.num_scenarios();
    Vector out(static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < p; ++i) {
            const double model = evaluation.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) +
                                 evaluation.gradients[j][i].dot(direction);
            best = std::max(best, model);
        }
        out(static_cast<Eigen::Index>(j)) = best - evaluation.phi(static_cast<Eigen::Index>(j));
    }
    return out;
}

LineSearchResult armijo_search(const ProblemInstance& problem, const RobustEvaluation& evaluation,
                               const Vector& direction, double beta, int r_max) {
    if (!(beta > 0.0 && beta < 1.0)) {
        throw std::invalid_argument("Armijo constant beta must lie in (0, 1)");
    }
    if (r_max < 1) {
        throw std::invalid_argument("r_max must be at least 1");
    }
    if (direction.size() == 0 || direction.isZero(0.0)) {
        throw std::invalid_argument("line search needs a nonzero descent direction");
    }
    LineSearchResult result;
    result.phi_star = phi_star(evaluation, direction);
    const Vector& phi = evaluation.phi;

    Vector residual;
    double alpha = 1.0;
    for (int r = 1; r <= r_max; ++r) {
        alpha *= 0.5;
        const Vector trial = evaluation.x + alpha * direction;
        const Vector phi_trial = evaluate_phi(problem, trial);
        residual = phi_trial - phi - alpha * beta * result.phi_star;
        if ((residual.array() <= 0.0).all()) {
            result.alpha = alpha;
            result.r = r;
            result.trials = r;
            result.phi_new = phi_trial;
            return result;
        }
    }
    std::ostringstream msg;
    msg << "no step in {2^-1, ..., 2^-" << r_max << "} satisfies the sufficient-decrease test; residuals at 2^-"
        << r_max << ": [";
    for (Eigen::Index j = 0; j < residual.size(); ++j) {
        msg << (j ? ", " : "") << residual(j);
    }
    msg << "]";
    throw LineSearchError(msg.str(), residual);
}

LineSearchResult armijo_search(const ProblemInstance& problem, const Vector& x, const Vector& direction,
                               double beta, int r_max) {
    return armijo_search(problem, evaluate_robust(problem, x), direction, beta, r_max);
}

}  // namespace owrc
