#include "owrc/diagnostics.hpp"

#include "owrc/line_search.hpp"
#include "owrc/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace owrc::diagnostics {

FejerReport check_fejer(const SolverTrace& trace, const Vector& x_tilde) {
    if (trace.records.size() < 2) {
        throw CheckError("Fejer check needs a trace with at least 2 records");
    }
    if (x_tilde.size() != trace.records.front().x.size()) {
        throw CheckError("reference point has the wrong dimension");
    }
    FejerReport report;
    report.reference_point = x_tilde;
    report.min_slack = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
        const Vector& xk = trace.records[k].x;
        const Vector& xk1 = trace.records[k + 1].x;
        FejerStep step;
        const double move = (xk - xk1).squaredNorm();
        step.lhs = (x_tilde - xk1).squaredNorm();
        step.rhs = (x_tilde - xk).squaredNorm() + move;
        step.slack = step.rhs - step.lhs;
        report.delta_sum += move;
        report.min_slack = std::min(report.min_slack, step.slack);
        if (step.slack < -kFejerSlackTol) report.all_hold = false;
        report.per_k.push_back(step);
    }
    return report;
}

RateReport check_rate(const SolverTrace& trace, const ProblemInstance& problem) {
    if (trace.config.step_mode != StepMode::Constant) {
        throw CheckError("rate check requires constant-step trace");
    }
    if (!problem.strong_convexity_modulus()) {
        throw CheckError("rate check requires a strong convexity modulus mu");
    }
    if (!problem.known_solution()) {
        throw CheckError("rate check requires a known solution x*");
    }
    if (!problem.smoothness_constant()) {
        throw CheckError("rate check requires a smoothness constant gamma");
    }
    const double alpha = trace.config.constant_alpha;
    const double cap = (1.0 / *problem.smoothness_constant()) * (1.0 + 4 * std::numeric_limits<double>::epsilon());
    if (!(alpha > 0.0 && alpha <= cap)) {
        throw CheckError("rate check requires 0 < alpha <= 1/gamma");
    }

    RateReport report;
    report.reference_solution = *problem.known_solution();
    report.alpha = alpha;
    report.mu = *problem.strong_convexity_modulus();
    report.bound = 1.0 - report.mu * alpha;

    const Vector& xs = report.reference_solution;
    std::size_t holds = 0;
    double log_sum = 0.0;
    bool has_zero = false;
    for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
        const double before = (trace.records[k].x - xs).squaredNorm();
        if (std::sqrt(before) <= 1e-10) continue;
        const double ratio = (trace.records[k + 1].x - xs).squaredNorm() / before;
        report.ratios.push_back(ratio);
        if (ratio <= report.bound + kRateTol) ++holds;
        if (ratio == 0.0) {
            has_zero = true;
        } else {
            log_sum += std::log(ratio);
        }
    }
    if (report.ratios.empty()) {
        report.holds_fraction = 1.0;
        report.geometric_mean = 0.0;
    } else {
        report.holds_fraction = static_cast<double>(holds) / static_cast<double>(report.ratios.size());
        report.geometric_mean = has_zero ? 0.0 : std::exp(log_sum / static_cast<double>(report.ratios.size()));
    }
    return report;
}

namespace {

struct GridModel {
    const SubproblemData& data;
    mutable std::size_t evaluations = 0;

    double operator()(const Vector& t) const {
        ++evaluations;
        return linear_model_max(data, t) + 0.5 * t.squaredNorm();
    }
};

// Exhaustive scan of the grid center + spacing * {-half..half}^n.
void scan(const GridModel& model, const Vector& center, double spacing, long half, Vector& best_t, double& best_value) {
    const auto n = center.size();
    std::vector<long> idx(static_cast<std::size_t>(n), -half);
    Vector t(n);
    while (true) {
        for (Eigen::Index c = 0; c < n; ++c) {
            t(c) = center(c) + spacing * static_cast<double>(idx[static_cast<std::size_t>(c)]);
        }
        const double v = model(t);
        if (v < best_value) {
            best_value = v;
            best_t = t;
        }
        Eigen::Index c = 0;
        for (; c < n; ++c) {
            auto& i = idx[static_cast<std::size_t>(c)];
            if (++i <= half) break;
            i = -half;
        }
        if (c == n) return;
    }
}

}  // namespace

OracleResult brute_force_subproblem(const ProblemInstance& problem, const Vector& x, double radius,
                                    double resolution) {
    const std::size_t n = problem.dimension();
    if (n > 3) {
        throw CheckError("oracle limited to n <= 3");
    }
    if (!(resolution > 0.0)) {
        throw CheckError("oracle resolution must be positive");
    }
    const SubproblemData data = assemble(evaluate_robust(problem, x));
    double max_grad = 0.0;
    for (Eigen::Index l = 0; l < data.gradients.cols(); ++l) {
        max_grad = std::max(max_grad, data.gradients.col(l).norm());
    }
    if (radius <= 0.0) {
        radius = 2.0 * (1.0 + max_grad);
    }
    // Grid points per axis and level: keeps one level to ~1.6e5 model evaluations.
    const long per_axis = n == 1 ? 20001 : (n == 2 ? 401 : 55);
    const long half = (per_axis - 1) / 2;
    // Lipschitz constant of the model on the initial box.
    const double lipschitz = max_grad + radius * std::sqrt(static_cast<double>(n));
    const double root_n = std::sqrt(static_cast<double>(n));

    GridModel model{data};
    Vector best_t = Vector::Zero(static_cast<Eigen::Index>(n));
    double best_value = std::numeric_limits<double>::infinity();
    double spacing = std::max(resolution, radius / static_cast<double>(half));
    Vector center = Vector::Zero(static_cast<Eigen::Index>(n));
    long level_half = static_cast<long>(std::ceil(radius / spacing));
    while (true) {
        scan(model, center, spacing, level_half, best_t, best_value);
        if (spacing <= resolution) break;
        // The nearest grid point is within spacing*sqrt(n)/2 of t*, so
        // F(best) - F* <= L spacing sqrt(n)/2, and strong convexity (modulus 1)
        // bounds |best - t*| by sqrt(L spacing sqrt(n)).
        const double certified = std::sqrt(lipschitz * spacing * root_n) + spacing;
        double next = std::max(resolution, 2.0 * certified / static_cast<double>(per_axis - 1));
        next = std::min(next, 0.5 * spacing);
        next = std::max(next, resolution);
        center = best_t;
        spacing = next;
        level_half = std::min(static_cast<long>(std::ceil(certified / spacing)), 4 * half);
    }
    return {best_t, best_value, model.evaluations};
}

GradientReport check_gradients(const ProblemInstance& problem, const std::vector<Vector>& points, double h) {
    if (!(h > 0.0)) {
        throw CheckError("finite-difference step must be positive");
    }
    GradientReport report;
    const std::size_t n = problem.dimension();
    for (std::size_t pt = 0; pt < points.size(); ++pt) {
        const Vector& x = points[pt];
        if (static_cast<std::size_t>(x.size()) != n) {
            throw CheckError("gradient probe point has the wrong dimension");
        }
        const double step = h * (1.0 + x.norm());
        for (std::size_t j = 0; j < problem.num_objectives(); ++j) {
            for (std::size_t i = 0; i < problem.num_scenarios(); ++i) {
                const Vector g = problem.evaluate(j, i, x).gradient;
                Vector fd(static_cast<Eigen::Index>(n));
                for (std::size_t c = 0; c < n; ++c) {
                    Vector plus = x;
                    Vector minus = x;
                    plus(static_cast<Eigen::Index>(c)) += step;
                    minus(static_cast<Eigen::Index>(c)) -= step;
                    fd(static_cast<Eigen::Index>(c)) =
                        (problem.evaluate(j, i, plus).value - problem.evaluate(j, i, minus).value) / (2.0 * step);
                }
                GradientEntry entry{pt, j, i,
                                    (g - fd).lpNorm<Eigen::Infinity>() / std::max(1.0, g.lpNorm<Eigen::Infinity>())};
                if (report.entries.empty() || entry.relative_error > report.max_relative_error) {
                    report.max_relative_error = entry.relative_error;
                    report.worst = entry;
                }
                report.entries.push_back(entry);
            }
        }
    }
    return report;
}

SummabilityReport check_summability(const SolverTrace& trace, double beta, const Vector& y_hat) {
    if (trace.config.step_mode != StepMode::Armijo) {
        throw CheckError("summability check requires an Armijo-step trace");
    }
    if (!(beta > 0.0 && beta < 1.0)) {
        throw CheckError("beta must lie in (0, 1)");
    }
    if (trace.records.empty()) {
        throw CheckError("summability check needs a nonempty trace");
    }
    const Vector& phi0 = trace.records.front().phi;
    if (y_hat.size() != phi0.size()) {
        throw CheckError("y_hat has the wrong dimension");
    }
    for (const auto& rec : trace.records) {
        for (Eigen::Index j = 0; j < y_hat.size(); ++j) {
            if (y_hat(j) > rec.phi(j) + 1e-12 * (1.0 + std::abs(y_hat(j)))) {
                throw CheckError("y_hat is not a lower bound of the recorded Phi values (objective " +
                                 std::to_string(j + 1) + ", iteration " + std::to_string(rec.k) + ")");
            }
        }
    }
    SummabilityReport report;
    report.y_hat = y_hat;
    report.bounds = (phi0 - y_hat) / beta;
    for (std::size_t k = 0; k < trace.records.size(); ++k) {
        const auto& rec = trace.records[k];
        if (rec.alpha <= 0.0) continue;
        report.partial_sum += rec.alpha * (std::abs(rec.theta) + 0.5 * rec.direction_norm * rec.direction_norm);
        if (k + 1 < trace.records.size()) {
            report.delta_sum += (trace.records[k + 1].x - rec.x).squaredNorm();
        }
    }
    report.holds = report.partial_sum <= report.bounds.minCoeff() + kSummabilityTol;
    return report;
}

ArmijoReport check_armijo(const SolverTrace& trace, const ProblemInstance& problem, double tol) {
    if (trace.config.step_mode != StepMode::Armijo) {
        throw CheckError("Armijo check requires an Armijo-step trace");
    }
    ArmijoReport report;
    report.max_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
        const auto& rec = trace.records[k];
        const RobustEvaluation ev = evaluate_robust(problem, rec.x, trace.config.active_tolerance);
        const Vector star = phi_star(ev, rec.direction);
        const Vector violation = trace.records[k + 1].phi - ev.phi - rec.alpha * trace.config.beta * star;
        report.max_violation = std::max(report.max_violation, violation.maxCoeff());
    }
    report.holds = !(report.max_violation > tol);
    return report;
}

ConstantDescentReport check_constant_descent(const SolverTrace& trace, const ProblemInstance& problem, double tol) {
    if (trace.config.step_mode != StepMode::Constant) {
        throw CheckError("constant-step descent check requires constant-step trace");
    }
    if (!problem.smoothness_constant()) {
        throw CheckError("constant-step descent check requires a smoothness constant gamma");
    }
    const double gamma = *problem.smoothness_constant();
    const double alpha = trace.config.constant_alpha;
    ConstantDescentReport report;
    report.max_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
        const auto& rec = trace.records[k];
        const double decrease = alpha * (1.0 - 0.5 * gamma * alpha) * rec.direction_norm * rec.direction_norm;
        const Vector violation = trace.records[k + 1].phi - rec.phi + Vector::Constant(rec.phi.size(), decrease);
        report.max_violation = std::max(report.max_violation, violation.maxCoeff());
    }
    report.holds = !(report.max_violation > tol);
    return report;
}

}  // namespace owrc::diagnostics
