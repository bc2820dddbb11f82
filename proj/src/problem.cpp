#include "owrc/problem.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace owrc {

ScenarioSet::ScenarioSet(std::vector<Vector> scenarios) : scenarios_(std::move(scenarios)) {
    if (scenarios_.empty()) {
        throw std::invalid_argument("scenario set must contain at least one scenario");
    }
    dimension_ = static_cast<std::size_t>(scenarios_.front().size());
    for (const auto& s : scenarios_) {
        if (static_cast<std::size_t>(s.size()) != dimension_) {
            throw std::invalid_argument("all scenarios must have the same dimension");
        }
    }
}

ProblemInstance::ProblemInstance(std::string name, std::size_t n, ScenarioSet scenarios,
                                 std::vector<ObjectiveEvaluator> objectives)
    : name_(std::move(name)), n_(n), scenarios_(std::move(scenarios)), objectives_(std::move(objectives)) {
    if (n_ == 0) {
        throw std::invalid_argument("problem dimension n must be at least 1");
    }
    if (objectives_.empty()) {
        throw std::invalid_argument("problem needs at least one objective");
    }
    if (scenarios_.size() == 0) {
        throw std::invalid_argument("problem needs at least one scenario");
    }
    for (const auto& f : objectives_) {
        if (!f) {
            throw std::invalid_argument("objective evaluator is empty");
        }
    }
}

ValueGradient ProblemInstance::evaluate(std::size_t j, std::size_t i, const Vector& x) const {
    ValueGradient out;
    try {
        out = objectives_.at(j)(x, scenarios_[i]);
    } catch (const EvaluationError&) {
        throw;
    } catch (const std::exception& e) {
        throw EvaluationError("objective " + std::to_string(j + 1) + ", scenario " + std::to_string(i + 1) + ": " +
                                  e.what(),
                              j, i);
    }
    if (static_cast<std::size_t>(out.gradient.size()) != n_) {
        throw EvaluationError("objective " + std::to_string(j + 1) + " returned a gradient of wrong length", j, i);
    }
    if (!std::isfinite(out.value) || !out.gradient.allFinite()) {
        std::ostringstream msg;
        msg << "non-finite value or gradient for objective " << j + 1 << ", scenario " << i + 1;
        throw EvaluationError(msg.str(), j, i);
    }
    return out;
}

ProblemInstance& ProblemInstance::set_description(std::string text) {
    description_ = std::move(text);
    return *this;
}

ProblemInstance& ProblemInstance::set_smoothness_constant(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("smoothness constant must be positive");
    }
    gamma_ = gamma;
    return *this;
}

ProblemInstance& ProblemInstance::set_strong_convexity_modulus(double mu) {
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        throw std::invalid_argument("strong convexity modulus must be positive");
    }
    mu_ = mu;
    return *this;
}

ProblemInstance& ProblemInstance::set_known_solution(Vector x) {
    if (static_cast<std::size_t>(x.size()) != n_) {
        throw std::invalid_argument("known solution has wrong dimension");
    }
    solution_ = std::move(x);
    return *this;
}

bool RobustEvaluation::operator==(const RobustEvaluation& other) const {
    if (x != other.x || values != other.values || phi != other.phi || active_sets != other.active_sets ||
        active_tolerance != other.active_tolerance || gradients.size() != other.gradients.size()) {
        return false;
    }
    for (std::size_t j = 0; j < gradients.size(); ++j) {
        if (gradients[j].size() != other.gradients[j].size()) return false;
        for (std::size_t i = 0; i < gradients[j].size(); ++i) {
            if (gradients[j][i] != other.gradients[j][i]) return false;
        }
    }
    return true;
}

namespace {

void check_point(const ProblemInstance& problem, const Vector& x) {
    if (static_cast<std::size_t>(x.size()) != problem.dimension()) {
        throw std::invalid_argument("point has dimension " + std::to_string(x.size()) + ", problem expects " +
                                    std::to_string(problem.dimension()));
    }
}

}  // namespace

RobustEvaluation evaluate_robust(const ProblemInstance& problem, const Vector& x,
                                 std::optional<double> active_tol) {
    check_point(problem, x);
    if (active_tol && !(*active_tol >= 0.0)) {
        throw std::invalid_argument("active-set tolerance must be nonnegative");
    }
    const std::size_t m = problem.num_objectives();
    const std::size_t p = problem.num_scenarios();

    RobustEvaluation ev;
    ev.x = x;
    ev.values.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(p));
    ev.gradients.assign(m, std::vector<Vector>(p));
    ev.phi.resize(static_cast<Eigen::Index>(m));
    ev.active_sets.resize(m);
    ev.active_tolerance.resize(m);

    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < p; ++i) {
            auto vg = problem.evaluate(j, i, x);
            ev.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = vg.value;
            ev.gradients[j][i] = std::move(vg.gradient);
        }
        const double phi = ev.values.row(static_cast<Eigen::Index>(j)).maxCoeff();
        ev.phi(static_cast<Eigen::Index>(j)) = phi;
        const double tol = active_tol ? *active_tol : kDefaultActiveRelTol * (1.0 + std::abs(phi));
        ev.active_tolerance[j] = tol;
        for (std::size_t i = 0; i < p; ++i) {
            if (phi - ev.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) <= tol) {
                ev.active_sets[j].push_back(i);
            }
        }
    }
    return ev;
}

Vector evaluate_phi(const ProblemInstance& problem, const Vector& x) {
    check_point(problem, x);
    const std::size_t m = problem.num_objectives();
    Vector phi(static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < problem.num_scenarios(); ++i) {
            best = std::max(best, problem.evaluate(j, i, x).value);
        }
        phi(static_cast<Eigen::Index>(j)) = best;
    }
    return phi;
}

ProblemInstance make_quadratic_problem(const QuadraticCoefficients& coeffs, const QuadraticOptions& options) {
    const std::size_t m = coeffs.Q.size();
    if (m == 0 || coeffs.b.size() != m || coeffs.c.size() != m) {
        throw std::invalid_argument("quadratic coefficients need matching, nonempty Q, b, c lists");
    }
    const std::size_t p = coeffs.Q[0].size();
    if (p == 0 || coeffs.Q[0][0].rows() == 0) {
        throw std::invalid_argument("quadratic coefficients need at least one scenario and n >= 1");
    }
    const auto n = static_cast<std::size_t>(coeffs.Q[0][0].rows());
    const std::size_t block = n * n + n + 1;

    double gamma = 0.0;
    double mu = std::numeric_limits<double>::infinity();
    std::vector<Vector> scenarios(p, Vector(static_cast<Eigen::Index>(m * block)));
    for (std::size_t j = 0; j < m; ++j) {
        if (coeffs.Q[j].size() != p || coeffs.b[j].size() != p || coeffs.c[j].size() != p) {
            throw std::invalid_argument("objective " + std::to_string(j + 1) + " has inconsistent scenario count");
        }
        for (std::size_t i = 0; i < p; ++i) {
            const Matrix& Q = coeffs.Q[j][i];
            const Vector& b = coeffs.b[j][i];
            if (static_cast<std::size_t>(Q.rows()) != n || static_cast<std::size_t>(Q.cols()) != n ||
                static_cast<std::size_t>(b.size()) != n) {
                throw std::invalid_argument("quadratic block (" + std::to_string(j + 1) + "," +
                                            std::to_string(i + 1) + ") has inconsistent dimensions");
            }
            if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
                throw std::invalid_argument("Q(" + std::to_string(j + 1) + "," + std::to_string(i + 1) +
                                            ") is not symmetric");
            }
            Eigen::SelfAdjointEigenSolver<Matrix> eig(Q, Eigen::EigenvaluesOnly);
            gamma = std::max(gamma, eig.eigenvalues().cwiseAbs().maxCoeff());
            mu = std::min(mu, eig.eigenvalues().minCoeff());

            Vector& s = scenarios[i];
            const auto base = static_cast<Eigen::Index>(j * block);
            s.segment(base, static_cast<Eigen::Index>(n * n)) = Q.reshaped();
            s.segment(base + static_cast<Eigen::Index>(n * n), static_cast<Eigen::Index>(n)) = b;
            s(base + static_cast<Eigen::Index>(n * n + n)) = coeffs.c[j][i];
        }
    }

    std::vector<ObjectiveEvaluator> objectives;
    objectives.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        objectives.emplace_back([n, base = static_cast<Eigen::Index>(j * block)](const Vector& x, const Vector& s) {
            const auto nn = static_cast<Eigen::Index>(n);
            const auto Q = s.segment(base, nn * nn).reshaped(nn, nn);
            const auto b = s.segment(base + nn * nn, nn);
            const double c = s(base + nn * nn + nn);
            Vector Qx = Q * x;
            return ValueGradient{0.5 * x.dot(Qx) + b.dot(x) + c, Qx + b};
        });
    }

    ProblemInstance problem(options.name, n, ScenarioSet(std::move(scenarios)), std::move(objectives));
    if (options.compute_smoothness && gamma > 0.0) {
        problem.set_smoothness_constant(gamma);
    }
    if (options.compute_strong_convexity && mu > 0.0) {
        problem.set_strong_convexity_modulus(mu);
    }
    return problem;
}

}  // namespace owrc
