#include "oracles.hpp"

#include "owrc/subproblem.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using owrc::Matrix;
using owrc::Vector;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

owrc::ProblemInstance half_norm_squared() {
    owrc::QuadraticCoefficients q;
    q.Q = {{Matrix::Identity(2, 2)}};
    q.b = {{Vector::Zero(2)}};
    q.c = {{0.0}};
    return owrc::make_quadratic_problem(q);
}

constexpr double kRound = 1e-14;

// Every invariant a returned solution must satisfy.
void check_solution(const owrc::SubproblemData& data, const owrc::SubproblemSolution& sol, double tol) {
    CHECK(sol.certified);
    CHECK(sol.kkt_residual <= tol);
    CHECK(sol.lambda.minCoeff() >= 0.0);
    CHECK(std::abs(sol.lambda.sum() - 1.0) <= 1e-12);
    CHECK((sol.direction + data.gradients * sol.lambda).lpNorm<Eigen::Infinity>() <= tol);
    const double rho = (data.offsets + data.gradients.transpose() * sol.direction).maxCoeff();
    CHECK(sol.rho == doctest::Approx(rho).epsilon(1e-15));
    CHECK(sol.theta == doctest::Approx(rho + 0.5 * sol.direction.squaredNorm()).epsilon(1e-15));
    // theta <= theta_x(0) = max a = 0; recomputing it from t adds rounding only.
    CHECK(sol.theta <= kRound * (1.0 + sol.direction.squaredNorm()));
    CHECK(sol.theta <= -0.5 * sol.direction.squaredNorm() + tol);
    CHECK(sol.rho <= -sol.direction.squaredNorm() + 10 * tol);
    CHECK(std::abs(sol.dual_value - sol.theta) <= 10 * tol);
    for (std::size_t it = 1; it < sol.dual_history.size(); ++it) {
        CHECK(sol.dual_history[it] >= sol.dual_history[it - 1] - kRound * (1.0 + std::abs(sol.dual_history[it - 1])));
    }
}

}  // namespace

TEST_CASE("assemble: columns, offsets and ordering") {
    const auto p = owrc::builtin_problem("two_scenario_1d");
    const auto d0 = owrc::assemble(owrc::evaluate_robust(p, vec({0.0})));
    CHECK(d0.size() == 2);
    CHECK(d0.gradients(0, 0) == 0.0);
    CHECK(d0.gradients(0, 1) == -4.0);
    CHECK(d0.offsets(0) == -4.0);
    CHECK(d0.offsets(1) == 0.0);

    const auto d1 = owrc::assemble(owrc::evaluate_robust(p, vec({1.0})));
    CHECK(d1.gradients(0, 0) == 2.0);
    CHECK(d1.gradients(0, 1) == -2.0);
    CHECK(d1.offsets == Vector::Zero(2));

    const auto single = owrc::assemble(owrc::evaluate_robust(half_norm_squared(), vec({1.0, 0.0})));
    CHECK(single.size() == 1);
    CHECK(single.offsets(0) == 0.0);

    // j-major, i-minor.
    std::mt19937_64 rng(2);
    const auto rq = oracle::random_quadratic(rng, 2, 2, 3);
    const auto q = owrc::make_quadratic_problem(rq.coeffs);
    const auto d = owrc::assemble(owrc::evaluate_robust(q, vec({0.5, -0.5})));
    REQUIRE(d.size() == 6);
    for (std::size_t l = 0; l < 6; ++l) {
        CHECK(d.index_map[l] == std::make_pair(l / 3, l % 3));
        CHECK(d.offsets(static_cast<Eigen::Index>(l)) <= 0.0);
    }
}

TEST_CASE("simplex projection") {
    CHECK(owrc::project_simplex(vec({0.5, 0.5})) == vec({0.5, 0.5}));
    CHECK(owrc::project_simplex(vec({1.0, 1.0})) == vec({0.5, 0.5}));
    CHECK(owrc::project_simplex(vec({2.0, 0.0})) == vec({1.0, 0.0}));
    CHECK(owrc::project_simplex(vec({-3.0})) == vec({1.0}));

    std::mt19937_64 rng(8);
    for (int t = 0; t < 200; ++t) {
        const Vector v = oracle::random_point(rng, 1 + t % 9, 3.0);
        const Vector mine = owrc::project_simplex(v);
        const Vector ref = oracle::project_simplex_bisection(v);
        CHECK((mine - ref).lpNorm<Eigen::Infinity>() <= 1e-12);
        CHECK(mine.minCoeff() >= 0.0);
        CHECK(std::abs(mine.sum() - 1.0) <= 1e-15);
    }
}

TEST_CASE("two_scenario_1d at x = 0 against the closed-form dual and a grid") {
    const auto p = owrc::builtin_problem("two_scenario_1d");
    const auto data = owrc::assemble(owrc::evaluate_robust(p, vec({0.0})));
    const auto sol = owrc::solve_dual(data);
    check_solution(data, sol, 1e-8);

    const double l2 = oracle::two_column_dual_1d(0.0, -4.0, -4.0, 0.0);
    CHECK(l2 == 0.25);
    CHECK(sol.lambda(0) == doctest::Approx(0.75).epsilon(1e-8));
    CHECK(sol.lambda(1) == doctest::Approx(l2).epsilon(1e-8));
    CHECK(sol.direction(0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(sol.theta == doctest::Approx(-3.5).epsilon(1e-8));

    const auto grid =
        oracle::naive_grid(oracle::model(p, vec({0.0})), 1, 5.0, 1e-4);
    CHECK(std::abs(grid.t(0) - sol.direction(0)) <= 1e-4);
    CHECK(std::abs(grid.value - sol.theta) <= 1e-6);
}

TEST_CASE("critical and single-scenario points") {
    const auto p = owrc::builtin_problem("two_scenario_1d");
    const auto at1 = owrc::solve_subproblem(p, vec({1.0}));
    CHECK(at1.certified);
    CHECK(std::abs(at1.theta) <= 1e-8);
    CHECK(std::abs(at1.direction(0)) <= 1e-8);
    CHECK(at1.lambda(0) == doctest::Approx(0.5).epsilon(1e-8));

    const auto h = owrc::solve_subproblem(half_norm_squared(), vec({1.0, 0.0}));
    CHECK(h.lambda == vec({1.0}));
    CHECK(h.direction == vec({-1.0, 0.0}));
    CHECK(h.theta == -0.5);
}

TEST_CASE("noncritical points have strictly negative theta and a descent direction") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 30; ++t) {
        const auto rq = oracle::random_quadratic(rng, 1 + t % 3, 1 + t % 2, 1 + t % 3);
        const auto p = owrc::make_quadratic_problem(rq.coeffs);
        const Vector x = oracle::random_point(rng, rq.n, 2.0);
        const auto sol = owrc::solve_subproblem(p, x);
        REQUIRE(sol.certified);
        if (sol.theta < -1e-8) {
            const Vector before = owrc::evaluate_phi(p, x);
            const Vector after = owrc::evaluate_phi(p, x + 1e-3 * sol.direction);
            CHECK((after - before).maxCoeff() < 0.0);
        }
    }
}

TEST_CASE("random instances: all solution invariants, primal-dual agreement") {
    std::mt19937_64 rng(41);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 1 + static_cast<std::size_t>(t % 3);
        const std::size_t m = 1 + static_cast<std::size_t>(t % 2);
        const std::size_t p = 1 + static_cast<std::size_t>((t / 2) % 4);
        const auto rq = oracle::random_quadratic(rng, n, m, p);
        const auto prob = owrc::make_quadratic_problem(rq.coeffs);
        const auto data = owrc::assemble(owrc::evaluate_robust(prob, oracle::random_point(rng, n, 2.0)));
        const auto sol = owrc::solve_dual(data);
        check_solution(data, sol, 1e-8);
        CHECK(sol.iterations <= 10 * data.size() * n + 1000);
    }
}

TEST_CASE("direction is unique even when multipliers are not") {
    // Duplicated and dependent columns leave lambda free along a face.
    owrc::SubproblemData data;
    data.gradients.resize(2, 4);
    data.gradients << 1.0, 1.0, -1.0, 0.0,
                      2.0, 2.0, 0.5, 1.25;
    data.offsets = vec({0.0, 0.0, -0.1, -0.05});
    for (std::size_t l = 0; l < 4; ++l) data.index_map.push_back({0, l});
    const auto a = owrc::solve_dual(data);
    check_solution(data, a, 1e-8);

    owrc::SubproblemData reordered = data;
    reordered.gradients.col(0).swap(reordered.gradients.col(3));
    std::swap(reordered.offsets(0), reordered.offsets(3));
    const auto b = owrc::solve_dual(reordered);
    check_solution(reordered, b, 1e-8);
    CHECK((a.direction - b.direction).lpNorm<Eigen::Infinity>() <= 10 * 1e-8);
    CHECK(std::abs(a.theta - b.theta) <= 10 * 1e-8);
}

TEST_CASE("iteration cap yields an honest certification flag") {
    std::mt19937_64 rng(5);
    const auto rq = oracle::random_quadratic(rng, 3, 2, 4);
    const auto prob = owrc::make_quadratic_problem(rq.coeffs);
    const auto data = owrc::assemble(owrc::evaluate_robust(prob, vec({0.3, 1.0, -0.4})));
    const auto sol = owrc::solve_dual(data, {1e-8, 1});
    CHECK(sol.certified == (sol.kkt_residual <= 1e-8));
    CHECK(owrc::kkt_residual(data, sol.lambda, sol.direction) == doctest::Approx(sol.kkt_residual));
}

TEST_CASE("kkt residual flags each violated condition") {
    const auto p = owrc::builtin_problem("two_scenario_1d");
    const auto data = owrc::assemble(owrc::evaluate_robust(p, vec({0.0})));
    // Optimal pair: zero residual.
    CHECK(owrc::kkt_residual(data, vec({0.75, 0.25}), vec({1.0})) <= 1e-15);
    // Off-simplex multipliers.
    CHECK(owrc::kkt_residual(data, vec({0.8, 0.25}), vec({1.0})) >= 0.05 - 1e-15);
    // Stationarity broken.
    CHECK(owrc::kkt_residual(data, vec({0.75, 0.25}), vec({1.5})) >= 0.5 - 1e-15);
    // Complementarity broken: weight on an inactive piece.
    CHECK(owrc::kkt_residual(data, vec({1.0, 0.0}), vec({0.0})) > 1.0);
    CHECK(owrc::linear_model_max(data, vec({1.0})) == -4.0);
}
