#include "oracles.hpp"

#include "owrc/solver.hpp"

#include <doctest.h>

#include <cmath>

using owrc::SolverConfig;
using owrc::StepMode;
using owrc::Termination;
using owrc::Vector;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

Vector v2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

void check_trace_shape(const owrc::SolverTrace& trace) {
    REQUIRE_FALSE(trace.records.empty());
    for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
        const auto& r = trace.records[k];
        CHECK(r.k == k);
        CHECK(r.theta <= 0.0);
        CHECK(r.alpha > 0.0);
        const Vector next = r.x + r.alpha * r.direction;
        CHECK(next == trace.records[k + 1].x);
        CHECK((trace.records[k + 1].phi - r.phi).maxCoeff() <= 0.0);
    }
    CHECK(trace.records.back().alpha == 0.0);
    CHECK(trace.final_x == trace.records.back().x);
}

bool same_trace(const owrc::SolverTrace& a, const owrc::SolverTrace& b) {
    if (a.records.size() != b.records.size() || a.termination != b.termination) return false;
    for (std::size_t k = 0; k < a.records.size(); ++k) {
        const auto& r = a.records[k];
        const auto& s = b.records[k];
        if (r.x != s.x || r.phi != s.phi || r.theta != s.theta || r.alpha != s.alpha) return false;
    }
    return a.final_x == b.final_x;
}

}  // namespace

TEST_CASE("two_scenario_1d from the origin converges to the robust minimizer") {
    const auto p = owrc::builtin_problem("two_scenario_1d");
    SolverConfig cfg;
    cfg.epsilon = 1e-6;
    const auto trace = owrc::run(p, v1(0.0), cfg);
    CHECK(trace.termination == Termination::Converged);
    CHECK(std::abs(trace.final_x(0) - 1.0) <= 1e-3);
    CHECK(std::abs(trace.records.back().theta) < 1e-6);
    check_trace_shape(trace);
}

TEST_CASE("a critical start stops immediately") {
    const auto p = owrc::builtin_problem("two_scenario_1d");
    const auto trace = owrc::run(p, v1(1.0));
    CHECK(trace.termination == Termination::Converged);
    CHECK(trace.records.size() == 1);
    CHECK(trace.final_x(0) == 1.0);
}

TEST_CASE("stopping rule and criticality at the final point on every builtin") {
    for (const auto& entry : owrc::builtin_problem_list()) {
        CAPTURE(entry.name);
        const auto p = owrc::builtin_problem(entry.name);
        SolverConfig cfg;
        const Vector x0 = Vector::Constant(static_cast<Eigen::Index>(p.dimension()), 2.5);
        const auto trace = owrc::run(p, x0, cfg);
        check_trace_shape(trace);
        const bool small = std::abs(trace.records.back().theta) < cfg.epsilon;
        CHECK((trace.termination == Termination::Converged) == small);
        REQUIRE(trace.termination == Termination::Converged);
        const auto again = owrc::solve_subproblem(p, trace.final_x);
        CHECK(std::abs(again.theta) < 2 * cfg.epsilon);
    }
}

TEST_CASE("constant step: descent by alpha (1 - gamma alpha / 2) |t|^2") {
    const auto p = owrc::builtin_problem("biobj_quad_2d");
    const double gamma = *p.smoothness_constant();
    for (double scale : {1.0, 0.5}) {
        SolverConfig cfg;
        cfg.step_mode = StepMode::Constant;
        cfg.constant_alpha = scale / gamma;
        const auto trace = owrc::run(p, v2(-3.0, 2.0), cfg);
        CHECK(trace.termination == Termination::Converged);
        check_trace_shape(trace);
        const double a = cfg.constant_alpha;
        for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
            const auto& r = trace.records[k];
            const double decrease = a * (1.0 - 0.5 * gamma * a) * r.direction_norm * r.direction_norm;
            CHECK((trace.records[k + 1].phi - r.phi).maxCoeff() <= -decrease + 1e-10);
            CHECK(r.line_search_trials == 0);
        }
    }
}

TEST_CASE("configuration validation") {
    const auto p = owrc::builtin_problem("biobj_quad_2d");
    const auto no_gamma = owrc::builtin_problem("nonconvex_demo");
    auto bad = [](auto mutate, const owrc::ProblemInstance& prob) {
        SolverConfig cfg;
        mutate(cfg);
        return owrc::run(prob, Vector::Zero(2), cfg);
    };
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.epsilon = 0.0; }, p), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.beta = 1.0; }, p), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.beta = 0.0; }, p), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.step_mode = StepMode::Constant; c.constant_alpha = 0.1; }, no_gamma),
                    std::invalid_argument);
    CHECK_THROWS_AS(bad([&](SolverConfig& c) {
                        c.step_mode = StepMode::Constant;
                        c.constant_alpha = 1.01 / *p.smoothness_constant();
                    }, p),
                    std::invalid_argument);
    CHECK_THROWS_AS(owrc::run(p, Vector::Zero(3)), std::invalid_argument);
    CHECK(owrc::step_mode_from_string("constant") == StepMode::Constant);
    CHECK_THROWS_AS(owrc::step_mode_from_string("wolfe"), std::invalid_argument);
    CHECK(owrc::termination_from_string(owrc::to_string(Termination::LineSearchFailure)) ==
          Termination::LineSearchFailure);
}

TEST_CASE("iteration cap") {
    const auto p = owrc::builtin_problem("biobj_quad_2d");
    SolverConfig cfg;
    cfg.max_iterations = 3;
    const auto trace = owrc::run(p, v2(4.0, 4.0), cfg);
    CHECK(trace.termination == Termination::MaxIterations);
    CHECK(trace.records.size() == 4);
    check_trace_shape(trace);
}

TEST_CASE("wrong gradients end in a line-search failure with the partial trace") {
    // Gradient has the wrong sign, so every direction is uphill.
    std::vector<owrc::ObjectiveEvaluator> objs{[](const Vector& x, const Vector&) {
        return owrc::ValueGradient{0.5 * x.squaredNorm(), -x};
    }};
    owrc::ProblemInstance p("broken", 2, owrc::ScenarioSet({Vector(0)}), objs);
    const auto trace = owrc::run(p, v2(1.0, 1.0));
    CHECK(trace.termination == Termination::LineSearchFailure);
    CHECK(trace.records.size() == 1);
    CHECK_FALSE(trace.message.empty());
}

TEST_CASE("evaluation failure is reported as a subproblem failure") {
    std::vector<owrc::ObjectiveEvaluator> objs{[](const Vector& x, const Vector&) {
        return owrc::ValueGradient{x(0) > 0.25 ? 0.5 * x.squaredNorm() : std::nan(""), x};
    }};
    owrc::ProblemInstance p("nan", 1, owrc::ScenarioSet({Vector(0)}), objs);
    SolverConfig cfg;
    cfg.step_mode = StepMode::Constant;
    p.set_smoothness_constant(1.0);
    cfg.constant_alpha = 1.0;
    const auto trace = owrc::run(p, v1(1.0), cfg);
    CHECK(trace.termination == Termination::SubproblemFailure);
    CHECK(trace.records.size() == 1);
    CHECK(trace.final_x(0) == 0.0);
}

TEST_CASE("multipliers are recorded on request") {
    const auto p = owrc::builtin_problem("biobj_quad_2d");
    SolverConfig cfg;
    cfg.record_multipliers = true;
    const auto trace = owrc::run(p, v2(2.0, 0.0), cfg);
    for (const auto& r : trace.records) {
        REQUIRE(r.lambda.has_value());
        CHECK(r.lambda->size() == 4);
    }
    CHECK_FALSE(owrc::run(p, v2(2.0, 0.0)).records.front().lambda.has_value());
}

TEST_CASE("runs are deterministic") {
    const auto p = owrc::builtin_problem("nonconvex_demo");
    CHECK(same_trace(owrc::run(p, v2(1.7, -0.4)), owrc::run(p, v2(1.7, -0.4))));
}

TEST_CASE("batch runs") {
    const auto p = owrc::builtin_problem("biobj_quad_2d");
    SolverConfig cfg;

    const auto one = owrc::run_batch({&p}, {v2(3.0, 1.0)}, cfg);
    REQUIRE(one.size() == 1);
    REQUIRE(one[0].trace.has_value());
    CHECK(same_trace(*one[0].trace, owrc::run(p, v2(3.0, 1.0), cfg)));

    const auto mixed = owrc::run_batch({&p}, {v2(1.0, 1.0), Vector::Zero(3), v2(-1.0, 0.0)}, cfg, 2);
    REQUIRE(mixed.size() == 3);
    CHECK(mixed[0].trace.has_value());
    CHECK_FALSE(mixed[1].trace.has_value());
    CHECK_FALSE(mixed[1].error.empty());
    CHECK(mixed[2].trace.has_value());

    std::mt19937_64 rng(16);
    std::vector<Vector> starts;
    for (int s = 0; s < 16; ++s) starts.push_back(oracle::random_point(rng, 2, 5.0));
    const auto many = owrc::run_batch({&p}, starts, cfg, 4);
    for (std::size_t a = 0; a < many.size(); ++a) {
        REQUIRE(many[a].trace.has_value());
        CHECK(many[a].trace->termination == Termination::Converged);
        for (std::size_t b = 0; b < a; ++b) {
            CHECK((many[a].trace->final_x - many[b].trace->final_x).lpNorm<Eigen::Infinity>() <= 1e-3);
        }
    }

    const auto two_problems = owrc::builtin_problem("two_scenario_1d");
    CHECK_THROWS_AS(owrc::run_batch({&p, &two_problems}, {v2(0, 0)}, cfg), std::invalid_argument);
}
