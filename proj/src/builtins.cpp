#include "owrc/expr.hpp"
#include "owrc/problem.hpp"

#include <functional>

namespace owrc {

namespace {

Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

Vector vec(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v(i++) = x;
    return v;
}

// max{x^2, (x - 2)^2}: robust minimizer where the parabolas cross, x* = 1.
ProblemInstance two_scenario_1d() {
    QuadraticCoefficients q;
    q.Q = {{mat2(2, 0, 0, 2).topLeftCorner(1, 1), mat2(2, 0, 0, 2).topLeftCorner(1, 1)}};
    q.b = {{vec({0.0}), vec({-4.0})}};
    q.c = {{0.0, 4.0}};
    ProblemInstance problem = make_quadratic_problem(q, {"two_scenario_1d", true, true});
    problem.set_known_solution(vec({1.0}));
    problem.set_description("1-D worst case of x^2 and (x-2)^2; robust minimizer x* = 1");
    return problem;
}

// f_ji(x) = 1/2 (x - x*)' Q_ji (x - x*) + c_ji with a shared center x*. Every
// Phi_j is uniquely minimized at x*, so the robust critical set is {x*}; the
// scenario maxima still switch away from x*, which makes Phi nonsmooth there.
ProblemInstance biobj_quad_2d() {
    const Vector center = vec({1.0, -0.5});
    const std::vector<std::vector<Matrix>> Q = {
        {mat2(3.0, 1.0, 1.0, 2.0), mat2(1.5, -0.5, -0.5, 4.0)},
        {mat2(2.0, 0.0, 0.0, 1.0), mat2(1.2, 0.6, 0.6, 3.5)},
    };
    const std::vector<std::vector<double>> shift = {{0.0, 0.4}, {0.2, 0.0}};

    QuadraticCoefficients q;
    q.Q = Q;
    q.b.resize(2);
    q.c.resize(2);
    for (std::size_t j = 0; j < 2; ++j) {
        for (std::size_t i = 0; i < 2; ++i) {
            q.b[j].push_back(-Q[j][i] * center);
            q.c[j].push_back(0.5 * center.dot(Q[j][i] * center) + shift[j][i]);
        }
    }
    ProblemInstance problem = make_quadratic_problem(q, {"biobj_quad_2d", true, true});
    problem.set_known_solution(center);
    problem.set_description("2 objectives x 2 scenarios, strongly convex quadratics; robust minimizer (1, -0.5)");
    return problem;
}

ProblemInstance nonconvex_demo() {
    std::vector<expr::Program> programs;
    programs.push_back(expr::parse("(x1^2 - 1)^2 + (x2 - p1)^2 + 0.1*exp(0.5*x1)", 2, 2));
    programs.push_back(expr::parse("sin(x1 + p2) + 0.5*x2^2 + 0.1*x1^2", 2, 2));
    ScenarioSet scenarios({vec({0.0, 0.0}), vec({0.5, 0.3}), vec({-0.5, -0.2})});
    ProblemInstance problem =
        expr::make_expression_problem("nonconvex_demo", 2, std::move(scenarios), std::move(programs));
    problem.set_description("smooth nonconvex 2-D, 2 objectives x 3 scenarios; criticality only");
    return problem;
}

struct Registration {
    const char* name;
    std::function<ProblemInstance()> make;
};

const std::vector<Registration>& registry() {
    static const std::vector<Registration> entries = {
        {"two_scenario_1d", two_scenario_1d},
        {"biobj_quad_2d", biobj_quad_2d},
        {"nonconvex_demo", nonconvex_demo},
    };
    return entries;
}

}  // namespace

std::vector<BuiltinEntry> builtin_problem_list() {
    std::vector<BuiltinEntry> out;
    for (const auto& entry : registry()) {
        out.push_back({entry.name, entry.make().description()});
    }
    return out;
}

ProblemInstance builtin_problem(const std::string& name) {
    for (const auto& entry : registry()) {
        if (name == entry.name) return entry.make();
    }
    throw NotFoundError("unknown builtin problem '" + name + "'");
}

}  // namespace owrc
