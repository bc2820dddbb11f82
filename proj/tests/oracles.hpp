#pragma once
// Reference computations used by the tests. Nothing here calls the library's
// solvers; only raw objective evaluation is shared.

#include "owrc/problem.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using owrc::Matrix;
using owrc::Vector;

// t -> theta_x(t) + 1/2 |t|^2 straight from the definition.
inline std::function<double(const Vector&)> model(const owrc::ProblemInstance& problem, const Vector& x) {
    std::vector<double> offset;
    std::vector<Vector> grad;
    for (std::size_t j = 0; j < problem.num_objectives(); ++j) {
        std::vector<owrc::ValueGradient> vg;
        double phi = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < problem.num_scenarios(); ++i) {
            vg.push_back(problem.evaluate(j, i, x));
            phi = std::max(phi, vg.back().value);
        }
        for (const auto& e : vg) {
            offset.push_back(e.value - phi);
            grad.push_back(e.gradient);
        }
    }
    return [offset, grad](const Vector& t) {
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < offset.size(); ++l) worst = std::max(worst, offset[l] + grad[l].dot(t));
        return worst + 0.5 * t.squaredNorm();
    };
}

struct GridMin {
    Vector t;
    double value = std::numeric_limits<double>::infinity();
};

// Plain exhaustive grid over the box [-radius, radius]^n, n <= 2.
inline GridMin naive_grid(const std::function<double(const Vector&)>& f, std::size_t n, double radius,
                          double step, const Vector& center = Vector()) {
    GridMin best;
    const Vector c = center.size() ? center : Vector::Zero(static_cast<Eigen::Index>(n));
    const long half = static_cast<long>(std::llround(radius / step));
    Vector t(static_cast<Eigen::Index>(n));
    if (n == 1) {
        for (long a = -half; a <= half; ++a) {
            t(0) = c(0) + a * step;
            const double v = f(t);
            if (v < best.value) best = {t, v};
        }
    } else {
        for (long a = -half; a <= half; ++a) {
            for (long b = -half; b <= half; ++b) {
                t(0) = c(0) + a * step;
                t(1) = c(1) + b * step;
                const double v = f(t);
                if (v < best.value) best = {t, v};
            }
        }
    }
    return best;
}

// Maximizer of a'l - 1/2 (g'l)^2 over the 2-simplex for scalar gradients g.
// Returns lambda_2; the objective is a concave parabola in lambda_2.
inline double two_column_dual_1d(double g1, double g2, double a1, double a2) {
    const double dg = g2 - g1;
    if (dg == 0.0) return a2 > a1 ? 1.0 : (a2 < a1 ? 0.0 : 0.5);
    const double s = ((a2 - a1) / dg - g1) / dg;
    return std::clamp(s, 0.0, 1.0);
}

// Simplex projection by bisection on the threshold tau: sum max(v - tau, 0) = 1.
inline Vector project_simplex_bisection(const Vector& v) {
    double lo = v.minCoeff() - 1.0;
    double hi = v.maxCoeff();
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double s = (v.array() - mid).max(0.0).sum();
        (s > 1.0 ? lo : hi) = mid;
    }
    return (v.array() - 0.5 * (lo + hi)).max(0.0).matrix();
}

inline Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& x, double step) {
    Vector g(x.size());
    for (Eigen::Index c = 0; c < x.size(); ++c) {
        Vector plus = x;
        Vector minus = x;
        plus(c) += step;
        minus(c) -= step;
        g(c) = (f(plus) - f(minus)) / (2.0 * step);
    }
    return g;
}

// Eigenvalues of a symmetric 2x2 matrix in closed form, ascending.
inline std::pair<double, double> eig2(const Matrix& q) {
    const double mean = 0.5 * (q(0, 0) + q(1, 1));
    const double diff = 0.5 * (q(0, 0) - q(1, 1));
    const double r = std::sqrt(diff * diff + q(0, 1) * q(0, 1));
    return {mean - r, mean + r};
}

struct RandomQuadratic {
    owrc::QuadraticCoefficients coeffs;
    std::size_t n, m, p;
};

// Symmetric Q with entries in [-2, 2]; need not be convex.
inline RandomQuadratic random_quadratic(std::mt19937_64& rng, std::size_t n, std::size_t m, std::size_t p) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    RandomQuadratic r{{}, n, m, p};
    const auto N = static_cast<Eigen::Index>(n);
    r.coeffs.Q.assign(m, {});
    r.coeffs.b.assign(m, {});
    r.coeffs.c.assign(m, {});
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < p; ++i) {
            Matrix a(N, N);
            for (Eigen::Index x = 0; x < N; ++x)
                for (Eigen::Index y = 0; y < N; ++y) a(x, y) = u(rng);
            r.coeffs.Q[j].push_back(0.5 * (a + a.transpose()));
            Vector b(N);
            for (Eigen::Index x = 0; x < N; ++x) b(x) = u(rng);
            r.coeffs.b[j].push_back(b);
            r.coeffs.c[j].push_back(u(rng));
        }
    }
    return r;
}

inline Vector random_point(std::mt19937_64& rng, std::size_t n, double half_width) {
    std::uniform_real_distribution<double> u(-half_width, half_width);
    Vector x(static_cast<Eigen::Index>(n));
    for (Eigen::Index c = 0; c < x.size(); ++c) x(c) = u(rng);
    return x;
}

}  // namespace oracle
