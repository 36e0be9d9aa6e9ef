#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace dirform {

struct QuadratureRule {
    std::vector<double> nodes;   // on (0,1)
    std::vector<double> weights; // sum to 1
};

// Gauss-Legendre on [0,1], nodes by Newton iteration on P_n.
inline QuadratureRule gauss_legendre(std::size_t order) {
    if (order == 0) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    QuadratureRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const double pi = 3.14159265358979323846;
    for (std::size_t i = 0; i < order; ++i) {
        // Chebyshev-based initial guess on [-1,1]
        double x = std::cos(pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(order) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= order; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[order - 1 - i] = 0.5 * (x + 1.0);
        rule.weights[order - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

// integral over [0,1]
inline double integrate_interval(const std::function<double(double)>& f,
                                 std::size_t order = 64) {
    QuadratureRule q = gauss_legendre(order);
    double s = 0.0;
    for (std::size_t i = 0; i < order; ++i) s += q.weights[i] * f(q.nodes[i]);
    return s;
}

// integral over the triangle {x1,x2 >= 0, x1+x2 <= 1}, mapped to the unit
// square via x1 = u, x2 = v(1-u) with Jacobian (1-u)
inline double integrate_triangle(const std::function<double(double, double)>& f,
                                 std::size_t order = 64) {
    QuadratureRule q = gauss_legendre(order);
    double s = 0.0;
    for (std::size_t i = 0; i < order; ++i) {
        double u = q.nodes[i];
        double inner = 0.0;
        for (std::size_t j = 0; j < order; ++j) {
            double v = q.nodes[j];
            inner += q.weights[j] * f(u, v * (1.0 - u));
        }
        s += q.weights[i] * inner * (1.0 - u);
    }
    return s;
}

// tanh-sinh node on (0,1); the complement 1-x is kept separately because it
// stays accurate where 1.0 - x would round to 0
struct TanhSinhNode {
    double x;
    double complement; // 1 - x
    double weight;
};

// double-exponential node clustering makes tanh-sinh accurate for integrands
// with integrable endpoint singularities such as x^(a-1) with a > 0
inline std::vector<TanhSinhNode> tanh_sinh(double t_max = 4.0, double h = 0.05) {
    std::vector<TanhSinhNode> nodes;
    const double pi_half = 1.57079632679489661923;
    long n = static_cast<long>(t_max / h);
    for (long k = -n; k <= n; ++k) {
        double t = h * static_cast<double>(k);
        double s = pi_half * std::sinh(t);
        // 0.5 * (1 +/- tanh(s)) through exp, so the small side is exact
        double e = std::exp(-2.0 * std::abs(s));
        double small_side = e / (1.0 + e);
        double big_side = 1.0 / (1.0 + e);
        double sech = 1.0 / std::cosh(s);
        double w = h * pi_half * std::cosh(t) * 0.5 * sech * sech;
        if (small_side <= 0.0 || w == 0.0) continue;
        if (s >= 0.0)
            nodes.push_back({big_side, small_side, w});
        else
            nodes.push_back({small_side, big_side, w});
    }
    return nodes;
}

// integral over [0,1], robust to endpoint singularities; f receives
// (x, 1 - x) with both sides computed to full precision
inline double
integrate_interval_singular(const std::function<double(double, double)>& f) {
    double s = 0.0;
    for (const auto& node : tanh_sinh()) s += node.weight * f(node.x, node.complement);
    return s;
}

// triangle integral robust to singularities on all three edges; same
// x1 = u, x2 = v(1-u) map as integrate_triangle, and f receives
// (x1, x2, 1 - x1 - x2) with the remainder computed as (1-u)(1-v)
inline double integrate_triangle_singular(
    const std::function<double(double, double, double)>& f) {
    auto nodes = tanh_sinh();
    double s = 0.0;
    for (const auto& outer : nodes) {
        double inner = 0.0;
        for (const auto& node : nodes)
            inner += node.weight * f(outer.x, node.x * outer.complement,
                                     outer.complement * node.complement);
        s += outer.weight * inner * outer.complement;
    }
    return s;
}

} // namespace dirform
