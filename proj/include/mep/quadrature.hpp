#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "mep/errors.hpp"

namespace mep {

/// Nodes and weights of a fixed quadrature rule.
struct QuadratureRule {
    Eigen::ArrayXd nodes;
    Eigen::ArrayXd weights;

    template <class F>
    double apply(F&& f) const {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

/// Gauss-Legendre rule on [-1, 1] (Golub-Welsch on the Jacobi matrix).
QuadratureRule gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Gauss-Hermite rule for the weight e^{-u^2} on the real line.
QuadratureRule gauss_hermite(int n);

namespace detail {
const QuadratureRule& panel_rule();

template <class F>
double panel_integral(F&& f, double a, double b) {
    const QuadratureRule& rule = panel_rule();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * acc;
}
}  // namespace detail

/// Adaptive Gauss-Legendre integration of f over [a, b]. The interval is
/// first split at the supplied interior breakpoints (payoff kinks live
/// there), then panels are bisected until the one-panel and two-half
/// estimates agree within the tolerance. Throws NumericalError reporting
/// the achieved tolerance if the depth cap is reached.
template <class F>
double integrate_adaptive(F&& f, double a, double b, std::span<const double> breakpoints = {},
                          double abs_tol = 1e-10, double rel_tol = 1e-12) {
    if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b))
        throw InvalidParameterError("integrate_adaptive: bad interval");
    if (a == b) return 0.0;

    std::vector<double> edges;
    edges.push_back(a);
    for (double k : breakpoints)
        if (k > a && k < b) edges.push_back(k);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());

    struct Panel {
        double a, b, tol;
        int depth;
    };
    std::vector<Panel> stack;
    const double tol_per = abs_tol / static_cast<double>(edges.size() - 1);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        stack.push_back({edges[i], edges[i + 1], tol_per, 0});

    constexpr int kMaxDepth = 30;
    double total = 0.0;
    double worst = 0.0;
    bool converged = true;
    while (!stack.empty()) {
        Panel p = stack.back();
        stack.pop_back();
        const double whole = detail::panel_integral(f, p.a, p.b);
        const double mid = 0.5 * (p.a + p.b);
        const double halves = detail::panel_integral(f, p.a, mid) + detail::panel_integral(f, mid, p.b);
        const double err = std::abs(halves - whole);
        if (err <= std::max(p.tol, rel_tol * std::abs(halves))) {
            total += halves;
        } else if (p.depth >= kMaxDepth) {
            total += halves;
            worst = std::max(worst, err);
            converged = false;
        } else {
            stack.push_back({p.a, mid, 0.5 * p.tol, p.depth + 1});
            stack.push_back({mid, p.b, 0.5 * p.tol, p.depth + 1});
        }
    }
    if (!converged)
        throw NumericalError("integrate_adaptive: depth cap reached, achieved tolerance " +
                             std::to_string(worst) + " (requested " + std::to_string(abs_tol) + ")");
    return total;
}

}  // namespace mep
