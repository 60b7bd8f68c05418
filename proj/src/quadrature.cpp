#include "mep/quadrature.hpp"

namespace mep {

namespace {

// Golub-Welsch: nodes are eigenvalues of the symmetric tridiagonal Jacobi
// matrix, weights are mu0 times the squared first eigenvector components.
QuadratureRule golub_welsch(int n, const Eigen::VectorXd& subdiag, double mu0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(Eigen::VectorXd::Zero(n), subdiag,
                                  Eigen::ComputeEigenvectors);
    QuadratureRule rule;
    rule.nodes = solver.eigenvalues().array();
    rule.weights = mu0 * solver.eigenvectors().row(0).array().square();

    // Both families here are symmetric about zero; enforce the symmetry the
    // eigensolver delivers only to roundoff.
    const int m = n / 2;
    for (int i = 0; i < m; ++i) {
        const int j = n - 1 - i;
        const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.nodes[i] = -x;
        rule.nodes[j] = x;
        rule.weights[i] = rule.weights[j] = w;
    }
    if (n % 2 == 1) rule.nodes[m] = 0.0;
    return rule;
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw InvalidParameterError("gauss_legendre: n must be >= 1");
    Eigen::VectorXd sub(n > 1 ? n - 1 : 0);
    for (int k = 1; k < n; ++k) sub(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
    return golub_welsch(n, sub, 2.0);
}

QuadratureRule gauss_legendre(int n, double a, double b) {
    QuadratureRule rule = gauss_legendre(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    rule.nodes = mid + half * rule.nodes;
    rule.weights *= half;
    return rule;
}

QuadratureRule gauss_hermite(int n) {
    if (n < 1) throw InvalidParameterError("gauss_hermite: n must be >= 1");
    Eigen::VectorXd sub(n > 1 ? n - 1 : 0);
    for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(0.5 * k);
    return golub_welsch(n, sub, std::sqrt(M_PI));
}

namespace detail {

const QuadratureRule& panel_rule() {
    static const QuadratureRule rule = gauss_legendre(20);
    return rule;
}

}  // namespace detail

}  // namespace mep
