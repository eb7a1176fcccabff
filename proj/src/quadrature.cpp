#include "qhhg/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qhhg {

namespace {

// Nodes are eigenvalues of the symmetric tridiagonal Jacobi matrix; weights are
// mu0 * (first eigenvector component)^2.
QuadratureRule golub_welsch(const Eigen::VectorXd& offdiag, double mu0) {
    const int n = static_cast<int>(offdiag.size()) + 1;
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n - 1; ++k) {
        jacobi(k, k + 1) = offdiag(k);
        jacobi(k + 1, k) = offdiag(k);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("golub_welsch: eigen decomposition failed");

    QuadratureRule rule;
    rule.nodes = solver.eigenvalues().array();
    rule.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        const double v0 = solver.eigenvectors()(0, k);
        rule.weights(k) = mu0 * v0 * v0;
    }
    return rule;
}

}  // namespace

QuadratureRule gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
    if (n == 1) {
        QuadratureRule rule;
        rule.nodes = Eigen::ArrayXd::Zero(1);
        rule.weights = Eigen::ArrayXd::Constant(1, std::sqrt(std::numbers::pi));
        return rule;
    }
    Eigen::VectorXd b(n - 1);
    for (int k = 1; k < n; ++k) b(k - 1) = std::sqrt(0.5 * k);
    return golub_welsch(b, std::sqrt(std::numbers::pi));
}

QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    if (n == 1) {
        QuadratureRule rule;
        rule.nodes = Eigen::ArrayXd::Zero(1);
        rule.weights = Eigen::ArrayXd::Constant(1, 2.0);
        return rule;
    }
    Eigen::VectorXd b(n - 1);
    for (int k = 1; k < n; ++k) b(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
    return golub_welsch(b, 2.0);
}

QuadratureRule gauss_legendre(int n, double a, double b) {
    QuadratureRule rule = gauss_legendre(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    rule.nodes = mid + half * rule.nodes;
    rule.weights *= half;
    return rule;
}

double erf_inv(double y) {
    if (y <= -1.0 || y >= 1.0)
        throw std::invalid_argument("erf_inv: argument must lie in (-1, 1)");
    // Winitzki seed, then Newton iterations on erf(x) - y.
    const double w = std::log(1.0 - y * y);
    const double a = 0.147;
    const double term = 2.0 / (std::numbers::pi * a) + 0.5 * w;
    double x = std::copysign(std::sqrt(std::sqrt(term * term - w / a) - term), y);
    for (int it = 0; it < 4; ++it) {
        const double err = std::erf(x) - y;
        const double deriv = 2.0 / std::sqrt(std::numbers::pi) * std::exp(-x * x);
        x -= err / deriv;
    }
    return x;
}

double normal_quantile(double p) {
    if (p <= 0.0 || p >= 1.0)
        throw std::invalid_argument("normal_quantile: p must lie in (0, 1)");
    return std::numbers::sqrt2 * erf_inv(2.0 * p - 1.0);
}

}  // namespace qhhg
