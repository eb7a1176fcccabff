#ifndef QHHG_QUADRATURE_HPP
#define QHHG_QUADRATURE_HPP

#include <Eigen/Dense>

namespace qhhg {

struct QuadratureRule {
    Eigen::ArrayXd nodes;
    Eigen::ArrayXd weights;
};

// Gauss-Hermite rule: Int_{-inf}^{inf} e^{-x^2} f(x) dx ~= sum w_i f(x_i).
// Nodes/weights from the Golub-Welsch eigenproblem of the Jacobi matrix.
QuadratureRule gauss_hermite(int n);

// Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

// Gauss-Legendre mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

// Inverse error function, accurate to ~1e-15 (rational seed + Newton on std::erf).
double erf_inv(double y);

// Standard normal quantile.
double normal_quantile(double p);

}  // namespace qhhg

#endif  // QHHG_QUADRATURE_HPP
