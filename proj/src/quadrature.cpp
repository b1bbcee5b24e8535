#include "qsg/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "qsg/errors.hpp"

namespace qsg {

namespace {

// Golub-Welsch: nodes are eigenvalues of the symmetric tridiagonal Jacobi
// matrix with off-diagonal b_k; weights are mu0 * (first eigenvector entry)^2.
QuadratureRule golub_welsch(const Eigen::VectorXd& offdiag, double mu0) {
  const int n = int(offdiag.size()) + 1;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n - 1; ++k) {
    jacobi(k, k + 1) = offdiag(k);
    jacobi(k + 1, k) = offdiag(k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  if (es.info() != Eigen::Success) throw NumericError("quadrature: Jacobi eigensolve failed");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = es.eigenvalues()(k);
    const double v0 = es.eigenvectors()(0, k);
    rule.weights[k] = mu0 * v0 * v0;
  }
  return rule;
}

}  // namespace

QuadratureRule gauss_legendre_01(int n) {
  if (n < 1) throw DomainError("gauss_legendre_01: need n >= 1");
  // Legendre on [-1,1]: b_k = k / sqrt(4k^2 - 1), mu0 = 2.
  Eigen::VectorXd offdiag(n - 1);
  for (int k = 1; k < n; ++k) offdiag(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  QuadratureRule rule = golub_welsch(offdiag, 2.0);
  // Shift [-1,1] -> [0,1].
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = 0.5 * (rule.nodes[k] + 1.0);
    rule.weights[k] *= 0.5;
  }
  return rule;
}

QuadratureRule gauss_hermite_normal(int n) {
  if (n < 1) throw DomainError("gauss_hermite_normal: need n >= 1");
  // Probabilists' Hermite: b_k = sqrt(k), mu0 = 1 (weight already normalized).
  Eigen::VectorXd offdiag(n - 1);
  for (int k = 1; k < n; ++k) offdiag(k - 1) = std::sqrt(double(k));
  return golub_welsch(offdiag, 1.0);
}

}  // namespace qsg
