#pragma once

#include <vector>

namespace qsg {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre on [0, 1] (Golub-Welsch on the Jacobi matrix,
// shifted from [-1, 1]).  Exact for polynomials of degree <= 2n-1.
QuadratureRule gauss_legendre_01(int n);

// n-point Gauss-Hermite for the standard normal weight: integrates
// f against exp(-x^2/2)/sqrt(2 pi), i.e. E[f(g)] ~= sum w_i f(x_i).
QuadratureRule gauss_hermite_normal(int n);

}  // namespace qsg
