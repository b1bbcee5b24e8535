#pragma once

#include <vector>

#include "qsg/gibbs.hpp"
#include "qsg/hamiltonians.hpp"
#include "qsg/spin_system.hpp"

namespace qsg {

struct TrotterPlan {
  int steps = 1;  // k
  HermitianOperator left;   // A
  HermitianOperator right;  // B
};

// (e^{A/k} e^{B/k})^k via one eigendecomposition per factor and binary
// powering of the step matrix.
Matrix trotter_product(const TrotterPlan& plan);

struct TrotterErrorCurve {
  std::vector<std::pair<int, double>> points;  // (k, ||product - e^{A+B}||)
  double fitted_slope = 0.0;                   // log-log least squares
};

TrotterErrorCurve trotter_error_curve(const HermitianOperator& a, const HermitianOperator& b,
                                      const std::vector<int>& k_list);

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// |Tr(X e^{a_1 H} X e^{a_2 H} ... X e^{a_n H})| <= ||X||^n Tr e^H for positive
// a summing to 1.
BoundCheck check_trace_product_bound(const HermitianOperator& x, const HermitianOperator& h,
                                     const std::vector<double>& a);

// |Tr prod_{j=1}^{2k} B_j| <= prod_j Tr([B_j B_j^dagger]^k)^{1/2k}.
BoundCheck check_holder_trace(const std::vector<Matrix>& b_list);

struct RatioBoundCheck {
  double ratio = 0.0;
  double bound = 0.0;
  bool holds = false;
};

// Z(beta, xi) / Z with coupling `index` zeroed, against e^{|beta xi_i| ||X_i||}.
RatioBoundCheck partition_function_ratio_bound(const DisorderedHamiltonian& ham, double beta,
                                               const CouplingMap& xi, const TermIndex& index);

}  // namespace qsg
