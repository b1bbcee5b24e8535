#include "qsg/trotter.hpp"

#include <cmath>
#include <string>

namespace qsg {

namespace {

// e^{s * Op} from the eigendecomposition of the Hermitian operator.
Matrix scaled_exp(const Eigen::SelfAdjointEigenSolver<Matrix>& es, double s) {
  const RealVector scaled = (s * es.eigenvalues()).array().exp().matrix();
  return es.eigenvectors() * scaled.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::SelfAdjointEigenSolver<Matrix> decompose_checked(const Matrix& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success)
    throw NumericError(std::string(what) + ": eigensolver failed, dim " +
                       std::to_string(m.rows()));
  return es;
}

Matrix matrix_power(Matrix base, int k) {
  Matrix result = Matrix::Identity(base.rows(), base.cols());
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k) base = base * base;
  }
  return result;
}

}  // namespace

Matrix trotter_product(const TrotterPlan& plan) {
  if (plan.steps < 1 || plan.steps > (1 << 20))
    throw DomainError("trotter_product: steps must be in [1, 2^20]");
  if (plan.left.entries.rows() != plan.right.entries.rows())
    throw DomainError("trotter_product: operand dimension mismatch");
  const auto es_a = decompose_checked(plan.left.entries, "trotter_product");
  const auto es_b = decompose_checked(plan.right.entries, "trotter_product");
  const double inv_k = 1.0 / plan.steps;
  const Matrix step = scaled_exp(es_a, inv_k) * scaled_exp(es_b, inv_k);
  return matrix_power(step, plan.steps);
}

TrotterErrorCurve trotter_error_curve(const HermitianOperator& a, const HermitianOperator& b,
                                      const std::vector<int>& k_list) {
  if (k_list.empty()) throw DomainError("trotter_error_curve: empty k list");
  for (std::size_t i = 1; i < k_list.size(); ++i)
    if (k_list[i] <= k_list[i - 1]) throw DomainError("trotter_error_curve: k list not ascending");
  const auto es_sum = decompose_checked(a.entries + b.entries, "trotter_error_curve");
  const Matrix exact = scaled_exp(es_sum, 1.0);
  TrotterErrorCurve curve;
  curve.points.reserve(k_list.size());
  for (int k : k_list) {
    const Matrix prod = trotter_product({k, a, b});
    curve.points.emplace_back(k, spectral_norm(prod - exact));
  }
  // Least-squares slope of log(error) vs log(k), ignoring error values at the
  // noise floor (they would fake a flat tail).
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (const auto& [k, err] : curve.points) {
    if (err < 1e-13) continue;
    const double x = std::log(double(k));
    const double y = std::log(err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  curve.fitted_slope = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
  return curve;
}

BoundCheck check_trace_product_bound(const HermitianOperator& x, const HermitianOperator& h,
                                     const std::vector<double>& a) {
  if (a.empty()) throw DomainError("check_trace_product_bound: empty partition");
  double total = 0.0;
  for (double aj : a) {
    if (aj <= 0.0) throw DomainError("check_trace_product_bound: partition entries must be > 0");
    total += aj;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw DomainError("check_trace_product_bound: partition sums to " + std::to_string(total));
  if (x.entries.rows() != h.entries.rows())
    throw DomainError("check_trace_product_bound: dimension mismatch");

  const auto es_h = decompose_checked(h.entries, "check_trace_product_bound");
  // Shift H by its max eigenvalue: every factor e^{a_j (H - mu)} has norm <= 1
  // and the shift multiplies both sides by e^{mu (sum a_j)} = e^{mu}.
  const double mu = es_h.eigenvalues().maxCoeff();
  const Eigen::Index dim = h.entries.rows();
  Matrix prod = Matrix::Identity(dim, dim);
  for (double aj : a) {
    const RealVector ev = (aj * (es_h.eigenvalues().array() - mu)).exp().matrix();
    prod = prod * x.entries *
           (es_h.eigenvectors() * ev.cast<Complex>().asDiagonal() * es_h.eigenvectors().adjoint());
  }
  const double lhs_shifted = std::abs(prod.trace());
  double trace_eh_shifted = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i)
    trace_eh_shifted += std::exp(es_h.eigenvalues()(i) - mu);
  const double rhs_shifted = std::pow(operator_norm(x), double(a.size())) * trace_eh_shifted;
  const double scale = std::exp(mu);
  return BoundCheck{lhs_shifted * scale, rhs_shifted * scale,
                    lhs_shifted <= rhs_shifted * (1.0 + 1e-10)};
}

BoundCheck check_holder_trace(const std::vector<Matrix>& b_list) {
  if (b_list.empty() || b_list.size() % 2 != 0)
    throw DomainError("check_holder_trace: need an even, nonzero number of operators");
  const Eigen::Index dim = b_list.front().rows();
  for (const auto& b : b_list)
    if (b.rows() != dim || b.cols() != dim)
      throw DomainError("check_holder_trace: dimension mismatch");
  const int k = int(b_list.size()) / 2;

  Matrix prod = Matrix::Identity(dim, dim);
  for (const auto& b : b_list) prod = prod * b;
  const double lhs = std::abs(prod.trace());

  double rhs = 1.0;
  for (const auto& b : b_list) {
    const Matrix gram = b * b.adjoint();
    const double tr = matrix_power(gram, k).trace().real();  // PSD power, trace >= 0
    rhs *= std::pow(std::max(tr, 0.0), 1.0 / (2.0 * k));
  }
  return BoundCheck{lhs, rhs, lhs <= rhs * (1.0 + 1e-10) + 1e-300};
}

RatioBoundCheck partition_function_ratio_bound(const DisorderedHamiltonian& ham, double beta,
                                               const CouplingMap& xi, const TermIndex& index) {
  auto it = xi.find(index);
  if (it == xi.end())
    throw DomainError("partition_function_ratio_bound: unknown index " + to_string(index));
  const InteractionTerm* term = nullptr;
  for (const auto& t : ham.terms)
    if (t.index == index) {
      term = &t;
      break;
    }
  if (!term)
    throw DomainError("partition_function_ratio_bound: index " + to_string(index) +
                      " not in model");
  const double log_z = make_gibbs(ham, beta, xi).log_partition;
  CouplingMap dropped = xi;
  dropped[index] = 0.0;
  const double log_z_i = make_gibbs(ham, beta, dropped).log_partition;
  RatioBoundCheck out;
  out.ratio = std::exp(log_z - log_z_i);
  out.bound = std::exp(std::abs(beta * it->second) * operator_norm(term->op));
  out.holds = out.ratio <= out.bound * (1.0 + 1e-10);
  return out;
}

}  // namespace qsg
