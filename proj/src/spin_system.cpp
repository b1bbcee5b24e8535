#include "qsg/spin_system.hpp"

#include <cmath>
#include <string>

namespace qsg {

SpinSystem make_spin_system(int n_sites, int site_cap) {
  if (n_sites < 1) throw DomainError("n_sites must be >= 1, got " + std::to_string(n_sites));
  if (n_sites > site_cap)
    throw CapacityError("n_sites " + std::to_string(n_sites) + " exceeds site cap " +
                        std::to_string(site_cap));
  return SpinSystem{n_sites, Eigen::Index(1) << n_sites};
}

HermitianOperator make_hermitian(const SpinSystem& sys, Matrix entries) {
  if (entries.rows() != sys.dim || entries.cols() != sys.dim)
    throw DomainError("operator shape " + std::to_string(entries.rows()) + "x" +
                      std::to_string(entries.cols()) + " does not match system dim " +
                      std::to_string(sys.dim));
  const double defect = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
  if (!(defect <= 2.0 * kHermitianTol))
    throw NumericError("matrix is not Hermitian: max |M - M^dagger| entry = " +
                       std::to_string(defect));
  // Symmetrize so stored entries are exactly Hermitian.
  Matrix sym = (entries + entries.adjoint()) / 2.0;
  return HermitianOperator{sys, std::move(sym)};
}

HermitianOperator single_site(const SpinSystem& sys, int site, PauliAxis axis) {
  if (site < 1 || site > sys.n_sites)
    throw DomainError("site " + std::to_string(site) + " out of range 1.." +
                      std::to_string(sys.n_sites));
  const Eigen::Index mask = Eigen::Index(1) << site_bit(sys, site);
  Matrix m = Matrix::Zero(sys.dim, sys.dim);
  for (Eigen::Index b = 0; b < sys.dim; ++b) {
    switch (axis) {
      case PauliAxis::Z:
        m(b, b) = (b & mask) ? -1.0 : +1.0;
        break;
      case PauliAxis::X:
        m(b ^ mask, b) = 1.0;
        break;
      case PauliAxis::Y:
        // |0><1| block gets -i, |1><0| gets +i (bit 0 = spin up = sigma +1).
        m(b ^ mask, b) = (b & mask) ? Complex(0.0, -1.0) : Complex(0.0, +1.0);
        break;
    }
  }
  return HermitianOperator{sys, std::move(m)};
}

Matrix multiply_chain(const std::vector<HermitianOperator>& ops) {
  if (ops.empty()) throw DomainError("multiply_chain: empty operator list");
  const Eigen::Index dim = ops.front().entries.rows();
  for (const auto& op : ops)
    if (op.entries.rows() != dim)
      throw DomainError("multiply_chain: operand dimension mismatch");
  Matrix prod = ops.front().entries;
  for (std::size_t i = 1; i < ops.size(); ++i) prod = prod * ops[i].entries;
  return prod;
}

namespace {

// Exact norm for Hermitian matrices whose off-diagonal entries only couple
// basis states in disjoint pairs: each pair (i, j) forms a closed 2x2 block
// [[a, c], [conj(c), b]] with extremal |eigenvalue| = |(a+b)/2| + hypot((a-b)/2, |c|).
// Returns false if the structure does not hold.
bool paired_block_norm(const Matrix& m, double* out) {
  const Eigen::Index dim = m.rows();
  std::vector<Eigen::Index> partner(dim, -1);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (i == j || m(i, j) == Complex(0.0, 0.0)) continue;
      if (partner[j] != -1) return false;  // second off-diagonal entry in this column
      partner[j] = i;
    }
  }
  for (Eigen::Index j = 0; j < dim; ++j)
    if (partner[j] != -1 && partner[partner[j]] != j) return false;
  double norm = 0.0;
  for (Eigen::Index j = 0; j < dim; ++j) {
    const Eigen::Index i = partner[j];
    if (i == -1) {
      norm = std::max(norm, std::abs(m(j, j).real()));
    } else if (i > j) {
      const double a = m(j, j).real();
      const double b = m(i, i).real();
      const double c = std::abs(m(i, j));
      norm = std::max(norm, std::abs(a + b) / 2.0 + std::hypot((a - b) / 2.0, c));
    }
  }
  *out = norm;
  return true;
}

}  // namespace

double operator_norm(const HermitianOperator& op) {
  double fast = 0.0;
  if (paired_block_norm(op.entries, &fast)) return fast;
  if (is_exactly_real(op.entries)) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(op.entries.real(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw NumericError("operator_norm: real eigensolver failed, dim " +
                         std::to_string(op.entries.rows()));
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(op.entries, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericError("operator_norm: eigensolver failed, dim " +
                       std::to_string(op.entries.rows()));
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Matrix gram = m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("spectral_norm: eigensolver failed");
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

bool is_exactly_real(const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (m(i, j).imag() != 0.0) return false;
  return true;
}

}  // namespace qsg
