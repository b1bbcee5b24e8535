#include "qsg/gibbs.hpp"

#include <cmath>
#include <random>
#include <string>

#include "qsg/rng.hpp"

namespace qsg {

namespace {

constexpr double kImagTol = 1e-10;

double logsumexp(const RealVector& v) {
  const double m = v.maxCoeff();
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::exp(v(i) - m);
  return m + std::log(s);
}

// Eigendecomposition with real-arithmetic dispatch for exactly-real input.
void decompose(const Matrix& theta, RealVector* evals, Matrix* evecs) {
  if (is_exactly_real(theta)) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(theta.real());
    if (es.info() != Eigen::Success)
      throw NumericError("make_gibbs: real eigensolver failed, dim " +
                         std::to_string(theta.rows()));
    *evals = es.eigenvalues();
    *evecs = es.eigenvectors().cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(theta);
    if (es.info() != Eigen::Success)
      throw NumericError("make_gibbs: eigensolver failed, dim " + std::to_string(theta.rows()));
    *evals = es.eigenvalues();
    *evecs = es.eigenvectors();
  }
}

// Reconstruction check U diag(l) U^dagger == Theta.  Full product for small
// systems; random-vector residual probes above (same 1e-9 relative tolerance,
// O(dim^2) instead of O(dim^3)).
void check_reconstruction(const Matrix& theta, const RealVector& evals, const Matrix& evecs) {
  const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());
  if (theta.rows() <= 256) {
    const Matrix recon = evecs * evals.cast<Complex>().asDiagonal() * evecs.adjoint();
    const double defect = (recon - theta).norm();
    if (!(defect <= 1e-9 * scale * std::sqrt(double(theta.rows()))))
      throw NumericError("make_gibbs: eigendecomposition reconstruction defect " +
                         std::to_string(defect));
    return;
  }
  std::mt19937_64 gen(0x726563ULL);
  NormalDraw normal;
  for (int probe = 0; probe < 4; ++probe) {
    Eigen::VectorXcd x(theta.rows());
    for (Eigen::Index i = 0; i < theta.rows(); ++i) x(i) = Complex(normal(gen), normal(gen));
    x /= x.norm();
    Eigen::VectorXcd y = evecs.adjoint() * x;
    y = y.cwiseProduct(evals.cast<Complex>());
    const double defect = (evecs * y - theta * x).norm();
    if (!(defect <= 1e-9 * scale))
      throw NumericError("make_gibbs: eigendecomposition residual probe defect " +
                         std::to_string(defect));
  }
}

GibbsState finish_state(HermitianOperator theta) {
  GibbsState state;
  state.hamiltonian_exponent = std::move(theta);
  decompose(state.hamiltonian_exponent.entries, &state.eigenvalues, &state.eigenvectors);
  check_reconstruction(state.hamiltonian_exponent.entries, state.eigenvalues,
                       state.eigenvectors);
  state.log_partition = logsumexp(state.eigenvalues);
  const double max_ev = state.eigenvalues.maxCoeff();
  const double n_log2 = double(state.hamiltonian_exponent.system.n_sites) * std::log(2.0);
  if (!(state.log_partition >= max_ev - 1e-12 &&
        state.log_partition <= max_ev + n_log2 + 1e-12))
    throw NumericError("make_gibbs: log partition " + std::to_string(state.log_partition) +
                       " outside [max eig, max eig + N log 2]");
  return state;
}

double require_real(Complex v, const char* what) {
  if (!(std::abs(v.imag()) <= kImagTol))
    throw NumericError(std::string(what) + ": imaginary residue " + std::to_string(v.imag()));
  return v.real();
}

// sinhc(z) = sinh(z)/z, series branch under the degenerate-gap threshold.
double sinhc(double z, double threshold) {
  if (std::abs(z) < threshold) {
    const double z2 = z * z;
    return 1.0 + z2 / 6.0 * (1.0 + z2 / 20.0 * (1.0 + z2 / 42.0));
  }
  return std::sinh(z) / z;
}

// Gap threshold: 1e-4 of the spectral diameter with a 1e-12 absolute floor.
double gap_threshold(const RealVector& evals) {
  const double diam = evals.maxCoeff() - evals.minCoeff();
  return std::max(1e-4 * diam, 1e-12);
}

// First divided difference of exp at (x, y): e^{(x+y)/2} sinhc((x-y)/2).
double exp_dd1(double x, double y, double threshold) {
  return std::exp(0.5 * (x + y)) * sinhc(0.5 * (x - y), threshold);
}

// Second divided difference of exp at (x, y, z).  Inputs must satisfy
// x <= y <= z and be pre-shifted so that z <= 0 (no overflow).  When the
// triple is within the threshold, a Taylor expansion around the centroid in
// complete homogeneous symmetric polynomials h_j of the deviations:
//   exp[x,y,z] = e^c sum_j h_j(dx,dy,dz) / (j+2)!
// otherwise the stable recurrence (exp[y,z] - exp[x,y]) / (z - x).
double exp_dd2(double x, double y, double z, double threshold) {
  if (z - x < threshold) {
    const double c = (x + y + z) / 3.0;
    const double d1 = x - c, d2 = y - c, d3 = z - c;
    // h_j via the recurrence on power sums would be overkill for j <= 6;
    // expand directly: h_0 = 1, h_1 = e1, h_2 = e1^2 - e2, ...
    const double e1 = d1 + d2 + d3;                   // = 0 by construction
    const double e2 = d1 * d2 + d1 * d3 + d2 * d3;
    const double e3 = d1 * d2 * d3;
    const double h0 = 1.0;
    const double h1 = e1;
    const double h2 = e1 * h1 - e2 * h0;
    const double h3 = e1 * h2 - e2 * h1 + e3 * h0;
    const double h4 = e1 * h3 - e2 * h2 + e3 * h1;
    const double h5 = e1 * h4 - e2 * h3 + e3 * h2;
    const double h6 = e1 * h5 - e2 * h4 + e3 * h3;
    const double series = h0 / 2.0 + h1 / 6.0 + h2 / 24.0 + h3 / 120.0 + h4 / 720.0 +
                          h5 / 5040.0 + h6 / 40320.0;
    return std::exp(c) * series;
  }
  return (exp_dd1(y, z, threshold) - exp_dd1(x, y, threshold)) / (z - x);
}

}  // namespace

GibbsState make_gibbs(const DisorderedHamiltonian& ham, double beta, const CouplingMap& xi,
                      DeterministicScaling scaling) {
  if (!std::isfinite(beta)) throw DomainError("make_gibbs: beta must be finite");
  Matrix sum = scaling == DeterministicScaling::kBetaScaled
                   ? Matrix(beta * ham.deterministic.entries)
                   : ham.deterministic.entries;
  for (const auto& term : ham.terms) {
    auto it = xi.find(term.index);
    if (it == xi.end())
      throw DomainError("make_gibbs: missing coupling for index " + to_string(term.index));
    sum += (beta * it->second) * term.op.entries;
  }
  return finish_state(make_hermitian(ham.system, std::move(sum)));
}

GibbsState make_gibbs_from_exponent(HermitianOperator theta) {
  return finish_state(std::move(theta));
}

double log_trace_exp(const Matrix& theta) {
  RealVector evals;
  if (is_exactly_real(theta)) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(theta.real(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("log_trace_exp: real eigensolver failed");
    evals = es.eigenvalues();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(theta, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("log_trace_exp: eigensolver failed");
    evals = es.eigenvalues();
  }
  return logsumexp(evals);
}

double thermal_average(const GibbsState& state, const HermitianOperator& a) {
  if (a.entries.rows() != state.hamiltonian_exponent.entries.rows())
    throw DomainError("thermal_average: operator dimension mismatch");
  const Matrix au = a.entries * state.eigenvectors;
  Complex acc(0.0, 0.0);
  for (Eigen::Index n = 0; n < state.eigenvalues.size(); ++n) {
    const double w = std::exp(state.eigenvalues(n) - state.log_partition);
    acc += w * state.eigenvectors.col(n).dot(au.col(n));  // <u_n| A |u_n>
  }
  return require_real(acc, "thermal_average");
}

double duhamel_two_point(const GibbsState& state, const HermitianOperator& a,
                         const HermitianOperator& b) {
  const Eigen::Index dim = state.eigenvalues.size();
  if (a.entries.rows() != dim || b.entries.rows() != dim)
    throw DomainError("duhamel_two_point: operator dimension mismatch");
  const Matrix& u = state.eigenvectors;
  const Matrix at = u.adjoint() * a.entries * u;
  const Matrix bt = u.adjoint() * b.entries * u;
  // Shift eigenvalues so exp never overflows; K2 and Z are shifted alike.
  const double mu = state.eigenvalues.maxCoeff();
  const double log_z_shifted = state.log_partition - mu;
  const double threshold = gap_threshold(state.eigenvalues);
  Complex acc(0.0, 0.0);
  for (Eigen::Index m = 0; m < dim; ++m) {
    for (Eigen::Index n = 0; n < dim; ++n) {
      const double x = state.eigenvalues(m) - mu;
      const double y = state.eigenvalues(n) - mu;
      const double k2 = exp_dd1(x, y, threshold) * std::exp(-log_z_shifted);
      acc += at(m, n) * bt(n, m) * k2;
    }
  }
  return require_real(acc, "duhamel_two_point");
}

double duhamel_three_point(const GibbsState& state, const HermitianOperator& a,
                           const HermitianOperator& b, const HermitianOperator& c) {
  const Eigen::Index dim = state.eigenvalues.size();
  if (a.entries.rows() != dim || b.entries.rows() != dim || c.entries.rows() != dim)
    throw DomainError("duhamel_three_point: operator dimension mismatch");
  const Matrix& u = state.eigenvectors;
  const Matrix at = u.adjoint() * a.entries * u;
  const Matrix bt = u.adjoint() * b.entries * u;
  const Matrix ct = u.adjoint() * c.entries * u;
  const double mu = state.eigenvalues.maxCoeff();
  const double inv_z_shifted = std::exp(-(state.log_partition - mu));
  const double threshold = gap_threshold(state.eigenvalues);
  Complex acc(0.0, 0.0);
  for (Eigen::Index m = 0; m < dim; ++m) {
    for (Eigen::Index n = 0; n < dim; ++n) {
      for (Eigen::Index p = 0; p < dim; ++p) {
        double x = state.eigenvalues(m) - mu;
        double y = state.eigenvalues(n) - mu;
        double z = state.eigenvalues(p) - mu;
        if (x > y) std::swap(x, y);
        if (y > z) std::swap(y, z);
        if (x > y) std::swap(x, y);
        const double k3 = exp_dd2(x, y, z, threshold) * inv_z_shifted;
        acc += at(m, n) * bt(n, p) * ct(p, m) * k3;
      }
    }
  }
  return require_real(acc, "duhamel_three_point");
}

PressureDerivativeTerms pressure_derivative_terms(const DisorderedHamiltonian& ham, double beta,
                                                  const CouplingMap& xi,
                                                  double abs_third_moment) {
  if (abs_third_moment < 0.0)
    throw DomainError("pressure_derivative_terms: abs_third_moment must be >= 0");
  PressureDerivativeTerms out;
  out.bound_radius = 9.0 * beta * beta * abs_third_moment * norm_power_sum(ham, 3.0);
  if (beta == 0.0) return out;  // duhamel_sum carries an explicit beta factor
  const GibbsState state = make_gibbs(ham, beta, xi, DeterministicScaling::kFixed);
  double sum = 0.0;
  for (const auto& term : ham.terms) {
    const double avg = thermal_average(state, term.op);
    sum += duhamel_two_point(state, term.op, term.op) - avg * avg;
  }
  out.duhamel_sum = beta * sum;
  return out;
}

}  // namespace qsg
