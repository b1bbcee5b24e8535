#pragma once

#include "qsg/hamiltonians.hpp"
#include "qsg/spin_system.hpp"

namespace qsg {

// How the deterministic part enters the exponent.
//   kBetaScaled: Theta = beta * (H0 + sum xi X)   -- the family-display convention
//                (transverse field scales with beta, log Z(N=1) = log 2cosh(beta lambda)).
//   kFixed:      Theta = beta * sum xi X + H0     -- the convention behind the
//                pressure-derivative identity and the interpolation scans,
//                where H0 is held fixed as beta varies.
enum class DeterministicScaling { kBetaScaled, kFixed };

// Eigendecomposition of the full exponent Theta with the shift-stable log
// partition function log Tr e^Theta.
struct GibbsState {
  HermitianOperator hamiltonian_exponent;  // Theta, sign and beta already applied
  RealVector eigenvalues;
  Matrix eigenvectors;  // unitary U, Theta = U diag(eigenvalues) U^dagger
  double log_partition = 0.0;
};

GibbsState make_gibbs(const DisorderedHamiltonian& ham, double beta, const CouplingMap& xi,
                      DeterministicScaling scaling = DeterministicScaling::kBetaScaled);

// Same state from an explicitly assembled exponent (interpolation scans build
// Theta with mixed sqrt(s)/sqrt(t-s) couplings themselves).
GibbsState make_gibbs_from_exponent(HermitianOperator theta);

// log Tr e^Theta without keeping eigenvectors; the Monte Carlo hot path.
// Dispatches to real arithmetic when Theta is exactly real.
double log_trace_exp(const Matrix& theta);

// Tr(A e^Theta) / Tr(e^Theta).  Imaginary residue above 1e-10 is an error.
double thermal_average(const GibbsState& state, const HermitianOperator& a);

// (A,B) = int_0^1 Tr(A e^{u Theta} B e^{(1-u) Theta}) du / Z, evaluated in the
// eigenbasis through the stable two-point kernel e^{(x+y)/2} sinhc((x-y)/2).
double duhamel_two_point(const GibbsState& state, const HermitianOperator& a,
                         const HermitianOperator& b);

// (A,B,C) = int int u Tr(A e^{su Theta} B e^{(1-s)u Theta} C e^{(1-u) Theta}) ds du / Z;
// the kernel is the second divided difference of exp at the eigenvalue triple.
double duhamel_three_point(const GibbsState& state, const HermitianOperator& a,
                           const HermitianOperator& b, const HermitianOperator& c);

// beta * sum_i [(X_i, X_i) - <X_i>^2] for the realized couplings, together
// with the remainder radius 9 beta^2 E|xi|^3 sum_i ||X_i||^3 of the pressure
// derivative expansion.  Uses the kFixed convention (H0 constant in beta).
struct PressureDerivativeTerms {
  double duhamel_sum = 0.0;
  double bound_radius = 0.0;
};

PressureDerivativeTerms pressure_derivative_terms(const DisorderedHamiltonian& ham, double beta,
                                                  const CouplingMap& xi,
                                                  double abs_third_moment);

}  // namespace qsg
