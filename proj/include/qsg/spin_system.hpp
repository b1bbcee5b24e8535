#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "qsg/errors.hpp"

namespace qsg {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr int kDefaultSiteCap = 12;
inline constexpr double kHermitianTol = 1e-12;

// N spin-1/2 sites; Hilbert space dimension 2^N.
//
// Basis convention: index b in [0, 2^N) encodes the classical configuration
// sigma in {-1,+1}^N with site s stored in bit (N - s) of b, i.e. site 1 is the
// most significant bit (Kronecker order site1 x site2 x ... x siteN).
// Bit value 0 means sigma_s = +1, bit value 1 means sigma_s = -1.
struct SpinSystem {
  int n_sites = 0;
  Eigen::Index dim = 0;
};

SpinSystem make_spin_system(int n_sites, int site_cap = kDefaultSiteCap);

// Bit position of site `site` (1-based) inside a basis index.
inline int site_bit(const SpinSystem& sys, int site) { return sys.n_sites - site; }

// Spin value of site `site` in basis state b.
inline int spin_of(const SpinSystem& sys, Eigen::Index b, int site) {
  return ((b >> site_bit(sys, site)) & 1) ? -1 : +1;
}

enum class PauliAxis { X, Y, Z };

// Dense complex Hermitian matrix on the full 2^N space.  Construction
// symmetrizes (M + M^dagger)/2 and rejects inputs further than 1e-12
// (per entry) from Hermitian.
struct HermitianOperator {
  SpinSystem system;
  Matrix entries;
};

HermitianOperator make_hermitian(const SpinSystem& sys, Matrix entries);

// I x ... x Pauli(axis) x ... x I with the Pauli matrix (eigenvalues +-1) at
// position `site` (1-based).
HermitianOperator single_site(const SpinSystem& sys, int site, PauliAxis axis);

// Plain matrix product of the operands in order; result need not be Hermitian.
Matrix multiply_chain(const std::vector<HermitianOperator>& ops);

// Largest absolute eigenvalue.  Operators whose off-diagonal part pairs basis
// states two by two (every built-in interaction term does) are reduced to
// closed-form 2x2 blocks; anything else goes through the eigensolver.
double operator_norm(const HermitianOperator& op);

// Spectral norm of an arbitrary complex matrix, sqrt(lambda_max(M^dagger M)).
double spectral_norm(const Matrix& m);

// True iff every entry has exactly zero imaginary part.  The built-in model
// families are all real in the z-basis, which lets Gibbs-layer eigensolves run
// in real arithmetic.
bool is_exactly_real(const Matrix& m);

}  // namespace qsg
