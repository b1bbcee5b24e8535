#pragma once

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qsg/spin_system.hpp"

namespace qsg {

// Label of one disorder coupling: the sites it touches plus an optional axis
// tag (used by the xyz family, where (i,j) appears once per axis).
struct TermIndex {
  std::vector<int> sites;
  std::optional<PauliAxis> axis;

  auto operator<=>(const TermIndex&) const = default;
};

std::string to_string(const TermIndex& idx);

struct InteractionTerm {
  TermIndex index;
  HermitianOperator op;
};

// Which side of the exponent the stored operators live on: the stored
// deterministic part and terms are always exactly what gets multiplied by
// beta and exponentiated; this flag only records whether that operator is
// +H (partition function written Tr e^{+beta H}) or -H (models displayed
// through -H with Gibbs weight e^{-beta H}).  Data, not behavior.
enum class SignConvention { kPlusBeta, kMinusBeta };

struct DisorderedHamiltonian {
  SpinSystem system;
  HermitianOperator deterministic;           // H0
  std::vector<InteractionTerm> terms;        // {X_I}
  SignConvention sign_convention = SignConvention::kPlusBeta;
};

using CouplingMap = std::map<TermIndex, double>;

struct PSpinSpec {
  std::vector<double> coefficients;  // a_r, r = 1..coefficients.size() (<= 3)
  bool require_even = false;
};

// Validates the spec: r_max <= 3, not all coefficients zero, evenness when
// requested, and convexity of q -> sum a_r^2 q^r sampled on a 1e-3 grid.
void validate(const PSpinSpec& spec);

// -H = (1/(2 sqrt N)) sum_{i,j} xi_{ij} Sz_i Sz_j + lambda sum_j Sx_j.
// Terms over all ordered pairs (i,j), including i = j.  lambda = 0 is
// accepted (model degenerates to a classical one; a note goes to stderr).
DisorderedHamiltonian build_transverse_sk(const SpinSystem& sys, double lambda);

// -H = (1/(2 sqrt N)) sum_{i,j} xi_{ij} [Sz_i Sz_j + alpha Sx_i Sx_j + gamma Sy_i Sy_j].
DisorderedHamiltonian build_heisenberg(const SpinSystem& sys, double alpha, double gamma);

// -H = (1/(2 sqrt N)) sum_{axis} sum_{i,j} xi^axis_{ij} S^axis_i S^axis_j;
// three independent coupling families tagged by axis.
DisorderedHamiltonian build_heisenberg_xyz(const SpinSystem& sys);

// -H_dis = sum_r a_r N^((1-r)/2) sum_{i_1..i_r} xi_{i_1..i_r} prod_k Sz_{i_k};
// recovers the transverse-SK disorder family at a_2 = 1/2.  H0 = 0.
DisorderedHamiltonian build_pspin(const SpinSystem& sys, const PSpinSpec& spec);

// Same model with extra added onto the deterministic part.
DisorderedHamiltonian compose(DisorderedHamiltonian ham, const HermitianOperator& extra);

// H0 + sum_I xi_I X_I as a validated Hermitian operator.  Every term index
// must be present in xi.
HermitianOperator assemble(const DisorderedHamiltonian& ham, const CouplingMap& xi);

// Fast path used by Monte Carlo loops: couplings given in ham.terms order.
// Writes H0 + sum_I xi[I] X_I into out (resized as needed).
void assemble_into(const DisorderedHamiltonian& ham, std::span<const double> xi_by_term,
                   Matrix& out);

// sum_I ||X_I||^p (p >= 1); the norm sums entering every bound.
double norm_power_sum(const DisorderedHamiltonian& ham, double p);

}  // namespace qsg
