#include "qsg/hamiltonians.hpp"

#include <cmath>
#include <iostream>
#include <set>

namespace qsg {

std::string to_string(const TermIndex& idx) {
  std::string s = "(";
  for (std::size_t k = 0; k < idx.sites.size(); ++k) {
    if (k) s += ",";
    s += std::to_string(idx.sites[k]);
  }
  if (idx.axis) {
    switch (*idx.axis) {
      case PauliAxis::X: s += ";x"; break;
      case PauliAxis::Y: s += ";y"; break;
      case PauliAxis::Z: s += ";z"; break;
    }
  }
  return s + ")";
}

void validate(const PSpinSpec& spec) {
  const int r_max = int(spec.coefficients.size());
  if (r_max < 1) throw DomainError("p-spin spec: empty coefficient list");
  if (r_max > 3) throw CapacityError("p-spin spec: r_max > 3 not supported at desk scale");
  bool any = false;
  for (double a : spec.coefficients) any = any || a != 0.0;
  if (!any) throw DomainError("p-spin spec: all coefficients zero");
  if (spec.require_even) {
    for (int r = 1; r <= r_max; r += 2)
      if (spec.coefficients[r - 1] != 0.0)
        throw DomainError("p-spin spec: evenness requested but a_" + std::to_string(r) +
                          " != 0");
  }
  // Convexity of f(q) = sum a_r^2 q^r on [-1,1] via second differences.
  auto f = [&](double q) {
    double v = 0.0, qp = q;
    for (int r = 1; r <= r_max; ++r, qp *= q) v += spec.coefficients[r - 1] * spec.coefficients[r - 1] * qp;
    return v;
  };
  const double h = 1e-3;
  for (double q = -1.0 + h; q <= 1.0 - h; q += h) {
    const double d2 = f(q - h) - 2.0 * f(q) + f(q + h);
    if (d2 < -1e-12)
      throw DomainError("p-spin spec: sum a_r^2 q^r not convex near q = " + std::to_string(q));
  }
}

namespace {

// Diagonal of prod_k Sz_{i_k} at basis index b (sites may repeat).
double sz_product(const SpinSystem& sys, const std::vector<int>& sites, Eigen::Index b) {
  double v = 1.0;
  for (int s : sites) v *= spin_of(sys, b, s);
  return v;
}

HermitianOperator zero_operator(const SpinSystem& sys) {
  return HermitianOperator{sys, Matrix::Zero(sys.dim, sys.dim)};
}

void check_unique_indices(const std::vector<InteractionTerm>& terms) {
  std::set<TermIndex> seen;
  for (const auto& t : terms)
    if (!seen.insert(t.index).second)
      throw DomainError("duplicate interaction index " + to_string(t.index));
}

}  // namespace

DisorderedHamiltonian build_transverse_sk(const SpinSystem& sys, double lambda) {
  if (lambda < 0.0) throw DomainError("transverse SK: lambda must be >= 0");
  if (lambda == 0.0)
    std::cerr << "note: transverse SK with lambda = 0 is classical (diagonal)\n";
  const double scale = 1.0 / (2.0 * std::sqrt(double(sys.n_sites)));

  Matrix h0 = Matrix::Zero(sys.dim, sys.dim);
  for (int j = 1; j <= sys.n_sites; ++j) h0 += lambda * single_site(sys, j, PauliAxis::X).entries;

  DisorderedHamiltonian ham{sys, make_hermitian(sys, std::move(h0)), {},
                            SignConvention::kMinusBeta};
  ham.terms.reserve(std::size_t(sys.n_sites) * sys.n_sites);
  for (int i = 1; i <= sys.n_sites; ++i) {
    for (int j = 1; j <= sys.n_sites; ++j) {
      Matrix m = Matrix::Zero(sys.dim, sys.dim);
      for (Eigen::Index b = 0; b < sys.dim; ++b)
        m(b, b) = scale * spin_of(sys, b, i) * spin_of(sys, b, j);
      ham.terms.push_back({TermIndex{{i, j}, {}}, HermitianOperator{sys, std::move(m)}});
    }
  }
  check_unique_indices(ham.terms);
  return ham;
}

DisorderedHamiltonian build_heisenberg(const SpinSystem& sys, double alpha, double gamma) {
  if (!std::isfinite(alpha) || !std::isfinite(gamma))
    throw DomainError("heisenberg: alpha/gamma must be finite");
  const double scale = 1.0 / (2.0 * std::sqrt(double(sys.n_sites)));

  DisorderedHamiltonian ham{sys, zero_operator(sys), {}, SignConvention::kMinusBeta};
  ham.terms.reserve(std::size_t(sys.n_sites) * sys.n_sites);
  for (int i = 1; i <= sys.n_sites; ++i) {
    for (int j = 1; j <= sys.n_sites; ++j) {
      Matrix m = Matrix::Zero(sys.dim, sys.dim);
      if (i == j) {
        // Sz^2 = Sx^2 = Sy^2 = I on one site.
        m.diagonal().setConstant(scale * (1.0 + alpha + gamma));
      } else {
        const Eigen::Index mask = (Eigen::Index(1) << site_bit(sys, i)) |
                                  (Eigen::Index(1) << site_bit(sys, j));
        for (Eigen::Index b = 0; b < sys.dim; ++b) {
          const double szz = double(spin_of(sys, b, i)) * spin_of(sys, b, j);
          m(b, b) = scale * szz;
          // Sx_i Sx_j contributes +1 on the double flip, Sy_i Sy_j contributes
          // -sigma_i sigma_j (each Y gives a factor i*sigma).
          m(b ^ mask, b) = scale * (alpha - gamma * szz);
        }
      }
      // Exactly real-symmetric by construction: the mirror entry (b, b^mask)
      // is written with the same value (flipping both spins keeps szz), so the
      // make_hermitian passes would be pure overhead at 2^N scale.
      ham.terms.push_back({TermIndex{{i, j}, {}}, HermitianOperator{sys, std::move(m)}});
    }
  }
  check_unique_indices(ham.terms);
  return ham;
}

DisorderedHamiltonian build_heisenberg_xyz(const SpinSystem& sys) {
  const double scale = 1.0 / (2.0 * std::sqrt(double(sys.n_sites)));
  DisorderedHamiltonian ham{sys, zero_operator(sys), {}, SignConvention::kMinusBeta};
  ham.terms.reserve(3 * std::size_t(sys.n_sites) * sys.n_sites);
  for (PauliAxis axis : {PauliAxis::X, PauliAxis::Y, PauliAxis::Z}) {
    for (int i = 1; i <= sys.n_sites; ++i) {
      for (int j = 1; j <= sys.n_sites; ++j) {
        Matrix m = Matrix::Zero(sys.dim, sys.dim);
        if (i == j) {
          m.diagonal().setConstant(scale);
        } else if (axis == PauliAxis::Z) {
          for (Eigen::Index b = 0; b < sys.dim; ++b)
            m(b, b) = scale * spin_of(sys, b, i) * spin_of(sys, b, j);
        } else {
          const Eigen::Index mask = (Eigen::Index(1) << site_bit(sys, i)) |
                                    (Eigen::Index(1) << site_bit(sys, j));
          for (Eigen::Index b = 0; b < sys.dim; ++b) {
            const double v = axis == PauliAxis::X
                                 ? 1.0
                                 : -double(spin_of(sys, b, i)) * spin_of(sys, b, j);
            m(b ^ mask, b) = scale * v;
          }
        }
        // Exactly real-symmetric by construction, as in build_heisenberg.
        ham.terms.push_back({TermIndex{{i, j}, axis}, HermitianOperator{sys, std::move(m)}});
      }
    }
  }
  check_unique_indices(ham.terms);
  return ham;
}

DisorderedHamiltonian build_pspin(const SpinSystem& sys, const PSpinSpec& spec) {
  validate(spec);
  const int r_max = int(spec.coefficients.size());
  std::size_t term_count = 0;
  for (int r = 1; r <= r_max; ++r)
    if (spec.coefficients[r - 1] != 0.0) {
      std::size_t tuples = 1;
      for (int k = 0; k < r; ++k) tuples *= std::size_t(sys.n_sites);
      term_count += tuples;
    }
  if (term_count > 1000000)
    throw CapacityError("p-spin: term count " + std::to_string(term_count) + " exceeds 10^6");

  DisorderedHamiltonian ham{sys, zero_operator(sys), {}, SignConvention::kMinusBeta};
  ham.terms.reserve(term_count);
  for (int r = 1; r <= r_max; ++r) {
    const double a_r = spec.coefficients[r - 1];
    if (a_r == 0.0) continue;
    const double coeff = a_r * std::pow(double(sys.n_sites), (1.0 - r) / 2.0);
    std::vector<int> tuple(r, 1);
    for (;;) {
      Matrix m = Matrix::Zero(sys.dim, sys.dim);
      for (Eigen::Index b = 0; b < sys.dim; ++b) m(b, b) = coeff * sz_product(sys, tuple, b);
      ham.terms.push_back({TermIndex{tuple, {}}, HermitianOperator{sys, std::move(m)}});
      // Advance the r-digit odometer over {1..N}^r.
      int k = r - 1;
      while (k >= 0 && tuple[k] == sys.n_sites) tuple[k--] = 1;
      if (k < 0) break;
      ++tuple[k];
    }
  }
  check_unique_indices(ham.terms);
  return ham;
}

DisorderedHamiltonian compose(DisorderedHamiltonian ham, const HermitianOperator& extra) {
  if (extra.entries.rows() != ham.system.dim)
    throw DomainError("compose: operator dimension mismatch");
  ham.deterministic = make_hermitian(ham.system, ham.deterministic.entries + extra.entries);
  return ham;
}

HermitianOperator assemble(const DisorderedHamiltonian& ham, const CouplingMap& xi) {
  Matrix sum = ham.deterministic.entries;
  for (const auto& term : ham.terms) {
    auto it = xi.find(term.index);
    if (it == xi.end())
      throw DomainError("assemble: missing coupling for index " + to_string(term.index));
    sum += it->second * term.op.entries;
  }
  return make_hermitian(ham.system, std::move(sum));
}

void assemble_into(const DisorderedHamiltonian& ham, std::span<const double> xi_by_term,
                   Matrix& out) {
  if (xi_by_term.size() != ham.terms.size())
    throw DomainError("assemble_into: coupling count " + std::to_string(xi_by_term.size()) +
                      " != term count " + std::to_string(ham.terms.size()));
  out = ham.deterministic.entries;
  for (std::size_t k = 0; k < ham.terms.size(); ++k)
    out += xi_by_term[k] * ham.terms[k].op.entries;
}

double norm_power_sum(const DisorderedHamiltonian& ham, double p) {
  if (p < 1.0) throw DomainError("norm_power_sum: p must be >= 1");
  double sum = 0.0;
  for (const auto& term : ham.terms) sum += std::pow(operator_norm(term.op), p);
  return sum;
}

}  // namespace qsg
