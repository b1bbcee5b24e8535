#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsg/disorder.hpp"
#include "qsg/hamiltonians.hpp"
#include "qsg/rng.hpp"
#include "qsg/spin_system.hpp"

namespace qsg {

// Cadlag piecewise-constant trajectory on {-1,+1}^N over [0, beta]: initial
// configuration plus strictly increasing per-site jump times in (0, beta).
struct SpinPath {
  SpinSystem system;
  double beta = 0.0;
  std::vector<int> initial;                // sigma(0), entries +-1
  std::vector<std::vector<double>> jumps;  // per site (1-based -> index 0-based)
};

struct PathMeasureParams {
  double lambda = 0.0;  // per-site flip rate
  double beta = 0.0;    // time horizon
  int n_sites = 0;
};

struct PathAction {
  double value = 0.0;  // zeta(path) for one coupling realization
};

// Per-site Poisson(lambda) arrivals on (0, beta); initial drawn uniformly
// over the 2^N configurations when not supplied.
SpinPath sample_path(const PathMeasureParams& params,
                     const std::optional<std::vector<int>>& initial, std::mt19937_64& gen);

// sigma_site(u) by parity of jumps at times <= u (right-continuous).
int spin_at(const SpinPath& path, int site, double u);

std::vector<int> configuration_at(const SpinPath& path, double u);

// R(sigma, tau) = (1/N) sum_i sigma_i tau_i.
double overlap(const std::vector<int>& sigma, const std::vector<int>& tau);

// zeta(path) = int_0^beta (1/(2 sqrt N)) sum_{ij} g_ij sigma_i(u) sigma_j(u) du,
// evaluated exactly on the piecewise-constant partition (no quadrature).
// The map must cover every ordered pair (i, j).
PathAction path_action(const SpinPath& path, const CouplingMap& couplings);

// int_0^beta int_0^beta R^2(sigma(u), tau(s)) du ds, exact on the product
// partition.
double double_overlap_integral(const SpinPath& path_a, const SpinPath& path_b);

struct CovarianceCheck {
  double analytic = 0.0;       // exact bilinear form sum_ij a_ij b_ij
  double rectangle = 0.0;      // (N/4) double_overlap_integral
  double mc = 0.0;             // sample covariance over fresh Gaussian couplings
  double mc_stderr = 0.0;
  bool agree = false;          // analytic == rectangle to 1e-10 and mc within 3 stderr
};

// The covariance identity E[zeta(a) zeta(b)] = (N/4) int int R^2 as a hard
// equality plus a Monte Carlo corroboration.
CovarianceCheck covariance_check(const SpinPath& path_a, const SpinPath& path_b,
                                 std::size_t n_gaussian_samples, std::mt19937_64& gen);

// Unbiased path estimator of Z = Tr e^{beta(H_dis + lambda sum Sx)} for
// transverse-SK-form models (z-diagonal disorder, uniform transverse field):
//   W = 2^N e^{N beta lambda} e^{zeta(path)} 1{sigma(beta) = sigma(0)},
// paths started uniformly.  Returned mean estimates Z itself.
QuenchedEstimate fk_partition_estimate(const DisorderedHamiltonian& ham, double beta,
                                       const CouplingMap& xi, std::size_t n_paths,
                                       const SeedPolicy& seed, int workers = 1,
                                       bool keep_samples = false);

// Same weighting without the 2^N factor and with fixed endpoints: estimates
// <sigma| e^{beta(H_dis + lambda sum Sx)} |sigma_tilde> in the z-basis.
QuenchedEstimate fk_matrix_element(const DisorderedHamiltonian& ham, double beta,
                                   const CouplingMap& xi, const std::vector<int>& sigma,
                                   const std::vector<int>& sigma_tilde, std::size_t n_paths,
                                   const SeedPolicy& seed, int workers = 1);

struct FkConcentrationProbe {
  std::vector<TailCheckPoint> tail;  // bound 2 exp(-2 u^2 N / beta^2)
  double fk_crosscheck_rel_dev = 0.0;  // |FK estimate - exact| / exact on one replica
  double best_fit_k = 0.0;             // reported, never asserted
};

// Exceedance of the per-site pressure |log Z / N - mean| over Gaussian
// replicas (exact diagonalization per replica; the path estimator is run once
// as a cross-check only).
FkConcentrationProbe fk_concentration_probe(const DisorderedHamiltonian& ham, double beta,
                                            double lambda, std::size_t n_disorder,
                                            std::size_t n_paths,
                                            const std::vector<double>& u_grid,
                                            const SeedPolicy& seed, int workers = 1);

// Line-based text round trip:
//   beta <b> / sites <N> / init s1 .. sN / site <i> t1 t2 ...
std::string path_to_text(const SpinPath& path);
SpinPath path_from_text(const std::string& text);

}  // namespace qsg
