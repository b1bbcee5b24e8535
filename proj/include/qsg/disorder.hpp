#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qsg/gibbs.hpp"
#include "qsg/hamiltonians.hpp"
#include "qsg/rng.hpp"
#include "qsg/stats.hpp"

namespace qsg {

enum class DistKind { kGaussian, kRademacher, kUniformScaled, kDiscreteCustom };

struct Moments {
  double mean = 0.0;
  double variance = 1.0;
  double abs_third = 0.0;  // E|xi|^3
};

// A coupling law: mean 0, variance 1, finite third absolute moment.
// Gaussian is the reference law g.
struct DisorderDistribution {
  DistKind kind = DistKind::kGaussian;
  Moments moments;
  std::vector<double> support;  // discrete laws only
  std::vector<double> weights;
  std::string name;
};

DisorderDistribution gaussian_disorder();     // E|g|^3 = 2 sqrt(2/pi)
DisorderDistribution rademacher_disorder();   // +-1, E|xi|^3 = 1
DisorderDistribution uniform_scaled_disorder();  // uniform on [-sqrt3, sqrt3], E|xi|^3 = 3 sqrt(3)/4
// Arbitrary finite support; validates mean 0 / variance 1 to 1e-12 and
// computes the third absolute moment exactly.
DisorderDistribution discrete_disorder(std::vector<double> support, std::vector<double> weights);

double draw_one(const DisorderDistribution& dist, std::mt19937_64& gen, NormalDraw& normal);

// One i.i.d. draw per index, in the given order, from the given stream.
CouplingMap sample_environment(const DisorderDistribution& dist,
                               const std::vector<TermIndex>& indices, std::mt19937_64& gen);

// Hot-path form: draws in ham.terms order.
std::vector<double> sample_couplings(const DisorderDistribution& dist, std::size_t count,
                                     std::mt19937_64& gen);

struct QuenchedEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::vector<double> per_sample;  // kept only when requested
};

// Monte Carlo over disorder replicas of log Z(beta, xi); replica r's couplings
// come from stream (master_seed, kStreamCouplings, r), so results do not
// depend on worker count.  `scaling` picks the exponent convention (the
// derivative-in-beta experiments need H0 held fixed).
QuenchedEstimate quenched_pressure(const DisorderedHamiltonian& ham, double beta,
                                   const DisorderDistribution& dist, std::size_t n_samples,
                                   const SeedPolicy& seed, int workers = 1,
                                   bool keep_samples = false,
                                   DeterministicScaling scaling = DeterministicScaling::kBetaScaled);

struct UniversalityGap {
  double gap_per_site = 0.0;
  double bound_per_site = 0.0;
  double combined_stderr_per_site = 0.0;
  double alpha_dist = 0.0;  // per-site quenched pressure under dist
  double alpha_gauss = 0.0; // per-site quenched pressure under the Gaussian reference
  bool gap_le_bound = false;
};

// |alpha(beta,xi) - alpha(beta,g)|/N against 9|beta|^3 E|xi|^3 sum||X||^3 / N,
// independent environments for the two laws.
UniversalityGap universality_gap(const DisorderedHamiltonian& ham, double beta,
                                 const DisorderDistribution& dist, std::size_t n_samples,
                                 const SeedPolicy& seed, int workers = 1);

struct FluctuationThirdMoment {
  double third_moment = 0.0;     // E|log Z - alpha|^3 / N^3 (MC)
  double reference_scale = 0.0;  // E|xi|^3 |beta|^3 sqrt(d) sum||X||^3 / N^3
  double ratio = 0.0;            // reported, never asserted: the constant is unspecified
};

FluctuationThirdMoment fluctuation_third_moment(const DisorderedHamiltonian& ham, double beta,
                                                const DisorderDistribution& dist,
                                                std::size_t n_samples, const SeedPolicy& seed,
                                                int workers = 1);

struct TailCheckPoint {
  double u = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;  // binomial
  double bound = 0.0;
  bool holds = false;
};

// Gaussian-disorder exceedance of |log Z - alpha| at each u against the bound
// 2 exp(-u^2 / (beta^2 sum||X||^2)).
std::vector<TailCheckPoint> concentration_tail(const DisorderedHamiltonian& ham, double beta,
                                               std::size_t n_samples,
                                               const std::vector<double>& u_grid,
                                               const SeedPolicy& seed, int workers = 1);

struct IbpResidual {
  double residual = 0.0;
  double bound = 0.0;
  bool holds = false;
};

// |E[xi F(xi)] - E[xi^2] E[F'(xi)]| against (3/2) ||F''||_inf E|xi|^3.
// Discrete laws are summed exactly; Gaussian uses 128-point Gauss-Hermite;
// the scaled-uniform law uses 64-point Gauss-Legendre on its support.
IbpResidual ibp_residual(const DisorderDistribution& dist,
                         const std::function<double(double)>& f,
                         const std::function<double(double)>& f_prime, double f_second_sup);

struct InterpolationPoint {
  double s = 0.0;
  double alpha_hat = 0.0;
  double alpha_stderr = 0.0;
  bool interior = false;
  double derivative_fd = 0.0;      // interior points only
  double derivative_stderr = 0.0;  // paired (common-random-number) stderr
  double derivative_bound = 0.0;
  bool holds = true;               // vacuously true at endpoints
};

// Quenched pressure of the interpolating exponent
//   Theta(s) = sqrt(s) sum xi_I X_I + sqrt(t-s) sum g_I X_I + H0,   t = beta^2,
// on the given s-grid; the same (xi, g) realizations are used at every s
// (common random numbers), and centered finite-difference slopes at interior
// points are checked against 9 sqrt(t) E|xi|^3 sum||X||^3.
std::vector<InterpolationPoint> guerra_interpolation_scan(
    const DisorderedHamiltonian& ham, double beta, const DisorderDistribution& dist,
    const std::vector<double>& s_grid, std::size_t n_samples, const SeedPolicy& seed,
    int workers = 1);

}  // namespace qsg
