#include "qsg/disorder.hpp"

#include <cmath>
#include <numbers>

#include "qsg/parallel.hpp"
#include "qsg/quadrature.hpp"

namespace qsg {

namespace {

void validate_moments(const DisorderDistribution& dist) {
  if (std::abs(dist.moments.mean) > 1e-12)
    throw DomainError("disorder law " + dist.name + ": mean " +
                      std::to_string(dist.moments.mean) + " != 0");
  if (std::abs(dist.moments.variance - 1.0) > 1e-12)
    throw DomainError("disorder law " + dist.name + ": variance " +
                      std::to_string(dist.moments.variance) + " != 1");
  if (!std::isfinite(dist.moments.abs_third) || dist.moments.abs_third < 0.0)
    throw DomainError("disorder law " + dist.name + ": bad third absolute moment");
}

}  // namespace

DisorderDistribution gaussian_disorder() {
  DisorderDistribution d;
  d.kind = DistKind::kGaussian;
  d.moments = {0.0, 1.0, 2.0 * std::sqrt(2.0 / std::numbers::pi)};
  d.name = "gaussian";
  return d;
}

DisorderDistribution rademacher_disorder() {
  DisorderDistribution d;
  d.kind = DistKind::kRademacher;
  d.moments = {0.0, 1.0, 1.0};
  d.name = "rademacher";
  return d;
}

DisorderDistribution uniform_scaled_disorder() {
  DisorderDistribution d;
  d.kind = DistKind::kUniformScaled;
  d.moments = {0.0, 1.0, 3.0 * std::sqrt(3.0) / 4.0};
  d.name = "uniform";
  return d;
}

DisorderDistribution discrete_disorder(std::vector<double> support,
                                       std::vector<double> weights) {
  if (support.empty() || support.size() != weights.size())
    throw DomainError("discrete disorder: support/weights size mismatch");
  double wsum = 0.0, mean = 0.0, var = 0.0, abs3 = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (weights[i] < 0.0) throw DomainError("discrete disorder: negative weight");
    wsum += weights[i];
    mean += weights[i] * support[i];
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw DomainError("discrete disorder: weights sum to " + std::to_string(wsum));
  for (std::size_t i = 0; i < support.size(); ++i) {
    var += weights[i] * support[i] * support[i];
    abs3 += weights[i] * std::abs(support[i] * support[i] * support[i]);
  }
  DisorderDistribution d;
  d.kind = DistKind::kDiscreteCustom;
  d.moments = {mean, var, abs3};
  d.support = std::move(support);
  d.weights = std::move(weights);
  d.name = "discrete";
  validate_moments(d);
  return d;
}

double draw_one(const DisorderDistribution& dist, std::mt19937_64& gen, NormalDraw& normal) {
  switch (dist.kind) {
    case DistKind::kGaussian:
      return normal(gen);
    case DistKind::kRademacher:
      return uniform01(gen) < 0.5 ? 1.0 : -1.0;
    case DistKind::kUniformScaled:
      return std::sqrt(3.0) * (2.0 * uniform01(gen) - 1.0);
    case DistKind::kDiscreteCustom: {
      const double u = uniform01(gen);
      double acc = 0.0;
      for (std::size_t i = 0; i < dist.support.size(); ++i) {
        acc += dist.weights[i];
        if (u < acc) return dist.support[i];
      }
      return dist.support.back();
    }
  }
  throw DomainError("draw_one: unknown distribution kind");
}

CouplingMap sample_environment(const DisorderDistribution& dist,
                               const std::vector<TermIndex>& indices, std::mt19937_64& gen) {
  if (indices.empty()) throw DomainError("sample_environment: empty index list");
  validate_moments(dist);
  CouplingMap xi;
  NormalDraw normal;
  for (const auto& idx : indices) {
    if (!xi.emplace(idx, draw_one(dist, gen, normal)).second)
      throw DomainError("sample_environment: duplicate index " + to_string(idx));
  }
  return xi;
}

std::vector<double> sample_couplings(const DisorderDistribution& dist, std::size_t count,
                                     std::mt19937_64& gen) {
  std::vector<double> xi(count);
  NormalDraw normal;
  for (std::size_t k = 0; k < count; ++k) xi[k] = draw_one(dist, gen, normal);
  return xi;
}

namespace {

// Shared replica loop: slot r <- log Z(beta, xi_r) with xi_r drawn from the
// (seed, tag, r) stream.
std::vector<double> log_z_replicas(const DisorderedHamiltonian& ham, double beta,
                                   const DisorderDistribution& dist, std::size_t n_samples,
                                   const SeedPolicy& seed, std::uint64_t stream_tag,
                                   int workers,
                                   DeterministicScaling scaling = DeterministicScaling::kBetaScaled) {
  std::vector<double> out(n_samples);
  parallel_for(n_samples, workers, [&](std::size_t r) {
    try {
      auto gen = seed.stream(stream_tag, r);
      std::vector<double> xi = sample_couplings(dist, ham.terms.size(), gen);
      for (double& x : xi) x *= beta;
      Matrix theta;
      assemble_into(ham, xi, theta);
      if (scaling == DeterministicScaling::kBetaScaled && beta != 1.0)
        theta += (beta - 1.0) * ham.deterministic.entries;  // H0 was added once; scale to beta
      out[r] = log_trace_exp(theta);
    } catch (const NumericError& e) {
      // keep enough context to replay the failing draw
      throw NumericError(std::string(e.what()) + " [replica " + std::to_string(r) +
                         ", stream tag " + std::to_string(stream_tag) + "]");
    }
  });
  return out;
}

}  // namespace

QuenchedEstimate quenched_pressure(const DisorderedHamiltonian& ham, double beta,
                                   const DisorderDistribution& dist, std::size_t n_samples,
                                   const SeedPolicy& seed, int workers, bool keep_samples,
                                   DeterministicScaling scaling) {
  if (n_samples < 2) throw DomainError("quenched_pressure: need n_samples >= 2");
  validate_moments(dist);
  std::vector<double> values =
      log_z_replicas(ham, beta, dist, n_samples, seed, kStreamCouplings, workers, scaling);
  const MeanStderr ms = mean_stderr(values);
  QuenchedEstimate est{ms.mean, ms.std_error, n_samples, {}};
  if (keep_samples) est.per_sample = std::move(values);
  return est;
}

UniversalityGap universality_gap(const DisorderedHamiltonian& ham, double beta,
                                 const DisorderDistribution& dist, std::size_t n_samples,
                                 const SeedPolicy& seed, int workers) {
  if (dist.kind == DistKind::kGaussian)
    throw DomainError("universality_gap: comparison law must not be the Gaussian reference");
  validate_moments(dist);
  const double n = double(ham.system.n_sites);
  // Independent environments: distinct streams for the two laws.
  const std::vector<double> with_dist =
      log_z_replicas(ham, beta, dist, n_samples, seed, kStreamCouplings, workers);
  const std::vector<double> with_gauss = log_z_replicas(ham, beta, gaussian_disorder(),
                                                        n_samples, seed, kStreamCouplingsAlt,
                                                        workers);
  const MeanStderr ms_dist = mean_stderr(with_dist);
  const MeanStderr ms_gauss = mean_stderr(with_gauss);
  UniversalityGap out;
  out.alpha_dist = ms_dist.mean / n;
  out.alpha_gauss = ms_gauss.mean / n;
  out.gap_per_site = std::abs(ms_dist.mean - ms_gauss.mean) / n;
  out.bound_per_site = 9.0 * std::pow(std::abs(beta), 3) * dist.moments.abs_third *
                       norm_power_sum(ham, 3.0) / n;
  out.combined_stderr_per_site =
      std::hypot(ms_dist.std_error, ms_gauss.std_error) / n;
  out.gap_le_bound = out.gap_per_site <= out.bound_per_site + 3.0 * out.combined_stderr_per_site;
  return out;
}

FluctuationThirdMoment fluctuation_third_moment(const DisorderedHamiltonian& ham, double beta,
                                                const DisorderDistribution& dist,
                                                std::size_t n_samples, const SeedPolicy& seed,
                                                int workers) {
  if (n_samples < 100) throw DomainError("fluctuation_third_moment: need n_samples >= 100");
  validate_moments(dist);
  const std::vector<double> values =
      log_z_replicas(ham, beta, dist, n_samples, seed, kStreamCouplings, workers);
  const double alpha_hat = mean_stderr(values).mean;
  std::vector<double> cubes(values.size());
  for (std::size_t r = 0; r < values.size(); ++r)
    cubes[r] = std::pow(std::abs(values[r] - alpha_hat), 3);
  const double n3 = std::pow(double(ham.system.n_sites), 3);
  FluctuationThirdMoment out;
  out.third_moment = pairwise_sum(cubes) / double(cubes.size()) / n3;
  out.reference_scale = dist.moments.abs_third * std::pow(std::abs(beta), 3) *
                        std::sqrt(double(ham.terms.size())) * norm_power_sum(ham, 3.0) / n3;
  out.ratio = out.reference_scale > 0.0 ? out.third_moment / out.reference_scale : 0.0;
  return out;
}

std::vector<TailCheckPoint> concentration_tail(const DisorderedHamiltonian& ham, double beta,
                                               std::size_t n_samples,
                                               const std::vector<double>& u_grid,
                                               const SeedPolicy& seed, int workers) {
  for (double u : u_grid)
    if (u < 0.0) throw DomainError("concentration_tail: u grid must be nonnegative");
  const std::vector<double> values = log_z_replicas(ham, beta, gaussian_disorder(), n_samples,
                                                    seed, kStreamCouplings, workers);
  const double center = mean_stderr(values).mean;
  const double denom = beta * beta * norm_power_sum(ham, 2.0);
  std::vector<TailCheckPoint> out;
  out.reserve(u_grid.size());
  for (double u : u_grid) {
    const TailPoint tp = tail_frequency(values, center, u);
    TailCheckPoint pt;
    pt.u = u;
    pt.empirical = tp.empirical;
    pt.std_error = tp.std_error;
    pt.bound = denom > 0.0 ? 2.0 * std::exp(-u * u / denom) : (u == 0.0 ? 2.0 : 0.0);
    pt.holds = pt.empirical <= pt.bound + 3.0 * pt.std_error;
    out.push_back(pt);
  }
  return out;
}

IbpResidual ibp_residual(const DisorderDistribution& dist,
                         const std::function<double(double)>& f,
                         const std::function<double(double)>& f_prime, double f_second_sup) {
  if (!(f_second_sup >= 0.0)) throw DomainError("ibp_residual: f_second_sup must be >= 0");
  validate_moments(dist);
  auto expect = [&](const std::function<double(double)>& h) {
    double acc = 0.0;
    switch (dist.kind) {
      case DistKind::kRademacher:
        acc = 0.5 * h(1.0) + 0.5 * h(-1.0);
        break;
      case DistKind::kDiscreteCustom:
        for (std::size_t i = 0; i < dist.support.size(); ++i)
          acc += dist.weights[i] * h(dist.support[i]);
        break;
      case DistKind::kGaussian: {
        static const QuadratureRule rule = gauss_hermite_normal(128);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * h(rule.nodes[i]);
        break;
      }
      case DistKind::kUniformScaled: {
        static const QuadratureRule rule = gauss_legendre_01(64);
        const double lo = -std::sqrt(3.0), hi = std::sqrt(3.0);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
          acc += rule.weights[i] * h(lo + (hi - lo) * rule.nodes[i]);
        break;
      }
    }
    if (!std::isfinite(acc)) throw DomainError("ibp_residual: non-finite function expectation");
    return acc;
  };
  IbpResidual out;
  const double mean_xi_f = expect([&](double x) { return x * f(x); });
  const double mean_fp = expect(f_prime);
  out.residual = std::abs(mean_xi_f - dist.moments.variance * mean_fp);
  out.bound = 1.5 * f_second_sup * dist.moments.abs_third;
  out.holds = out.residual <= out.bound + 1e-12;
  return out;
}

std::vector<InterpolationPoint> guerra_interpolation_scan(
    const DisorderedHamiltonian& ham, double beta, const DisorderDistribution& dist,
    const std::vector<double>& s_grid, std::size_t n_samples, const SeedPolicy& seed,
    int workers) {
  if (beta <= 0.0) throw DomainError("guerra_interpolation_scan: beta must be > 0");
  if (s_grid.size() < 3) throw DomainError("guerra_interpolation_scan: need >= 3 grid points");
  const double t = beta * beta;
  for (std::size_t j = 0; j < s_grid.size(); ++j) {
    if (s_grid[j] < 0.0 || s_grid[j] > t + 1e-12)
      throw DomainError("guerra_interpolation_scan: s outside [0, t]");
    if (j > 0 && s_grid[j] <= s_grid[j - 1])
      throw DomainError("guerra_interpolation_scan: s grid not ascending");
  }
  validate_moments(dist);
  const std::size_t n_grid = s_grid.size();
  const std::size_t d = ham.terms.size();
  const DisorderDistribution gauss = gaussian_disorder();

  // values[j][r] = log Z at grid point j for replica r; the same (xi, g)
  // realization enters every j (common random numbers).
  std::vector<std::vector<double>> values(n_grid, std::vector<double>(n_samples));
  parallel_for(n_samples, workers, [&](std::size_t r) {
    auto gen_xi = seed.stream(kStreamCouplings, r);
    auto gen_g = seed.stream(kStreamCouplingsAlt, r);
    const std::vector<double> xi = sample_couplings(dist, d, gen_xi);
    const std::vector<double> g = sample_couplings(gauss, d, gen_g);
    std::vector<double> mixed(d);
    Matrix theta;
    for (std::size_t j = 0; j < n_grid; ++j) {
      const double w_xi = std::sqrt(s_grid[j]);
      const double w_g = std::sqrt(std::max(0.0, t - s_grid[j]));
      for (std::size_t k = 0; k < d; ++k) mixed[k] = w_xi * xi[k] + w_g * g[k];
      assemble_into(ham, mixed, theta);
      // H0 enters unscaled: Theta(s) = sqrt(s) xi.X + sqrt(t-s) g.X + H0,
      // and assemble_into already added H0 with weight 1.
      values[j][r] = log_trace_exp(theta);
    }
  });

  const double bound = 9.0 * std::sqrt(t) * dist.moments.abs_third * norm_power_sum(ham, 3.0);
  std::vector<InterpolationPoint> out(n_grid);
  for (std::size_t j = 0; j < n_grid; ++j) {
    const MeanStderr ms = mean_stderr(values[j]);
    out[j].s = s_grid[j];
    out[j].alpha_hat = ms.mean;
    out[j].alpha_stderr = ms.std_error;
    out[j].derivative_bound = bound;
  }
  std::vector<double> slopes(n_samples);
  for (std::size_t j = 1; j + 1 < n_grid; ++j) {
    const double ds = s_grid[j + 1] - s_grid[j - 1];
    for (std::size_t r = 0; r < n_samples; ++r)
      slopes[r] = (values[j + 1][r] - values[j - 1][r]) / ds;
    const MeanStderr ms = mean_stderr(slopes);
    out[j].interior = true;
    out[j].derivative_fd = ms.mean;
    out[j].derivative_stderr = ms.std_error;
    out[j].holds = std::abs(ms.mean) <= bound + 3.0 * ms.std_error;
  }
  return out;
}

}  // namespace qsg
