#include "qsg/feynman_kac.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <utility>

#include "qsg/errors.hpp"
#include "qsg/gibbs.hpp"
#include "qsg/parallel.hpp"
#include "qsg/stats.hpp"

namespace qsg {

namespace {

void check_configuration(const std::vector<int>& sigma, int n_sites, const char* what) {
  if (static_cast<int>(sigma.size()) != n_sites) {
    throw DomainError(std::string(what) + ": expected " + std::to_string(n_sites) + " spins");
  }
  for (int s : sigma) {
    if (s != 1 && s != -1) throw DomainError(std::string(what) + ": spins must be +-1");
  }
}

void check_path(const SpinPath& path) {
  const int n = path.system.n_sites;
  if (!(path.beta > 0.0)) throw DomainError("path horizon must be positive");
  check_configuration(path.initial, n, "path initial configuration");
  if (static_cast<int>(path.jumps.size()) != n) {
    throw DomainError("path needs one jump list per site");
  }
  for (const auto& times : path.jumps) {
    double prev = 0.0;
    for (double t : times) {
      if (!(t > prev) || !(t < path.beta)) {
        throw DomainError("jump times must be strictly increasing inside (0, beta)");
      }
      prev = t;
    }
  }
}

// Basis index of a configuration under the usual bit layout (bit 0 <-> +1).
Eigen::Index basis_index(const SpinSystem& sys, const std::vector<int>& sigma) {
  Eigen::Index b = 0;
  for (int site = 1; site <= sys.n_sites; ++site) {
    if (sigma[static_cast<std::size_t>(site - 1)] == -1) {
      b |= Eigen::Index{1} << site_bit(sys, site);
    }
  }
  return b;
}

// All jumps of all sites merged into time order.
std::vector<std::pair<double, int>> merged_events(const SpinPath& path) {
  std::vector<std::pair<double, int>> events;
  std::size_t total = 0;
  for (const auto& times : path.jumps) total += times.size();
  events.reserve(total);
  for (int site = 1; site <= path.system.n_sites; ++site) {
    for (double t : path.jumps[static_cast<std::size_t>(site - 1)]) events.emplace_back(t, site);
  }
  std::sort(events.begin(), events.end());
  return events;
}

struct Segment {
  double len = 0.0;
  std::vector<int> config;
};

std::vector<Segment> path_segments(const SpinPath& path) {
  const auto events = merged_events(path);
  std::vector<Segment> segments;
  segments.reserve(events.size() + 1);
  std::vector<int> config = path.initial;
  double prev = 0.0;
  for (const auto& [t, site] : events) {
    segments.push_back({t - prev, config});
    config[static_cast<std::size_t>(site - 1)] *= -1;
    prev = t;
  }
  segments.push_back({path.beta - prev, std::move(config)});
  return segments;
}

// Time-integrated pair products a_ij = (1/(2 sqrt N)) int sigma_i sigma_j du,
// the coefficients of zeta as a linear form in the couplings.
Eigen::MatrixXd integrated_pair_products(const SpinPath& path) {
  const int n = path.system.n_sites;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& seg : path_segments(path)) {
    if (seg.len == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        a(i, j) += seg.len * seg.config[static_cast<std::size_t>(i)] *
                   seg.config[static_cast<std::size_t>(j)];
      }
    }
  }
  return a / (2.0 * std::sqrt(static_cast<double>(n)));
}

// The family the path estimator applies to: every disorder term diagonal in
// the z-basis and a deterministic part that is exactly lambda sum_j Sx_j.
// Returns lambda.
double transverse_rate(const DisorderedHamiltonian& ham) {
  const SpinSystem& sys = ham.system;
  const Matrix& h0 = ham.deterministic.entries;
  if (sys.n_sites < 1) throw DomainError("path estimator needs at least one site");
  const double lambda = h0(Eigen::Index{1} << site_bit(sys, 1), 0).real();
  const double tol = 1e-12 * std::max(1.0, std::abs(lambda));
  for (Eigen::Index b = 0; b < sys.dim; ++b) {
    for (Eigen::Index a = 0; a < sys.dim; ++a) {
      const bool flip = __builtin_popcountll(static_cast<unsigned long long>(a ^ b)) == 1;
      const Complex expected = flip ? Complex(lambda, 0.0) : Complex(0.0, 0.0);
      if (std::abs(h0(a, b) - expected) > tol) {
        throw DomainError("deterministic part is not a uniform transverse field");
      }
    }
  }
  if (lambda < 0.0) throw DomainError("transverse rate must be nonnegative");
  return lambda;
}

// Diagonal of sum_I xi_I X_I; rejects terms with off-diagonal weight.
Eigen::VectorXd diagonal_energy(const DisorderedHamiltonian& ham, const CouplingMap& xi) {
  const Eigen::Index dim = ham.system.dim;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
  for (const auto& term : ham.terms) {
    const auto it = xi.find(term.index);
    if (it == xi.end()) {
      throw DomainError("missing coupling for term " + to_string(term.index));
    }
    const Matrix& m = term.op.entries;
    for (Eigen::Index b = 0; b < dim; ++b) {
      for (Eigen::Index a = 0; a < dim; ++a) {
        if (a != b && std::abs(m(a, b)) > 1e-14) {
          throw DomainError("term " + to_string(term.index) + " is not z-diagonal");
        }
      }
    }
    diag += it->second * m.diagonal().real();
  }
  return diag;
}

// One path's action against a precomputed diagonal energy, plus whether the
// path closes.  Walks the merged jump sequence flipping one bit at a time.
struct ActionResult {
  double action = 0.0;
  bool closed = false;
};

ActionResult diagonal_action(const SpinPath& path, const Eigen::VectorXd& diag) {
  const auto events = merged_events(path);
  Eigen::Index b = basis_index(path.system, path.initial);
  const Eigen::Index b0 = b;
  double action = 0.0;
  double prev = 0.0;
  for (const auto& [t, site] : events) {
    action += (t - prev) * diag[b];
    b ^= Eigen::Index{1} << site_bit(path.system, site);
    prev = t;
  }
  action += (path.beta - prev) * diag[b];
  return {action, b == b0};
}

QuenchedEstimate reduce_samples(std::vector<double>&& samples, bool keep_samples) {
  const MeanStderr ms = mean_stderr(samples);
  QuenchedEstimate est;
  est.mean = ms.mean;
  est.std_error = ms.std_error;
  est.n_samples = samples.size();
  if (keep_samples) est.per_sample = std::move(samples);
  return est;
}

}  // namespace

SpinPath sample_path(const PathMeasureParams& params,
                     const std::optional<std::vector<int>>& initial, std::mt19937_64& gen) {
  if (params.lambda < 0.0) throw DomainError("flip rate must be nonnegative");
  if (!(params.beta > 0.0)) throw DomainError("path horizon must be positive");
  SpinPath path;
  path.system = make_spin_system(params.n_sites);
  path.beta = params.beta;
  if (initial) {
    check_configuration(*initial, params.n_sites, "initial configuration");
    path.initial = *initial;
  } else {
    path.initial.resize(static_cast<std::size_t>(params.n_sites));
    for (auto& s : path.initial) s = uniform01(gen) < 0.5 ? +1 : -1;
  }
  path.jumps.resize(static_cast<std::size_t>(params.n_sites));
  if (params.lambda > 0.0) {
    for (auto& times : path.jumps) {
      double t = 0.0;
      for (;;) {
        const double step = -std::log1p(-uniform01(gen)) / params.lambda;
        const double next = t + step;
        if (!(next < params.beta)) break;
        if (next > t) times.push_back(next);  // drop measure-zero degenerate draws
        t = next;
      }
    }
  }
  return path;
}

int spin_at(const SpinPath& path, int site, double u) {
  if (site < 1 || site > path.system.n_sites) throw DomainError("site out of range");
  if (!(u >= 0.0 && u <= path.beta)) throw DomainError("time outside the path horizon");
  const auto& times = path.jumps[static_cast<std::size_t>(site - 1)];
  const auto flips = std::upper_bound(times.begin(), times.end(), u) - times.begin();
  const int s0 = path.initial[static_cast<std::size_t>(site - 1)];
  return (flips % 2 == 0) ? s0 : -s0;
}

std::vector<int> configuration_at(const SpinPath& path, double u) {
  std::vector<int> config(static_cast<std::size_t>(path.system.n_sites));
  for (int site = 1; site <= path.system.n_sites; ++site) {
    config[static_cast<std::size_t>(site - 1)] = spin_at(path, site, u);
  }
  return config;
}

double overlap(const std::vector<int>& sigma, const std::vector<int>& tau) {
  if (sigma.size() != tau.size() || sigma.empty()) {
    throw DomainError("overlap needs two configurations of the same nonzero size");
  }
  long sum = 0;
  for (std::size_t i = 0; i < sigma.size(); ++i) sum += sigma[i] * tau[i];
  return static_cast<double>(sum) / static_cast<double>(sigma.size());
}

PathAction path_action(const SpinPath& path, const CouplingMap& couplings) {
  check_path(path);
  const int n = path.system.n_sites;
  Eigen::MatrixXd g(n, n);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      const TermIndex idx{{i, j}, {}};
      const auto it = couplings.find(idx);
      if (it == couplings.end()) {
        throw DomainError("missing coupling for pair " + to_string(idx));
      }
      g(i - 1, j - 1) = it->second;
    }
  }
  const double scale = 1.0 / (2.0 * std::sqrt(static_cast<double>(n)));
  double action = 0.0;
  for (const auto& seg : path_segments(path)) {
    if (seg.len == 0.0) continue;
    double energy = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        energy += g(i, j) * seg.config[static_cast<std::size_t>(i)] *
                  seg.config[static_cast<std::size_t>(j)];
      }
    }
    action += seg.len * scale * energy;
  }
  return {action};
}

double double_overlap_integral(const SpinPath& path_a, const SpinPath& path_b) {
  check_path(path_a);
  check_path(path_b);
  if (path_a.system.n_sites != path_b.system.n_sites) {
    throw DomainError("paths must share the site count");
  }
  if (path_a.beta != path_b.beta) throw DomainError("paths must share the horizon");
  const auto segs_a = path_segments(path_a);
  const auto segs_b = path_segments(path_b);
  double total = 0.0;
  for (const auto& sa : segs_a) {
    if (sa.len == 0.0) continue;
    for (const auto& sb : segs_b) {
      if (sb.len == 0.0) continue;
      const double r = overlap(sa.config, sb.config);
      total += sa.len * sb.len * r * r;
    }
  }
  return total;
}

CovarianceCheck covariance_check(const SpinPath& path_a, const SpinPath& path_b,
                                 std::size_t n_gaussian_samples, std::mt19937_64& gen) {
  check_path(path_a);
  check_path(path_b);
  if (path_a.system.n_sites != path_b.system.n_sites) {
    throw DomainError("paths must share the site count");
  }
  if (path_a.beta != path_b.beta) throw DomainError("paths must share the horizon");
  if (n_gaussian_samples < 2) throw DomainError("need at least two Monte Carlo samples");
  const int n = path_a.system.n_sites;
  const Eigen::MatrixXd a = integrated_pair_products(path_a);
  const Eigen::MatrixXd b = integrated_pair_products(path_b);

  CovarianceCheck out;
  out.analytic = (a.array() * b.array()).sum();
  out.rectangle = 0.25 * n * double_overlap_integral(path_a, path_b);

  NormalDraw normal;
  std::vector<double> products(n_gaussian_samples);
  for (auto& p : products) {
    double za = 0.0;
    double zb = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double g = normal(gen);
        za += g * a(i, j);
        zb += g * b(i, j);
      }
    }
    p = za * zb;
  }
  const MeanStderr ms = mean_stderr(products);
  out.mc = ms.mean;
  out.mc_stderr = ms.std_error;
  out.agree = std::abs(out.analytic - out.rectangle) <= 1e-10 &&
              std::abs(out.mc - out.analytic) <= 3.0 * ms.std_error;
  return out;
}

QuenchedEstimate fk_partition_estimate(const DisorderedHamiltonian& ham, double beta,
                                       const CouplingMap& xi, std::size_t n_paths,
                                       const SeedPolicy& seed, int workers,
                                       bool keep_samples) {
  if (!(beta > 0.0)) throw DomainError("path horizon must be positive");
  if (n_paths < 2) throw DomainError("need at least two paths");
  const double lambda = transverse_rate(ham);
  const Eigen::VectorXd diag = diagonal_energy(ham, xi);
  const int n = ham.system.n_sites;
  const double log_prefactor = n * std::log(2.0) + n * beta * lambda;
  const PathMeasureParams params{lambda, beta, n};

  std::vector<double> weights(n_paths);
  parallel_for(n_paths, workers, [&](std::size_t p) {
    auto gen = seed.stream(kStreamPaths, p);
    const SpinPath path = sample_path(params, std::nullopt, gen);
    const ActionResult r = diagonal_action(path, diag);
    weights[p] = r.closed ? std::exp(r.action + log_prefactor) : 0.0;
  });
  return reduce_samples(std::move(weights), keep_samples);
}

QuenchedEstimate fk_matrix_element(const DisorderedHamiltonian& ham, double beta,
                                   const CouplingMap& xi, const std::vector<int>& sigma,
                                   const std::vector<int>& sigma_tilde, std::size_t n_paths,
                                   const SeedPolicy& seed, int workers) {
  if (!(beta > 0.0)) throw DomainError("path horizon must be positive");
  if (n_paths < 2) throw DomainError("need at least two paths");
  const int n = ham.system.n_sites;
  check_configuration(sigma, n, "left configuration");
  check_configuration(sigma_tilde, n, "right configuration");
  const double lambda = transverse_rate(ham);
  const Eigen::VectorXd diag = diagonal_energy(ham, xi);
  const double log_prefactor = n * beta * lambda;
  const PathMeasureParams params{lambda, beta, n};
  const Eigen::Index b_target = basis_index(ham.system, sigma_tilde);
  const Eigen::Index b_start = basis_index(ham.system, sigma);

  std::vector<double> weights(n_paths);
  parallel_for(n_paths, workers, [&](std::size_t p) {
    auto gen = seed.stream(kStreamPaths, p);
    const SpinPath path = sample_path(params, sigma, gen);
    const auto events = merged_events(path);
    Eigen::Index b = b_start;
    double action = 0.0;
    double prev = 0.0;
    for (const auto& [t, site] : events) {
      action += (t - prev) * diag[b];
      b ^= Eigen::Index{1} << site_bit(path.system, site);
      prev = t;
    }
    action += (beta - prev) * diag[b];
    weights[p] = b == b_target ? std::exp(action + log_prefactor) : 0.0;
  });
  return reduce_samples(std::move(weights), false);
}

FkConcentrationProbe fk_concentration_probe(const DisorderedHamiltonian& ham, double beta,
                                            double lambda, std::size_t n_disorder,
                                            std::size_t n_paths,
                                            const std::vector<double>& u_grid,
                                            const SeedPolicy& seed, int workers) {
  if (!(beta > 0.0)) throw DomainError("inverse temperature must be positive");
  if (n_disorder < 100) throw DomainError("tail estimates need at least 100 replicas");
  if (u_grid.empty()) throw DomainError("empty deviation grid");
  for (double u : u_grid) {
    if (u < 0.0) throw DomainError("deviation levels must be nonnegative");
  }
  const double extracted = transverse_rate(ham);
  if (std::abs(extracted - lambda) > 1e-12 * std::max(1.0, std::abs(lambda))) {
    throw DomainError("transverse rate does not match the supplied model");
  }
  const int n = ham.system.n_sites;
  const std::size_t n_terms = ham.terms.size();
  const DisorderDistribution gauss = gaussian_disorder();

  std::vector<double> per_site(n_disorder);
  parallel_for(n_disorder, workers, [&](std::size_t r) {
    auto gen = seed.stream(kStreamCouplings, r);
    std::vector<double> xi = sample_couplings(gauss, n_terms, gen);
    for (auto& x : xi) x *= beta;
    Matrix theta;
    assemble_into(ham, xi, theta);
    theta += (beta - 1.0) * ham.deterministic.entries;  // H0 was added once; scale to beta
    per_site[r] = log_trace_exp(theta) / n;
  });

  const double center = pairwise_sum(per_site) / static_cast<double>(n_disorder);
  FkConcentrationProbe probe;
  probe.tail.reserve(u_grid.size());
  double best_k = std::numeric_limits<double>::infinity();
  for (double u : u_grid) {
    const TailPoint tp = tail_frequency(per_site, center, u);
    TailCheckPoint point;
    point.u = u;
    point.empirical = tp.empirical;
    point.std_error = tp.std_error;
    point.bound = 2.0 * std::exp(-2.0 * u * u * n / (beta * beta));
    point.holds = point.empirical <= point.bound + 3.0 * point.std_error;
    if (tp.empirical > 0.0 && u > 0.0) {
      best_k = std::min(best_k, -(beta * beta) * std::log(tp.empirical / 2.0) / (n * u * u));
    }
    probe.tail.push_back(point);
  }
  probe.best_fit_k = best_k;

  // Cross-check the path estimator against exact diagonalization on the first
  // replica's couplings (beta already folded into the horizon, not the action).
  {
    auto gen = seed.stream(kStreamCouplings, 0);
    const std::vector<double> xi = sample_couplings(gauss, n_terms, gen);
    CouplingMap map;
    for (std::size_t k = 0; k < n_terms; ++k) map[ham.terms[k].index] = xi[k];
    const QuenchedEstimate est = fk_partition_estimate(ham, beta, map, n_paths, seed, workers);
    const double exact_log_z = per_site[0] * n;
    probe.fk_crosscheck_rel_dev = std::abs(est.mean * std::exp(-exact_log_z) - 1.0);
  }
  return probe;
}

std::string path_to_text(const SpinPath& path) {
  check_path(path);
  std::ostringstream os;
  os << std::setprecision(17);
  os << "beta " << path.beta << "\n";
  os << "sites " << path.system.n_sites << "\n";
  os << "init";
  for (int s : path.initial) os << ' ' << (s > 0 ? "+1" : "-1");
  os << "\n";
  for (int site = 1; site <= path.system.n_sites; ++site) {
    os << "site " << site;
    for (double t : path.jumps[static_cast<std::size_t>(site - 1)]) os << ' ' << t;
    os << "\n";
  }
  return os.str();
}

SpinPath path_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  auto next_line = [&](const char* what) {
    if (!std::getline(is, line)) throw DomainError(std::string("path text truncated: ") + what);
    return std::istringstream(line);
  };
  auto expect = [](std::istringstream& ls, const std::string& keyword) {
    std::string token;
    if (!(ls >> token) || token != keyword) {
      throw DomainError("path text: expected '" + keyword + "' line");
    }
  };

  SpinPath path;
  {
    auto ls = next_line("beta");
    expect(ls, "beta");
    if (!(ls >> path.beta) || !(path.beta > 0.0)) throw DomainError("path text: bad beta");
  }
  int n = 0;
  {
    auto ls = next_line("sites");
    expect(ls, "sites");
    if (!(ls >> n) || n < 1) throw DomainError("path text: bad site count");
  }
  path.system = make_spin_system(n);
  {
    auto ls = next_line("init");
    expect(ls, "init");
    path.initial.resize(static_cast<std::size_t>(n));
    for (auto& s : path.initial) {
      if (!(ls >> s)) throw DomainError("path text: truncated initial configuration");
    }
  }
  path.jumps.resize(static_cast<std::size_t>(n));
  for (int site = 1; site <= n; ++site) {
    auto ls = next_line("site");
    expect(ls, "site");
    int idx = 0;
    if (!(ls >> idx) || idx != site) throw DomainError("path text: site lines out of order");
    double t = 0.0;
    while (ls >> t) path.jumps[static_cast<std::size_t>(site - 1)].push_back(t);
  }
  check_path(path);
  return path;
}

}  // namespace qsg
