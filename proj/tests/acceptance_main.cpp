// Full acceptance sweep.  Each criterion prints one PASS/FAIL line with its
// headline measurements and wall time; the process exits nonzero if any
// criterion fails.  Sizes and tolerances are fixed here on purpose -- this
// binary is the contract, not a configurable tool.

#include "qsg/disorder.hpp"
#include "qsg/experiments.hpp"
#include "qsg/feynman_kac.hpp"
#include "qsg/gibbs.hpp"
#include "qsg/hamiltonians.hpp"
#include "qsg/parallel.hpp"
#include "qsg/quadrature.hpp"
#include "qsg/trotter.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using qsg::Complex;
using qsg::Matrix;

constexpr std::uint64_t kSeed = 20240817;
int g_workers = 1;

struct Criterion {
  int id = 0;
  const char* label = "";
  double cap_seconds = 0.0;  // 0 = no cap stated
  std::function<bool(std::string&)> body;
};

qsg::CouplingMap zero_couplings(const qsg::DisorderedHamiltonian& ham) {
  qsg::CouplingMap xi;
  for (const auto& t : ham.terms) xi[t.index] = 0.0;
  return xi;
}

qsg::CouplingMap gaussian_couplings(const qsg::DisorderedHamiltonian& ham,
                                    std::uint64_t index) {
  qsg::SeedPolicy pol{kSeed};
  auto gen = pol.stream(qsg::kStreamCouplings, index);
  qsg::NormalDraw nd;
  qsg::CouplingMap xi;
  for (const auto& t : ham.terms) xi[t.index] = nd(gen);
  return xi;
}

qsg::HermitianOperator random_hermitian(const qsg::SpinSystem& sys, std::mt19937_64& gen,
                                        double scale = 1.0) {
  qsg::NormalDraw nd;
  Matrix m(sys.dim, sys.dim);
  for (Eigen::Index r = 0; r < sys.dim; ++r)
    for (Eigen::Index c = 0; c < sys.dim; ++c) m(r, c) = Complex(nd(gen), nd(gen));
  return qsg::make_hermitian(sys, scale * (m + m.adjoint().eval()) / 2.0);
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

// ---- 1. exact-trace oracles ------------------------------------------------

bool criterion_exact(std::string& detail) {
  double closed_dev = 0.0;
  const auto sys1 = qsg::make_spin_system(1);
  for (double lambda : {0.3, 1.0, 2.5}) {
    const auto ham = qsg::build_transverse_sk(sys1, lambda);
    const auto xi = zero_couplings(ham);
    for (double beta : {0.0, 0.4, 1.0, 3.0}) {
      const double got = qsg::make_gibbs(ham, beta, xi).log_partition;
      closed_dev = std::max(closed_dev,
                            std::abs(got - std::log(2.0 * std::cosh(beta * lambda))));
    }
  }

  double beta0_dev = 0.0;
  int xyz_max_n = 0;
  auto check_beta0 = [&](const qsg::DisorderedHamiltonian& ham) {
    // The quantity under test is log Z, so use the eigenvalues-only path.
    const Matrix scaled = 0.0 * qsg::assemble(ham, zero_couplings(ham)).entries;
    const double got = qsg::log_trace_exp(scaled);
    beta0_dev = std::max(beta0_dev,
                         std::abs(got - ham.system.n_sites * std::log(2.0)));
  };
  for (int n = 1; n <= 10; ++n) {
    const auto sys = qsg::make_spin_system(n);
    check_beta0(qsg::build_transverse_sk(sys, 0.8));
    check_beta0(qsg::build_heisenberg(sys, 0.7, 0.4));
    check_beta0(qsg::build_pspin(sys, qsg::PSpinSpec{{0.3, 0.5}, false}));
    if (n <= 8) {  // 3N^2 dense terms: N=10 would need ~5 GB for this family
      check_beta0(qsg::build_heisenberg_xyz(sys));
      xyz_max_n = n;
    }
  }

  detail = "closed-form dev " + fmt(closed_dev) + ", beta0 dev " + fmt(beta0_dev) +
           " (sk/heis/pspin to N=10, xyz to N=" + std::to_string(xyz_max_n) + ")";
  return closed_dev <= 1e-12 && beta0_dev <= 1e-12;
}

// ---- 2. Duhamel kernels vs quadrature --------------------------------------

double two_point_quadrature(const qsg::GibbsState& st, const Matrix& a, const Matrix& b) {
  const Matrix& theta = st.hamiltonian_exponent.entries;
  static const auto rule = qsg::gauss_legendre_01(64);
  const double z = std::exp(st.log_partition);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double u = rule.nodes[i];
    const Matrix eu = (u * theta).exp();
    const Matrix ev = ((1.0 - u) * theta).exp();
    acc += rule.weights[i] * (a * eu * b * ev).trace().real();
  }
  return acc / z;
}

double three_point_quadrature(const qsg::GibbsState& st, const Matrix& a, const Matrix& b,
                              const Matrix& c) {
  const Matrix& theta = st.hamiltonian_exponent.entries;
  static const auto rule = qsg::gauss_legendre_01(32);
  const double z = std::exp(st.log_partition);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double u = rule.nodes[i];
    const Matrix e3 = ((1.0 - u) * theta).exp();
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      const double s = rule.nodes[j];
      const Matrix e1 = (s * u * theta).exp();
      const Matrix e2 = ((1.0 - s) * u * theta).exp();
      acc += rule.weights[i] * rule.weights[j] * u * (a * e1 * b * e2 * c * e3).trace().real();
    }
  }
  return acc / z;
}

bool criterion_duhamel(std::string& detail) {
  qsg::SeedPolicy pol{kSeed};
  double max_gap2 = 0.0, max_gap3 = 0.0;
  for (int k = 0; k < 50; ++k) {
    const int n = 1 + k % 3;
    const auto sys = qsg::make_spin_system(n);
    const auto ham = qsg::build_heisenberg(sys, 0.6, 0.3);
    const auto xi = gaussian_couplings(ham, std::uint64_t(100 + k));
    const double beta = 0.8 + 0.1 * double(k % 5);
    const auto st = qsg::make_gibbs(ham, beta, xi);

    auto gen = pol.stream(qsg::kStreamInstances, std::uint64_t(k));
    const auto a = random_hermitian(sys, gen);
    const auto b = random_hermitian(sys, gen);
    const auto c = random_hermitian(sys, gen);

    max_gap2 = std::max(max_gap2, std::abs(qsg::duhamel_two_point(st, a, b) -
                                           two_point_quadrature(st, a.entries, b.entries)));
    // Matching outer slots keep the three-point integral real.
    max_gap3 = std::max(max_gap3,
                        std::abs(qsg::duhamel_three_point(st, a, c, a) -
                                 three_point_quadrature(st, a.entries, c.entries, a.entries)));
  }

  double min_margin = 1e300;
  for (int k = 0; k < 200; ++k) {
    const int n = 1 + k % 3;
    const auto sys = qsg::make_spin_system(n);
    const auto ham = qsg::build_heisenberg(sys, 0.5, 0.25);
    const auto xi = gaussian_couplings(ham, std::uint64_t(300 + k));
    const auto st = qsg::make_gibbs(ham, 1.1, xi);
    auto gen = pol.stream(qsg::kStreamInstances, std::uint64_t(1000 + k));
    const auto a = random_hermitian(sys, gen);
    const double mean = qsg::thermal_average(st, a);
    min_margin = std::min(min_margin, qsg::duhamel_two_point(st, a, a) - mean * mean);
  }

  detail = "2pt gap " + fmt(max_gap2) + ", 3pt gap " + fmt(max_gap3) +
           ", variance min " + fmt(min_margin);
  return max_gap2 <= 1e-8 && max_gap3 <= 1e-8 && min_margin >= -1e-10;
}

// ---- 3. pressure derivative identities -------------------------------------

bool criterion_derivatives(std::string& detail) {
  // (a) coupling derivatives of <X_i> against the Duhamel displays.  h = 1e-4
  // puts the centered second difference's rounding noise near 4e-8, so draws
  // whose true second derivative sits below 1e-2 are skipped: there the
  // finite-difference oracle itself is meaningless at the stated tolerance.
  const double h = 1e-4;
  double rel1_max = 0.0, rel2_max = 0.0;
  int accepted = 0;
  for (std::uint64_t draw = 0; accepted < 50 && draw < 2000; ++draw) {
    const int n = 2 + int(draw % 2);
    const auto sys = qsg::make_spin_system(n);
    const auto ham = qsg::build_transverse_sk(sys, 0.8);
    auto xi = gaussian_couplings(ham, 500 + draw);
    const double beta = 0.4 + 0.2 * double(draw % 5);

    std::size_t pick = 0;
    for (std::size_t t = 0; t < ham.terms.size(); ++t) {
      const auto& s = ham.terms[t].index.sites;
      if (s[0] != s[1] && (draw + t) % 3 == 0) pick = t;
    }
    if (ham.terms[pick].index.sites[0] == ham.terms[pick].index.sites[1]) continue;
    const auto& x = ham.terms[pick].op;
    const double z0 = xi[ham.terms[pick].index];

    auto mean_at = [&](double z) {
      auto shifted = xi;
      shifted[ham.terms[pick].index] = z;
      return qsg::thermal_average(qsg::make_gibbs(ham, beta, shifted), x);
    };
    const auto st = qsg::make_gibbs(ham, beta, xi);
    const double ta = qsg::thermal_average(st, x);
    const double xx = qsg::duhamel_two_point(st, x, x);
    const double xxx = qsg::duhamel_three_point(st, x, x, x);
    const double f1 = beta * (xx - ta * ta);
    const double f2 = beta * beta * (2.0 * xxx - 3.0 * xx * ta + 2.0 * ta * ta * ta);
    if (std::abs(f1) < 1e-3 || std::abs(f2) < 1e-2) continue;

    const double up = mean_at(z0 + h), dn = mean_at(z0 - h);
    const double fd1 = (up - dn) / (2.0 * h);
    const double fd2 = (up - 2.0 * ta + dn) / (h * h);
    rel1_max = std::max(rel1_max, std::abs(fd1 - f1) / std::abs(f1));
    rel2_max = std::max(rel2_max, std::abs(fd2 - f2) / std::abs(f2));
    ++accepted;
  }

  // (b) Gaussian beta-derivative of the MC pressure, paired over the shared
  // coupling stream.
  const auto sys = qsg::make_spin_system(3);
  const auto ham = qsg::build_transverse_sk(sys, 1.0);
  const auto gauss = qsg::gaussian_disorder();
  const std::size_t n_rep = 10000;
  const double hb = 1e-3;
  qsg::SeedPolicy pol{kSeed};
  double worst_sigma = 0.0;
  for (double beta : {0.3, 1.0}) {
    const auto up = qsg::quenched_pressure(ham, beta + hb, gauss, n_rep, pol, g_workers, true,
                                           qsg::DeterministicScaling::kFixed);
    const auto dn = qsg::quenched_pressure(ham, beta - hb, gauss, n_rep, pol, g_workers, true,
                                           qsg::DeterministicScaling::kFixed);
    std::vector<double> diff(n_rep);
    qsg::parallel_for(n_rep, g_workers, [&](std::size_t r) {
      auto gen = pol.stream(qsg::kStreamCouplings, r);
      const auto flat = qsg::sample_couplings(gauss, ham.terms.size(), gen);
      qsg::CouplingMap xi;
      for (std::size_t k = 0; k < ham.terms.size(); ++k) xi[ham.terms[k].index] = flat[k];
      const double duh =
          qsg::pressure_derivative_terms(ham, beta, xi, gauss.moments.abs_third).duhamel_sum;
      diff[r] = (up.per_sample[r] - dn.per_sample[r]) / (2.0 * hb) - duh;
    });
    const auto ms = qsg::mean_stderr(diff);
    worst_sigma = std::max(worst_sigma, std::abs(ms.mean) / (3.0 * ms.std_error + 1e-5));
  }

  detail = "F' rel " + fmt(rel1_max) + ", F'' rel " + fmt(rel2_max) + " (50 instances), " +
           "beta-FD worst |mean|/(3 stderr) " + fmt(worst_sigma);
  return accepted == 50 && rel1_max <= 1e-5 && rel2_max <= 1e-5 && worst_sigma <= 1.0;
}

// ---- 4. trace inequalities --------------------------------------------------

bool criterion_trace_bounds(std::string& detail) {
  qsg::SeedPolicy pol{kSeed};
  int corr_viol = 0, holder_viol = 0, ratio_viol = 0;

  for (int k = 0; k < 200; ++k) {
    const int n = 1 + k % 3;
    const auto sys = qsg::make_spin_system(n);
    auto gen = pol.stream(qsg::kStreamInstances, std::uint64_t(2000 + k));
    const auto x = random_hermitian(sys, gen);
    const auto hmat = random_hermitian(sys, gen, 1.5);
    const int nf = 1 + int(gen() % 5);
    std::vector<double> a(nf);
    double s = 0.0;
    for (auto& w : a) s += (w = qsg::uniform01(gen) + 0.05);
    for (auto& w : a) w /= s;
    double s2 = 0.0;
    for (double w : a) s2 += w;
    a[0] += 1.0 - s2;
    if (!qsg::check_trace_product_bound(x, hmat, a).holds) ++corr_viol;
  }

  for (int k = 0; k < 200; ++k) {
    const Eigen::Index dim = (k % 3 == 0) ? 2 : (k % 3 == 1) ? 4 : 8;
    auto gen = pol.stream(qsg::kStreamInstances, std::uint64_t(3000 + k));
    qsg::NormalDraw nd;
    std::vector<Matrix> bs;
    for (int j = 0; j < 2 * (1 + k % 3); ++j) {
      Matrix m(dim, dim);
      for (Eigen::Index r = 0; r < dim; ++r)
        for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = Complex(nd(gen), nd(gen));
      bs.push_back(std::move(m));
    }
    if (!qsg::check_holder_trace(bs).holds) ++holder_viol;
  }

  for (int k = 0; k < 200; ++k) {
    const int n = 1 + k % 4;
    const auto sys = qsg::make_spin_system(n);
    const auto ham = qsg::build_transverse_sk(sys, 0.6 + 0.1 * double(k % 3));
    const auto xi = gaussian_couplings(ham, std::uint64_t(4000 + k));
    const auto& index = ham.terms[std::size_t(k) % ham.terms.size()].index;
    if (!qsg::partition_function_ratio_bound(ham, 0.5 + 0.25 * double(k % 3), xi, index).holds)
      ++ratio_viol;
  }

  detail = "violations: corr " + std::to_string(corr_viol) + "/200, holder " +
           std::to_string(holder_viol) + "/200, ratio " + std::to_string(ratio_viol) + "/200";
  return corr_viol == 0 && holder_viol == 0 && ratio_viol == 0;
}

// ---- 5. Lie-Trotter convergence ---------------------------------------------

bool criterion_trotter(std::string& detail) {
  qsg::SeedPolicy pol{kSeed};
  double worst_slope = -1.0, commuting_err = 0.0;
  bool monotone = true;
  for (int k = 0; k < 5; ++k) {
    const auto sys = qsg::make_spin_system(1 + k % 2);
    auto gen = pol.stream(qsg::kStreamInstances, std::uint64_t(5000 + k));
    const auto a = random_hermitian(sys, gen);
    const auto b = random_hermitian(sys, gen);
    // Order fitted on the asymptotic tail; the full range covers monotonicity.
    const auto tail = qsg::trotter_error_curve(a, b, {8, 16, 32, 64, 128, 256});
    if (std::abs(tail.fitted_slope + 1.0) > std::abs(worst_slope + 1.0))
      worst_slope = tail.fitted_slope;
    const auto curve = qsg::trotter_error_curve(a, b, {1, 2, 4, 8, 16, 32, 64, 128});
    for (std::size_t i = 1; i < curve.points.size(); ++i)
      if (curve.points[i].second > 1e-12 &&
          curve.points[i].second > curve.points[i - 1].second * (1.0 + 1e-9))
        monotone = false;

    // Commuting pair built from the same draw: A and p(A).
    const Matrix poly = 0.4 * a.entries + 0.2 * (a.entries * a.entries);
    const auto pa = qsg::make_hermitian(sys, poly);
    const Matrix exact = (a.entries + poly).exp();
    const Matrix prod = qsg::trotter_product({1, a, pa});
    commuting_err = std::max(commuting_err, qsg::spectral_norm(prod - exact));
  }
  detail = "worst slope " + fmt(worst_slope) + ", commuting k=1 err " + fmt(commuting_err) +
           ", monotone " + (monotone ? "yes" : "NO");
  return std::abs(worst_slope + 1.0) <= 0.15 && commuting_err <= 1e-10 && monotone;
}

// ---- 6. universality --------------------------------------------------------

bool criterion_universality(std::string& detail) {
  qsg::SeedPolicy pol{kSeed};
  int combos = 0, failures = 0;
  double worst_excess = -1e300;  // (gap - bound)/stderr, most adverse combo
  for (int family = 0; family < 2; ++family) {
    for (int n : {2, 4, 6}) {
      const auto sys = qsg::make_spin_system(n);
      const auto ham =
          family == 0 ? qsg::build_transverse_sk(sys, 1.0) : qsg::build_heisenberg_xyz(sys);
      for (double beta : {0.25, 0.5, 1.0}) {
        for (int d = 0; d < 2; ++d) {
          const auto dist =
              d == 0 ? qsg::rademacher_disorder() : qsg::uniform_scaled_disorder();
          const auto gap = qsg::universality_gap(ham, beta, dist, 20000, pol, g_workers);
          ++combos;
          if (!gap.gap_le_bound) ++failures;
          if (gap.combined_stderr_per_site > 0.0)
            worst_excess = std::max(worst_excess,
                                    (gap.gap_per_site - gap.bound_per_site) /
                                        gap.combined_stderr_per_site);
        }
      }
    }
  }
  detail = std::to_string(combos - failures) + "/" + std::to_string(combos) +
           " combos hold, worst (gap-bound)/stderr " + fmt(worst_excess) + " (flag at +3)";
  return failures == 0;
}

// ---- 7. concentration -------------------------------------------------------

bool criterion_concentration(std::string& detail) {
  qsg::SeedPolicy pol{kSeed};
  const auto sys = qsg::make_spin_system(4);
  const auto ham = qsg::build_transverse_sk(sys, 1.0);
  const double beta = 1.0;
  const double scale = std::sqrt(beta * beta * qsg::norm_power_sum(ham, 2.0));
  const auto pts = qsg::concentration_tail(
      ham, beta, 10000, {0.5 * scale, 1.0 * scale, 2.0 * scale}, pol, g_workers);
  int tail_fail = 0;
  double worst_ratio = 0.0;
  for (const auto& p : pts) {
    if (!p.holds) ++tail_fail;
    if (p.bound > 0.0) worst_ratio = std::max(worst_ratio, p.empirical / p.bound);
  }

  int fk_fail = 0;
  for (int n : {4, 6}) {
    const auto sysn = qsg::make_spin_system(n);
    const auto hamn = qsg::build_transverse_sk(sysn, 1.0);
    const auto probe = qsg::fk_concentration_probe(hamn, 1.0, 1.0, 5000, 20000,
                                                   {0.05, 0.1, 0.2}, pol, g_workers);
    for (const auto& p : probe.tail)
      if (!p.holds) ++fk_fail;
  }
  detail = "gaussian tail worst emp/bound " + fmt(worst_ratio) + " (" +
           std::to_string(tail_fail) + " fail), per-site bound fails " +
           std::to_string(fk_fail) + "/6";
  return tail_fail == 0 && fk_fail == 0;
}

// ---- 8. integration by parts ------------------------------------------------

bool criterion_ibp(std::string& detail) {
  struct Fn {
    const char* name;
    double (*f)(double);
    double (*fp)(double);
    double sup;
  };
  const double s3 = std::sqrt(3.0);
  const Fn fns[] = {
      {"sin", [](double x) { return std::sin(x); }, [](double x) { return std::cos(x); }, 1.0},
      {"tanh", [](double x) { return std::tanh(x); }, [](double x) { return 1.0 - std::tanh(x) * std::tanh(x); },
       4.0 / (3.0 * s3)},
      {"logistic", [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
       [](double x) {
         const double p = 1.0 / (1.0 + std::exp(-x));
         return p * (1.0 - p);
       },
       1.0 / (6.0 * s3)},
      {"atan", [](double x) { return std::atan(x); },
       [](double x) { return 1.0 / (1.0 + x * x); }, 3.0 * s3 / 8.0},
  };
  const double s2 = std::sqrt(2.0);
  const std::vector<qsg::DisorderDistribution> laws = {
      qsg::gaussian_disorder(), qsg::rademacher_disorder(), qsg::uniform_scaled_disorder(),
      qsg::discrete_disorder({-s2, 0.0, s2}, {0.25, 0.5, 0.25}),
      qsg::discrete_disorder({2.0, -0.5}, {0.2, 0.8})};

  int cases = 0, failures = 0;
  double worst = 0.0;
  for (const auto& fn : fns) {
    for (const auto& law : laws) {
      const auto r = qsg::ibp_residual(law, fn.f, fn.fp, fn.sup);
      ++cases;
      if (!r.holds) ++failures;
      if (r.bound > 0.0) worst = std::max(worst, r.residual / r.bound);
    }
  }
  detail = std::to_string(cases) + " cases, worst residual/bound " + fmt(worst) + ", " +
           std::to_string(failures) + " failures";
  return cases == 20 && failures == 0;
}

// ---- 9. Feynman-Kac ---------------------------------------------------------

bool criterion_feynman_kac(std::string& detail) {
  qsg::SeedPolicy pol{kSeed};

  // (a) covariance identity, exact part only.
  auto path_gen = pol.stream(qsg::kStreamPaths, 424242);
  auto mc_gen = pol.stream(qsg::kStreamScratch, 424242);
  double worst_identity = 0.0;
  for (int k = 0; k < 100; ++k) {
    const qsg::PathMeasureParams params{.lambda = 0.8 + 0.2 * double(k % 3),
                                        .beta = 0.6 + 0.2 * double(k % 4),
                                        .n_sites = 1 + k % 4};
    const auto a = qsg::sample_path(params, std::nullopt, path_gen);
    const auto b = qsg::sample_path(params, std::nullopt, path_gen);
    const auto chk = qsg::covariance_check(a, b, 2, mc_gen);
    worst_identity = std::max(worst_identity, std::abs(chk.analytic - chk.rectangle));
  }

  // (b) partition estimator vs exact trace over the stated grid.
  double worst_z_sigma = 0.0;
  int combo = 0;
  for (int n : {2, 3}) {
    const auto sys = qsg::make_spin_system(n);
    for (double lambda : {0.5, 1.0}) {
      const auto ham = qsg::build_transverse_sk(sys, lambda);
      const auto xi = gaussian_couplings(ham, std::uint64_t(6000 + combo));
      for (double beta : {0.5, 1.0}) {
        const auto est = qsg::fk_partition_estimate(ham, beta, xi, 100000,
                                                    qsg::SeedPolicy{kSeed + combo},
                                                    g_workers);
        const double exact = std::exp(qsg::make_gibbs(ham, beta, xi).log_partition);
        worst_z_sigma = std::max(worst_z_sigma, std::abs(est.mean - exact) / est.std_error);
        ++combo;
      }
    }
  }

  // (c) sinh/cosh matrix elements at N=1, plus nonnegativity.
  const auto sys1 = qsg::make_spin_system(1);
  const double lambda = 1.0, beta = 0.7;
  const auto ham1 = qsg::build_transverse_sk(sys1, lambda);
  qsg::CouplingMap zero{{ham1.terms[0].index, 0.0}};
  const auto flip =
      qsg::fk_matrix_element(ham1, beta, zero, {1}, {-1}, 100000, pol, g_workers);
  const auto stay = qsg::fk_matrix_element(ham1, beta, zero, {1}, {1}, 100000, pol, g_workers);
  const double sinh_sigma = std::abs(flip.mean - std::sinh(beta * lambda)) / flip.std_error;
  const double cosh_sigma = std::abs(stay.mean - std::cosh(beta * lambda)) / stay.std_error;
  const bool nonneg = flip.mean >= -3.0 * flip.std_error && stay.mean >= -3.0 * stay.std_error;

  detail = "identity gap " + fmt(worst_identity) + ", Z worst sigma " + fmt(worst_z_sigma) +
           ", sinh/cosh sigma " + fmt(sinh_sigma) + "/" + fmt(cosh_sigma);
  return worst_identity <= 1e-10 && worst_z_sigma <= 3.0 && sinh_sigma <= 3.0 &&
         cosh_sigma <= 3.0 && nonneg;
}

// ---- 10. interpolation scan -------------------------------------------------

bool criterion_interpolation(std::string& detail) {
  const auto sys = qsg::make_spin_system(3);
  const auto ham = qsg::build_transverse_sk(sys, 1.0);
  const double t = 1.0;  // beta = 1
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  const auto pts = qsg::guerra_interpolation_scan(ham, 1.0, qsg::rademacher_disorder(), grid,
                                                  10000, qsg::SeedPolicy{kSeed}, g_workers);
  int interior = 0, fails = 0;
  double worst_slope = 0.0, bound = 0.0;
  for (const auto& p : pts) {
    if (!p.interior) continue;
    ++interior;
    bound = p.derivative_bound;
    worst_slope = std::max(worst_slope, std::abs(p.derivative_fd));
    if (!p.holds) ++fails;
  }
  detail = "max |slope| " + fmt(worst_slope) + " vs bound " + fmt(bound) + " (t=" + fmt(t) +
           "), " + std::to_string(fails) + "/" + std::to_string(interior) + " interior fail";
  return interior == 3 && fails == 0;
}

// ---- 11. reproducibility ----------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

bool criterion_reproducibility(std::string& detail) {
  namespace fs = std::filesystem;
  const auto cfg = qsg::parse_config_text(
      "family = sk\nn = 3\nbeta = 0.5\ndist = rademacher\nn_samples = 500\n", "universality");
  const fs::path base = fs::temp_directory_path() / "qsg_acceptance_repro";
  fs::remove_all(base);
  auto run = [&](const char* tag, std::uint64_t seed, int workers) {
    qsg::RunOptions o;
    o.output_dir = base / tag;
    o.master_seed = seed;
    o.workers = workers;
    return qsg::run_experiment(cfg, o) == 0;
  };
  bool ok = run("a", 11, 1) && run("b", 11, 1) && run("c", 11, 3) && run("d", 12, 1);
  const std::string a = slurp(base / "a" / "results.csv");
  const bool rerun_identical = ok && a == slurp(base / "b" / "results.csv");
  const bool workers_identical = ok && a == slurp(base / "c" / "results.csv");
  const bool seed_sensitive = ok && a != slurp(base / "d" / "results.csv");
  fs::remove_all(base);
  detail = std::string("rerun byte-identical ") + (rerun_identical ? "yes" : "NO") +
           ", workers invariant " + (workers_identical ? "yes" : "NO") +
           ", seed-sensitive " + (seed_sensitive ? "yes" : "NO");
  return rerun_identical && workers_identical && seed_sensitive;
}

}  // namespace

int main() {
#if defined(__GLIBC__)
  // The dense builders briefly allocate gigabytes of term matrices; keep the
  // pages in the heap instead of refaulting them on every build.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  g_workers = 1;  // all results are worker-invariant; criterion 11 proves it

  const std::vector<Criterion> criteria = {
      {1, "exact-trace oracles", 1.0, criterion_exact},
      {2, "Duhamel kernels vs quadrature", 30.0, criterion_duhamel},
      {3, "pressure derivative identities", 300.0, criterion_derivatives},
      {4, "trace inequalities", 60.0, criterion_trace_bounds},
      {5, "Lie-Trotter convergence", 10.0, criterion_trotter},
      {6, "universality gap bound", 1200.0, criterion_universality},
      {7, "concentration tails", 600.0, criterion_concentration},
      {8, "integration-by-parts residuals", 1.0, criterion_ibp},
      {9, "Feynman-Kac estimators", 600.0, criterion_feynman_kac},
      {10, "interpolation slope bound", 600.0, criterion_interpolation},
      {11, "reproducibility", 0.0, criterion_reproducibility},
  };

  int failures = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& c : criteria) {
    std::string detail;
    bool ok = false;
    const auto start = std::chrono::steady_clock::now();
    try {
      ok = c.body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
      ok = false;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool in_time = c.cap_seconds == 0.0 || secs < c.cap_seconds;
    if (ok && !in_time) detail += " [values ok but runtime cap exceeded]";
    ok = ok && in_time;
    if (!ok) ++failures;
    char cap[48] = "";
    if (c.cap_seconds > 0.0) std::snprintf(cap, sizeof cap, " / cap %g s", c.cap_seconds);
    std::printf("[%s] %2d %s: %s (%.2f s%s)\n", ok ? "PASS" : "FAIL", c.id, c.label,
                detail.c_str(), secs, cap);
    std::fflush(stdout);
  }
  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("ACCEPTANCE: %d/11 criteria pass (%.1f s total)\n", 11 - failures, total);
  return failures == 0 ? 0 : 1;
}
