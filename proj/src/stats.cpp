#include "qsg/stats.hpp"

#include "qsg/errors.hpp"

namespace qsg {

namespace {

double pairwise_sum_range(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_range(v, half) + pairwise_sum_range(v + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> v) { return pairwise_sum_range(v.data(), v.size()); }

MeanStderr mean_stderr(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 2) throw DomainError("mean_stderr: need at least 2 samples");
  const double mean = pairwise_sum(v) / double(n);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = v[i] - mean;
    sq[i] = d * d;
  }
  const double var = pairwise_sum(sq) / double(n - 1);
  return MeanStderr{mean, std::sqrt(var / double(n)), n};
}

TailPoint tail_frequency(std::span<const double> v, double center, double u) {
  if (v.empty()) throw DomainError("tail_frequency: empty sample");
  std::size_t count = 0;
  for (double x : v)
    if (std::abs(x - center) >= u) ++count;
  const double n = double(v.size());
  const double p = double(count) / n;
  return TailPoint{u, p, std::sqrt(p * (1.0 - p) / n)};
}

}  // namespace qsg
