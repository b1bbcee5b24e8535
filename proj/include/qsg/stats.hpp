#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace qsg {

// Pairwise (cascade) summation: O(log n) error growth and, unlike a running
// sum, independent of how per-replica values were produced or scheduled.
double pairwise_sum(std::span<const double> v);

struct MeanStderr {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

// Sample mean and standard error (sample sd / sqrt(n)) via pairwise sums.
MeanStderr mean_stderr(std::span<const double> v);

// Exceedance frequency #{|v_i - center| >= u} / n with the binomial standard
// error sqrt(p(1-p)/n).
struct TailPoint {
  double u = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;
};

TailPoint tail_frequency(std::span<const double> v, double center, double u);

}  // namespace qsg
