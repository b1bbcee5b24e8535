#pragma once

#include <cstdint>
#include <random>

namespace qsg {

// Deterministic stream derivation: the generator for work item `index` of
// stream `stream_tag` depends only on (master_seed, stream_tag, index), never
// on scheduling or worker count.  Tags keep logically distinct streams
// (couplings vs. paths vs. instance generators) from colliding.
struct SeedPolicy {
  std::uint64_t master_seed = 0;

  std::mt19937_64 stream(std::uint64_t stream_tag, std::uint64_t index) const;
};

// splitmix64 finalizer; mixes the three words into a full-period seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c);

// Stream tags used across the library.  Values are arbitrary but fixed:
// changing them changes every sampled number.
enum : std::uint64_t {
  kStreamCouplings = 0x636f75706c,      // disorder environments
  kStreamCouplingsAlt = 0x616c74636f,   // second environment (Gaussian reference)
  kStreamPaths = 0x706174687a,          // Poisson path sampling
  kStreamInstances = 0x696e7374,        // randomized test instances
  kStreamScratch = 0x73637261,          // miscellaneous one-off draws
};

// Uniform on [0,1) from the top 53 bits.
double uniform01(std::mt19937_64& gen);

// Standard normal via Box-Muller.  Caches the second deviate of each pair;
// keep one instance per replica so the cache never crosses stream boundaries.
class NormalDraw {
 public:
  double operator()(std::mt19937_64& gen);

 private:
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Convenience for one-off use; prefer a NormalDraw instance in loops.
double normal_draw(std::mt19937_64& gen);

}  // namespace qsg
