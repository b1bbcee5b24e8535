#include "qsg/rng.hpp"

#include <cmath>
#include <numbers>

namespace qsg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return splitmix64(splitmix64(splitmix64(a) ^ b) ^ c);
}

std::mt19937_64 SeedPolicy::stream(std::uint64_t stream_tag, std::uint64_t index) const {
  return std::mt19937_64(mix_seed(master_seed, stream_tag, index));
}

double uniform01(std::mt19937_64& gen) {
  return double(gen() >> 11) * 0x1.0p-53;
}

double NormalDraw::operator()(std::mt19937_64& gen) {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 kept away from 0 so the log is finite.
  double u1 = 0.0;
  do {
    u1 = uniform01(gen);
  } while (u1 <= 0.0);
  const double u2 = uniform01(gen);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

double normal_draw(std::mt19937_64& gen) {
  NormalDraw d;
  return d(gen);
}

}  // namespace qsg
