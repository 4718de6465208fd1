#pragma once

#include <cstdint>
#include <random>

namespace sparse_lsq {

// Seeded random stream. The engine is std::mt19937_64 (fully specified by the
// C++ standard); its seed is splitmix64(seed + 0x9E3779B97F4A7C15 * stream) so
// that Monte Carlo trials can take independent streams from one base seed.
// uniform() takes the top 53 bits of one engine output; normal() is
// Box-Muller on two uniforms with no cached second variate.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next() { return engine_(); }
  // [0, 1)
  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace sparse_lsq
