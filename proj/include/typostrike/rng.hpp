#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace typostrike {

// Seeded generator whose outputs are identical on every platform: only the
// raw mt19937_64 stream is used, never the implementation-defined std
// distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, n) by rejection; n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  // Uniform in [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::mt19937_64 engine_;
};

// Stable per-item seed: hash of (global seed, item id).
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view key);

}  // namespace typostrike
