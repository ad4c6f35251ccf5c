#include "typostrike/rng.hpp"

#include <limits>
#include <stdexcept>

namespace typostrike {

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index over an empty range");
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = kMax - (kMax % n + 1) % n;  // largest multiple of n, minus one
  std::uint64_t v = next();
  while (v > limit) v = next();
  return v % n;
}

double Rng::uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view key) {
  // FNV-1a over the little-endian seed and the key, then a splitmix64 finaliser.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::uint8_t b) {
    h ^= b;
    h *= 0x100000001b3ULL;
  };
  for (int i = 0; i < 8; ++i) feed(static_cast<std::uint8_t>((global_seed >> (8 * i)) & 0xFF));
  for (char c : key) feed(static_cast<std::uint8_t>(c));
  h += 0x9e3779b97f4a7c15ULL;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

}  // namespace typostrike
