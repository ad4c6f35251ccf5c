#include "typostrike/stealth_config.hpp"

#include <cmath>
#include <string>

#include "typostrike/error.hpp"

namespace typostrike {

std::string_view to_string(WindowKind w) {
  switch (w) {
    case WindowKind::hann: return "hann";
    case WindowKind::hamming: return "hamming";
    case WindowKind::rectangular: return "rectangular";
  }
  return "hann";
}

WindowKind parse_window(std::string_view name) {
  if (name == "hann") return WindowKind::hann;
  if (name == "hamming") return WindowKind::hamming;
  if (name == "rectangular") return WindowKind::rectangular;
  throw DataError("unknown window '" + std::string(name) + "' (expected hann, hamming or rectangular)");
}

void StealthConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DataError("stealth config: epsilon must be positive");
  if (hop_length < 1) throw DataError("stealth config: hop_length must be >= 1");
  if (frame_length < hop_length) throw DataError("stealth config: frame_length must be >= hop_length");
  if (!(embedding_hop_seconds > 0.0)) throw DataError("stealth config: embedding hop must be positive");
  if (embedding_window_seconds < embedding_hop_seconds) {
    throw DataError("stealth config: embedding window must be >= embedding hop");
  }
}

}  // namespace typostrike
