#pragma once

#include <string>
#include <string_view>

namespace typostrike {

enum class WindowKind { hann, hamming, rectangular };

std::string_view to_string(WindowKind w);
WindowKind parse_window(std::string_view name);

// Analysis parameters shared by the STFT and the stealth metrics. Stored in
// every manifest so experiments are self-describing.
struct StealthConfig {
  double epsilon = 1e-8;
  int frame_length = 1024;
  int hop_length = 512;
  WindowKind window = WindowKind::hann;
  double embedding_window_seconds = 1.0;
  double embedding_hop_seconds = 0.5;

  // Throws DataError when any invariant is broken.
  void validate() const;

  bool operator==(const StealthConfig&) const = default;
};

}  // namespace typostrike
