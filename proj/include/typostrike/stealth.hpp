#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "typostrike/audio.hpp"
#include "typostrike/providers.hpp"
#include "typostrike/stealth_config.hpp"

namespace typostrike {

// Detectability of one attacked clip; smaller is stealthier. A field is
// absent when its provider is not configured or its computation failed (the
// reason lands in diagnostics).
struct StealthReport {
  std::optional<double> rel_rms;
  std::optional<double> entropy_shift;
  std::optional<double> flatness_shift;
  std::optional<double> embedding_variance_shift;
  std::optional<int> speech_recognition_shift;
  std::vector<std::string> diagnostics;

  nlohmann::ordered_json to_json() const;
  static StealthReport from_json(const nlohmann::ordered_json& j);

  bool operator==(const StealthReport&) const = default;
};

struct StealthProviders {
  EmbeddingProvider* embedder = nullptr;
  AsrProvider* asr = nullptr;
};

// rms(inj) / (rms(orig) + epsilon)
double relative_rms(const Waveform& inj, const Waveform& orig, const StealthConfig& cfg = {});

// Shannon entropy (nats) of the spectrogram normalised jointly over all
// (frame, bin) cells.
double spectral_entropy(const Waveform& w, const StealthConfig& cfg = {});
double entropy_shift(const Waveform& orig, const Waveform& mix, const StealthConfig& cfg = {});

// Mean over frames of geometric / arithmetic mean of the bin powers, with
// bins floored at epsilon.
double spectral_flatness(const Waveform& w, const StealthConfig& cfg = {});
double frame_flatness(std::span<const double> power, double epsilon);
double flatness_shift(const Waveform& orig, const Waveform& mix, const StealthConfig& cfg = {});

// Fixed-window cuts used for embeddings: window and hop from cfg.
std::vector<Waveform> embedding_windows(const Waveform& w, const StealthConfig& cfg);
// Population variance per embedding dimension across windows, averaged.
double embedding_variance(const Waveform& w, EmbeddingProvider& embedder, const StealthConfig& cfg = {});
double embedding_variance_shift(const Waveform& orig, const Waveform& mix, EmbeddingProvider& embedder,
                                const StealthConfig& cfg = {});

// 1 iff the recogniser returns a non-blank transcript.
int speech_detected(const Waveform& w, AsrProvider& asr);
int speech_recognition_shift(const Waveform& orig, const Waveform& mix, AsrProvider& asr);

StealthReport stealth_report(const Waveform& orig, const Waveform& inj, const Waveform& mix,
                             const StealthProviders& providers, const StealthConfig& cfg = {});

}  // namespace typostrike
