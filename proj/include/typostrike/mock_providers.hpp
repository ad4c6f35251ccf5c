#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "typostrike/providers.hpp"

namespace typostrike {

namespace detail {
class FftPlan;
}

// In-process stand-ins for the remote model services. All of them are pure
// functions of their inputs.
//
// The mock speech format: every word lasts 0.5 s at 16 kHz and is five
// 100 ms tone symbols, a sync tone followed by four data tones spelling a
// 16-bit hash of the word. Tones complete an integer number of cycles per
// symbol so they are orthogonal under a symbol-length DFT.
namespace mock_speech {
inline constexpr int kSampleRate = kCanonicalSampleRate;
inline constexpr std::size_t kSymbolSamples = 1600;
inline constexpr std::size_t kSymbolsPerWord = 5;
inline constexpr std::size_t kWordSamples = kSymbolSamples * kSymbolsPerWord;
inline constexpr double kSyncHz = 4000.0;
inline constexpr double kToneAmplitude = 0.5;
inline constexpr std::size_t kPhaseStep = 100;

double data_hz(int digit);  // 600 + 200 * digit, digit in [0, 16)
std::uint16_t word_code(std::string_view word);
}  // namespace mock_speech

class DeterministicTts : public TtsProvider {
 public:
  ProviderIdentity identity() const override { return {"mock:deterministic_tts", "1"}; }
  Waveform synthesize(std::string_view text, std::string_view voice) override;
};

// Decodes mock speech. The slot grid is aligned to the phase (in steps of
// kPhaseStep) with the most sync-tone energy. A symbol counts as heard when its tone's RMS exceeds
// `threshold` times the RMS of everything else in that symbol slot, so an
// injection is recovered only when it is locally loud enough relative to the
// original audio; otherwise the transcript follows the dominant component.
class DeterministicAsr : public AsrProvider {
 public:
  explicit DeterministicAsr(const std::vector<std::string>& lexicon, double threshold = 0.5);

  ProviderIdentity identity() const override { return {"mock:deterministic_asr", "1"}; }
  std::string transcribe(const Waveform& audio) override;
  double threshold() const { return threshold_; }

 private:
  std::map<std::uint16_t, std::string> words_by_code_;
  double threshold_;
};

// d = 8: mean spectral power in eight equal-width bands of the window.
class DeterministicEmbedder : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDimension = 8;
  ProviderIdentity identity() const override { return {"mock:deterministic_embedder", "1"}; }
  std::vector<double> embed(const Waveform& window) override;

 private:
  std::mutex mu_;
  std::map<std::size_t, std::shared_ptr<const detail::FftPlan>> plans_;
};

// Answers with the vocabulary label heard last in the audio (via the ASR
// mock) and otherwise with the item's ground truth.
class TranscriptFollowerMllm : public MllmProvider {
 public:
  TranscriptFollowerMllm(std::shared_ptr<AsrProvider> asr, std::vector<std::string> vocabulary,
                         std::map<std::string, std::string> ground_truth_by_item);

  ProviderIdentity identity() const override { return {"mock:transcript_follower_mllm", "1"}; }
  InferenceResponse infer(const InferenceRequest& request) override;
  bool consumes_frames() const override { return false; }

 private:
  std::shared_ptr<AsrProvider> asr_;
  std::vector<std::string> vocabulary_;
  std::map<std::string, std::string> ground_truth_;
};

// Returns replies[attempt % replies.size()].
class ScriptedTextGen : public TextGenProvider {
 public:
  explicit ScriptedTextGen(std::vector<std::string> replies);
  ProviderIdentity identity() const override { return {"mock:scripted_textgen", "1"}; }
  std::string generate(std::string_view prompt, int attempt) override;

 private:
  std::vector<std::string> replies_;
};

}  // namespace typostrike
