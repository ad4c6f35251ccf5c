#include "typostrike/mock_providers.hpp"

#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "typostrike/error.hpp"
#include "typostrike/text.hpp"

namespace typostrike {

namespace mock_speech {

double data_hz(int digit) { return 600.0 + 200.0 * digit; }

std::uint16_t word_code(std::string_view word) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : word) {
    h ^= c;
    h *= 16777619u;
  }
  return static_cast<std::uint16_t>((h ^ (h >> 16)) & 0xFFFF);
}

}  // namespace mock_speech

namespace {

using namespace mock_speech;

constexpr int kSyncSymbol = 16;
constexpr int kNoSymbol = -1;

double symbol_hz(int symbol) { return symbol == kSyncSymbol ? kSyncHz : data_hz(symbol); }

// cos/sin tables of every symbol tone over one symbol slot.
struct ToneTables {
  std::array<std::vector<double>, 17> cos_t;
  std::array<std::vector<double>, 17> sin_t;

  ToneTables() {
    for (int s = 0; s < 17; ++s) {
      cos_t[s].resize(kSymbolSamples);
      sin_t[s].resize(kSymbolSamples);
      const double w = 2.0 * std::numbers::pi * symbol_hz(s) / kSampleRate;
      for (std::size_t n = 0; n < kSymbolSamples; ++n) {
        cos_t[s][n] = std::cos(w * static_cast<double>(n));
        sin_t[s][n] = std::sin(w * static_cast<double>(n));
      }
    }
  }
};

const ToneTables& tables() {
  static const ToneTables t;
  return t;
}

// Mean power of tone `s` in the slot, i.e. A^2 / 2 for a tone of amplitude A.
double tone_power(const double* x, int s) {
  const auto& t = tables();
  double re = 0.0, im = 0.0;
  for (std::size_t n = 0; n < kSymbolSamples; ++n) {
    re += x[n] * t.cos_t[s][n];
    im += x[n] * t.sin_t[s][n];
  }
  const double n = static_cast<double>(kSymbolSamples);
  return 2.0 * (re * re + im * im) / (n * n);
}

int decode_slot(const double* x, double threshold) {
  double total = 0.0;
  for (std::size_t n = 0; n < kSymbolSamples; ++n) total += x[n] * x[n];
  total /= static_cast<double>(kSymbolSamples);
  int best = kNoSymbol;
  double best_power = 0.0;
  for (int s = 0; s < 17; ++s) {
    const double p = tone_power(x, s);
    if (p > best_power) {
      best_power = p;
      best = s;
    }
  }
  const double residual = std::max(total - best_power, 0.0);
  if (best_power <= 1e-12 || best_power <= threshold * threshold * residual) return kNoSymbol;
  return best;
}

std::uint64_t fnv64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Waveform DeterministicTts::synthesize(std::string_view text, std::string_view voice) {
  const auto words = split_words(text);
  const double phase = 2.0 * std::numbers::pi * static_cast<double>(fnv64(voice) % 1000) / 1000.0;
  std::vector<double> out;
  out.reserve(words.size() * kWordSamples);
  auto emit = [&](double hz) {
    const double w = 2.0 * std::numbers::pi * hz / kSampleRate;
    for (std::size_t n = 0; n < kSymbolSamples; ++n) {
      out.push_back(kToneAmplitude * std::sin(w * static_cast<double>(n) + phase));
    }
  };
  for (const auto& word : words) {
    const std::uint16_t code = word_code(word);
    emit(kSyncHz);
    for (int nibble = 3; nibble >= 0; --nibble) emit(data_hz((code >> (4 * nibble)) & 0xF));
  }
  return Waveform(std::move(out), kSampleRate);
}

DeterministicAsr::DeterministicAsr(const std::vector<std::string>& lexicon, double threshold) : threshold_(threshold) {
  if (!(threshold > 0.0)) throw DataError("asr threshold must be positive");
  for (const auto& entry : lexicon) {
    for (const auto& word : split_words(entry)) {
      const auto code = word_code(word);
      const auto [it, inserted] = words_by_code_.emplace(code, word);
      if (!inserted && it->second != word) {
        throw DataError("mock lexicon collision between '" + it->second + "' and '" + word + "'");
      }
    }
  }
}

std::string DeterministicAsr::transcribe(const Waveform& audio) {
  const Waveform w = audio.sample_rate() == kSampleRate ? audio : resample(audio, kSampleRate);
  const auto x = w.samples();
  if (x.size() < kSymbolSamples) return {};

  // Align the slot grid on the phase carrying the most sync energy.
  std::size_t best_phase = 0;
  double best_sync = -1.0;
  for (std::size_t phase = 0; phase < kSymbolSamples; phase += kPhaseStep) {
    double sync = 0.0;
    for (std::size_t start = phase; start + kSymbolSamples <= x.size(); start += kSymbolSamples) {
      sync += tone_power(x.data() + start, kSyncSymbol);
    }
    if (sync > best_sync) {
      best_sync = sync;
      best_phase = phase;
    }
  }

  std::vector<int> symbols;
  for (std::size_t start = best_phase; start + kSymbolSamples <= x.size(); start += kSymbolSamples) {
    symbols.push_back(decode_slot(x.data() + start, threshold_));
  }

  std::string transcript;
  for (std::size_t i = 0; i < symbols.size();) {
    bool word = symbols[i] == kSyncSymbol && i + kSymbolsPerWord <= symbols.size();
    std::uint16_t code = 0;
    for (std::size_t k = 1; word && k < kSymbolsPerWord; ++k) {
      const int s = symbols[i + k];
      word = s >= 0 && s < kSyncSymbol;
      code = static_cast<std::uint16_t>((code << 4) | static_cast<std::uint16_t>(s));
    }
    if (!word) {
      ++i;
      continue;
    }
    if (const auto it = words_by_code_.find(code); it != words_by_code_.end()) {
      if (!transcript.empty()) transcript += ' ';
      transcript += it->second;
    }
    i += kSymbolsPerWord;
  }
  return transcript;
}

std::vector<double> DeterministicEmbedder::embed(const Waveform& window) {
  if (window.empty()) throw DataError("cannot embed an empty window");
  std::shared_ptr<const detail::FftPlan> plan;
  {
    std::lock_guard lock(mu_);
    auto& slot = plans_[window.size()];
    if (!slot) slot = std::make_shared<const detail::FftPlan>(window.size());
    plan = slot;
  }
  const std::vector<double> frame(window.samples().begin(), window.samples().end());
  const auto power = detail::real_power_spectrum(*plan, frame);
  const double n = static_cast<double>(window.size());
  std::vector<double> out(kDimension, 0.0);
  const std::size_t bins = power.size();
  for (std::size_t b = 0; b < kDimension; ++b) {
    const std::size_t lo = b * bins / kDimension;
    const std::size_t hi = std::max(lo + 1, (b + 1) * bins / kDimension);
    double acc = 0.0;
    for (std::size_t k = lo; k < hi && k < bins; ++k) acc += power[k];
    out[b] = acc / (static_cast<double>(hi - lo) * n);
  }
  return out;
}

TranscriptFollowerMllm::TranscriptFollowerMllm(std::shared_ptr<AsrProvider> asr, std::vector<std::string> vocabulary,
                                               std::map<std::string, std::string> ground_truth_by_item)
    : asr_(std::move(asr)), vocabulary_(std::move(vocabulary)), ground_truth_(std::move(ground_truth_by_item)) {
  if (!asr_) throw DataError("transcript follower needs an ASR provider");
}

InferenceResponse TranscriptFollowerMllm::infer(const InferenceRequest& request) {
  InferenceResponse response;
  std::optional<std::size_t> latest;
  if (request.audio) {
    const auto heard = split_words(asr_->transcribe(*request.audio));
    std::size_t latest_len = 0;
    for (const auto& label : vocabulary_) {
      const auto words = split_words(label);
      const auto end = last_word_run(heard, words);
      if (end && (!latest || *end > *latest || (*end == *latest && words.size() > latest_len))) {
        latest = end;
        latest_len = words.size();
        response.text = label;
      }
    }
  }
  if (!latest) {
    const auto it = ground_truth_.find(request.item_id);
    if (it != ground_truth_.end()) response.text = it->second;
  }
  return response;
}

ScriptedTextGen::ScriptedTextGen(std::vector<std::string> replies) : replies_(std::move(replies)) {
  if (replies_.empty()) throw DataError("scripted textgen needs at least one reply");
}

std::string ScriptedTextGen::generate(std::string_view, int attempt) {
  return replies_[static_cast<std::size_t>(attempt) % replies_.size()];
}

}  // namespace typostrike
