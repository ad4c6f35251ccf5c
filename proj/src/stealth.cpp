#include "typostrike/stealth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "typostrike/error.hpp"

namespace typostrike {

nlohmann::ordered_json StealthReport::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  if (rel_rms) j["rel_rms"] = *rel_rms;
  if (entropy_shift) j["entropy_shift"] = *entropy_shift;
  if (flatness_shift) j["flatness_shift"] = *flatness_shift;
  if (embedding_variance_shift) j["embedding_variance_shift"] = *embedding_variance_shift;
  if (speech_recognition_shift) j["speech_recognition_shift"] = *speech_recognition_shift;
  if (!diagnostics.empty()) j["diagnostics"] = diagnostics;
  return j;
}

StealthReport StealthReport::from_json(const nlohmann::ordered_json& j) {
  StealthReport r;
  auto num = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key)) return std::nullopt;
    return j.at(key).get<double>();
  };
  r.rel_rms = num("rel_rms");
  r.entropy_shift = num("entropy_shift");
  r.flatness_shift = num("flatness_shift");
  r.embedding_variance_shift = num("embedding_variance_shift");
  if (j.contains("speech_recognition_shift")) r.speech_recognition_shift = j.at("speech_recognition_shift").get<int>();
  if (j.contains("diagnostics")) r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  return r;
}

double relative_rms(const Waveform& inj, const Waveform& orig, const StealthConfig& cfg) {
  if (inj.sample_rate() != orig.sample_rate()) throw DataError("rate mismatch");
  return rms(inj) / (rms(orig) + cfg.epsilon);
}

double spectral_entropy(const Waveform& w, const StealthConfig& cfg) {
  const PowerSpectrogram spec = stft_power(w, cfg);
  double total = 0.0;
  for (double p : spec.values()) total += p;
  if (!(total > 0.0)) throw DataError("no spectral energy");
  double h = 0.0;
  for (double p : spec.values()) {
    if (p <= 0.0) continue;
    const double q = p / total;
    h -= q * std::log(q);
  }
  return std::max(h, 0.0);
}

double entropy_shift(const Waveform& orig, const Waveform& mix, const StealthConfig& cfg) {
  return std::abs(spectral_entropy(mix, cfg) - spectral_entropy(orig, cfg));
}

double frame_flatness(std::span<const double> power, double epsilon) {
  double log_sum = 0.0;
  double sum = 0.0;
  for (double p : power) {
    const double v = std::max(p, epsilon);
    log_sum += std::log(v);
    sum += v;
  }
  const double n = static_cast<double>(power.size());
  const double flat = std::exp(log_sum / n) / (sum / n);
  return std::clamp(flat, 0.0, 1.0);  // AM >= GM; clamp only absorbs rounding
}

double spectral_flatness(const Waveform& w, const StealthConfig& cfg) {
  const PowerSpectrogram spec = stft_power(w, cfg);
  double acc = 0.0;
  for (std::size_t f = 0; f < spec.num_frames(); ++f) acc += frame_flatness(spec.frame(f), cfg.epsilon);
  return acc / static_cast<double>(spec.num_frames());
}

double flatness_shift(const Waveform& orig, const Waveform& mix, const StealthConfig& cfg) {
  return std::abs(spectral_flatness(mix, cfg) - spectral_flatness(orig, cfg));
}

std::vector<Waveform> embedding_windows(const Waveform& w, const StealthConfig& cfg) {
  cfg.validate();
  const auto win = static_cast<std::size_t>(std::llround(cfg.embedding_window_seconds * w.sample_rate()));
  const auto hop = static_cast<std::size_t>(std::llround(cfg.embedding_hop_seconds * w.sample_rate()));
  if (win == 0 || hop == 0) throw DataError("embedding window shorter than one sample");
  std::vector<Waveform> out;
  const auto samples = w.samples();
  for (std::size_t start = 0; start + win <= samples.size(); start += hop) {
    out.emplace_back(std::vector<double>(samples.begin() + static_cast<std::ptrdiff_t>(start),
                                         samples.begin() + static_cast<std::ptrdiff_t>(start + win)),
                     w.sample_rate());
  }
  return out;
}

double embedding_variance(const Waveform& w, EmbeddingProvider& embedder, const StealthConfig& cfg) {
  const auto windows = embedding_windows(w, cfg);
  if (windows.size() < 2) throw DataError("clip too short for variance");
  std::vector<std::vector<double>> vecs;
  vecs.reserve(windows.size());
  for (const auto& win : windows) {
    vecs.push_back(embedder.embed(win));
    if (vecs.back().empty() || vecs.back().size() != vecs.front().size()) {
      throw ProviderError("embedding provider returned inconsistent dimensions");
    }
  }
  const std::size_t d = vecs.front().size();
  const auto m = static_cast<double>(vecs.size());
  double total = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (const auto& v : vecs) mean += v[j];
    mean /= m;
    double var = 0.0;
    for (const auto& v : vecs) var += (v[j] - mean) * (v[j] - mean);
    total += var / m;
  }
  return total / static_cast<double>(d);
}

double embedding_variance_shift(const Waveform& orig, const Waveform& mix, EmbeddingProvider& embedder,
                                const StealthConfig& cfg) {
  return std::abs(embedding_variance(mix, embedder, cfg) - embedding_variance(orig, embedder, cfg));
}

int speech_detected(const Waveform& w, AsrProvider& asr) {
  const std::string transcript = asr.transcribe(w);
  return std::any_of(transcript.begin(), transcript.end(), [](unsigned char c) { return !std::isspace(c); }) ? 1 : 0;
}

int speech_recognition_shift(const Waveform& orig, const Waveform& mix, AsrProvider& asr) {
  return std::abs(speech_detected(mix, asr) - speech_detected(orig, asr));
}

StealthReport stealth_report(const Waveform& orig, const Waveform& inj, const Waveform& mix,
                             const StealthProviders& providers, const StealthConfig& cfg) {
  StealthReport report;
  auto attempt = [&report](const char* field, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      report.diagnostics.push_back(std::string(field) + ": " + e.what());
    }
  };
  if (orig.sample_rate() != mix.sample_rate() || orig.sample_rate() != inj.sample_rate()) {
    report.diagnostics.push_back("all fields: rate mismatch");
    return report;
  }
  attempt("rel_rms", [&] { report.rel_rms = relative_rms(inj, orig, cfg); });
  attempt("entropy_shift", [&] { report.entropy_shift = entropy_shift(orig, mix, cfg); });
  attempt("flatness_shift", [&] { report.flatness_shift = flatness_shift(orig, mix, cfg); });
  if (providers.embedder != nullptr) {
    attempt("embedding_variance_shift",
            [&] { report.embedding_variance_shift = embedding_variance_shift(orig, mix, *providers.embedder, cfg); });
  }
  if (providers.asr != nullptr) {
    attempt("speech_recognition_shift",
            [&] { report.speech_recognition_shift = speech_recognition_shift(orig, mix, *providers.asr); });
  }
  return report;
}

}  // namespace typostrike
