#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "typostrike/stealth_config.hpp"

namespace typostrike {

inline constexpr int kCanonicalSampleRate = 16000;

// Mono signal. Samples are unclamped doubles; clipping only happens when a
// file is exported.
class Waveform {
 public:
  Waveform() = default;
  Waveform(std::vector<double> samples, int sample_rate);

  static Waveform zeros(std::size_t count, int sample_rate);

  std::span<const double> samples() const { return samples_; }
  int sample_rate() const { return sample_rate_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double duration_seconds() const;

  bool operator==(const Waveform&) const = default;

 private:
  std::vector<double> samples_;
  int sample_rate_ = kCanonicalSampleRate;
};

// Row-major frames x bins matrix of |X_k|^2 values, bins = frame_length/2 + 1.
class PowerSpectrogram {
 public:
  PowerSpectrogram(std::vector<double> power, std::size_t frames, int frame_length,
                   int hop_length, WindowKind window);

  std::size_t num_frames() const { return frames_; }
  std::size_t num_bins() const { return static_cast<std::size_t>(frame_length_ / 2 + 1); }
  int frame_length() const { return frame_length_; }
  int hop_length() const { return hop_length_; }
  WindowKind window() const { return window_; }

  std::span<const double> frame(std::size_t i) const;
  double at(std::size_t frame, std::size_t bin) const { return power_[frame * num_bins() + bin]; }
  std::span<const double> values() const { return power_; }

 private:
  std::vector<double> power_;
  std::size_t frames_;
  int frame_length_;
  int hop_length_;
  WindowKind window_;
};

double rms(const Waveform& w);
Waveform apply_gain(const Waveform& w, double gain);

// orig + inj placed at `offset`, truncated to the length of orig.
Waveform mix(const Waveform& orig, const Waveform& inj, std::size_t offset);

// Endpoint-aligned linear interpolation.
Waveform resample(const Waveform& w, int target_rate);

// Averages interleaved channels into one.
Waveform downmix(std::span<const double> interleaved, int channels, int sample_rate);

std::size_t stft_frame_count(std::size_t signal_length, int frame_length, int hop_length);
std::vector<double> analysis_window(WindowKind kind, int length);
PowerSpectrogram stft_power(const Waveform& w, const StealthConfig& cfg);

}  // namespace typostrike
