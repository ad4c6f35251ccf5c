#include "typostrike/audio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "typostrike/error.hpp"

namespace typostrike {

Waveform::Waveform(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (sample_rate_ <= 0) throw DataError("sample rate must be positive");
  for (double s : samples_) {
    if (!std::isfinite(s)) throw DataError("waveform contains a non-finite sample");
  }
}

Waveform Waveform::zeros(std::size_t count, int sample_rate) {
  return Waveform(std::vector<double>(count, 0.0), sample_rate);
}

double Waveform::duration_seconds() const {
  return static_cast<double>(samples_.size()) / static_cast<double>(sample_rate_);
}

PowerSpectrogram::PowerSpectrogram(std::vector<double> power, std::size_t frames, int frame_length,
                                   int hop_length, WindowKind window)
    : power_(std::move(power)),
      frames_(frames),
      frame_length_(frame_length),
      hop_length_(hop_length),
      window_(window) {
  if (power_.size() != frames_ * num_bins()) throw DataError("spectrogram shape mismatch");
}

std::span<const double> PowerSpectrogram::frame(std::size_t i) const {
  return std::span<const double>(power_).subspan(i * num_bins(), num_bins());
}

double rms(const Waveform& w) {
  if (w.empty()) throw DataError("empty signal");
  double acc = 0.0;
  for (double s : w.samples()) acc += s * s;
  return std::sqrt(acc / static_cast<double>(w.size()));
}

Waveform apply_gain(const Waveform& w, double gain) {
  if (!std::isfinite(gain) || gain < 0.0) throw DataError("invalid gain");
  if (gain == 1.0) return w;
  std::vector<double> out(w.samples().begin(), w.samples().end());
  for (double& s : out) s *= gain;
  return Waveform(std::move(out), w.sample_rate());
}

Waveform mix(const Waveform& orig, const Waveform& inj, std::size_t offset) {
  if (orig.sample_rate() != inj.sample_rate()) throw DataError("rate mismatch");
  if (offset > orig.size()) throw DataError("offset out of range");
  std::vector<double> out(orig.samples().begin(), orig.samples().end());
  const auto in = inj.samples();
  const std::size_t n = std::min(in.size(), out.size() - offset);
  for (std::size_t k = 0; k < n; ++k) {
    // Adding +0.0 would turn a -0.0 sample into +0.0; skip it so silent
    // injections leave the original bit-identical.
    if (in[k] != 0.0) out[offset + k] += in[k];
  }
  return Waveform(std::move(out), orig.sample_rate());
}

Waveform resample(const Waveform& w, int target_rate) {
  if (target_rate <= 0) throw DataError("target sample rate must be positive");
  if (target_rate == w.sample_rate() || w.empty()) {
    return Waveform(std::vector<double>(w.samples().begin(), w.samples().end()), target_rate);
  }
  const auto in = w.samples();
  const auto n_in = static_cast<std::uint64_t>(in.size());
  const double exact = static_cast<double>(n_in) * target_rate / w.sample_rate();
  const auto n_out = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(exact)));
  std::vector<double> out(n_out);
  if (n_in == 1 || n_out == 1) {
    std::fill(out.begin(), out.end(), in[0]);
    return Waveform(std::move(out), target_rate);
  }
  // Output sample j sits at input position j * (n_in - 1) / (n_out - 1); the
  // integer split keeps positions exact.
  const std::uint64_t den = n_out - 1;
  for (std::uint64_t j = 0; j < n_out; ++j) {
    const std::uint64_t num = j * (n_in - 1);
    const std::uint64_t i0 = num / den;
    const std::uint64_t rem = num % den;
    if (rem == 0) {
      out[j] = in[i0];
    } else {
      const double frac = static_cast<double>(rem) / static_cast<double>(den);
      out[j] = in[i0] + (in[i0 + 1] - in[i0]) * frac;
    }
  }
  return Waveform(std::move(out), target_rate);
}

Waveform downmix(std::span<const double> interleaved, int channels, int sample_rate) {
  if (channels < 1) throw DataError("channel count must be positive");
  if (interleaved.size() % static_cast<std::size_t>(channels) != 0) {
    throw DataError("interleaved sample count is not a multiple of the channel count");
  }
  if (channels == 1) return Waveform(std::vector<double>(interleaved.begin(), interleaved.end()), sample_rate);
  const std::size_t frames = interleaved.size() / static_cast<std::size_t>(channels);
  std::vector<double> out(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) acc += interleaved[i * static_cast<std::size_t>(channels) + c];
    out[i] = acc / channels;
  }
  return Waveform(std::move(out), sample_rate);
}

std::size_t stft_frame_count(std::size_t signal_length, int frame_length, int hop_length) {
  const auto fl = static_cast<std::size_t>(frame_length);
  if (signal_length < fl) return 0;
  return (signal_length - fl) / static_cast<std::size_t>(hop_length) + 1;
}

std::vector<double> analysis_window(WindowKind kind, int length) {
  std::vector<double> win(static_cast<std::size_t>(length), 1.0);
  const double two_pi_over_n = 2.0 * std::numbers::pi / length;
  for (int n = 0; n < length; ++n) {
    switch (kind) {
      case WindowKind::hann: win[n] = 0.5 - 0.5 * std::cos(two_pi_over_n * n); break;
      case WindowKind::hamming: win[n] = 0.54 - 0.46 * std::cos(two_pi_over_n * n); break;
      case WindowKind::rectangular: break;
    }
  }
  return win;
}

PowerSpectrogram stft_power(const Waveform& w, const StealthConfig& cfg) {
  cfg.validate();
  const std::size_t frames = stft_frame_count(w.size(), cfg.frame_length, cfg.hop_length);
  if (frames == 0) throw DataError("signal too short");
  const auto fl = static_cast<std::size_t>(cfg.frame_length);
  const std::size_t bins = fl / 2 + 1;
  const auto win = analysis_window(cfg.window, cfg.frame_length);
  const detail::FftPlan plan(fl);
  const auto samples = w.samples();

  std::vector<double> power(frames * bins);
  std::vector<double> buf(fl);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t start = f * static_cast<std::size_t>(cfg.hop_length);
    for (std::size_t n = 0; n < fl; ++n) buf[n] = samples[start + n] * win[n];
    const auto spec = detail::real_power_spectrum(plan, buf);
    std::copy(spec.begin(), spec.end(), power.begin() + static_cast<std::ptrdiff_t>(f * bins));
  }
  return PowerSpectrogram(std::move(power), frames, cfg.frame_length, cfg.hop_length, cfg.window);
}

}  // namespace typostrike
