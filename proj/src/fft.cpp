#include "fft.hpp"

#include <numbers>
#include <stdexcept>

namespace typostrike::detail {

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

std::vector<std::complex<double>> make_twiddles(std::size_t m) {
  std::vector<std::complex<double>> tw(m / 2);
  for (std::size_t k = 0; k < m / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
    tw[k] = std::polar(1.0, angle);
  }
  return tw;
}

std::vector<std::size_t> make_bitrev(std::size_t m) {
  std::vector<std::size_t> rev(m, 0);
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < m) ++bits;
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) {
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    }
    rev[i] = r;
  }
  return rev;
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("fft length must be positive");
  pow2_ = (n & (n - 1)) == 0;
  m_ = pow2_ ? n : next_pow2(2 * n - 1);
  bitrev_ = make_bitrev(m_);
  twiddles_ = make_twiddles(m_);
  if (pow2_) return;

  chirp_.resize(n);
  const std::size_t two_n = 2 * n;
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the phase argument small.
    const std::size_t k2 = static_cast<std::size_t>((static_cast<unsigned __int128>(k) * k) % two_n);
    const double angle = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    chirp_[k] = std::polar(1.0, angle);
  }
  chirp_fft_.assign(m_, {0.0, 0.0});
  chirp_fft_[0] = std::conj(chirp_[0]);
  for (std::size_t k = 1; k < n; ++k) {
    chirp_fft_[k] = std::conj(chirp_[k]);
    chirp_fft_[m_ - k] = std::conj(chirp_[k]);
  }
  radix2(chirp_fft_, twiddles_);
}

void FftPlan::radix2(std::vector<std::complex<double>>& data,
                     const std::vector<std::complex<double>>& twiddles) const {
  const std::size_t m = data.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (i < bitrev_[i]) std::swap(data[i], data[bitrev_[i]]);
  }
  for (std::size_t len = 2; len <= m; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = m / len;
    for (std::size_t start = 0; start < m; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        const std::complex<double> t = twiddles[j * stride] * data[start + j + half];
        data[start + j + half] = data[start + j] - t;
        data[start + j] += t;
      }
    }
  }
}

void FftPlan::transform(std::vector<std::complex<double>>& data) const {
  if (data.size() != n_) throw std::invalid_argument("fft input length does not match plan");
  if (pow2_) {
    radix2(data, twiddles_);
    return;
  }
  std::vector<std::complex<double>> a(m_, {0.0, 0.0});
  for (std::size_t k = 0; k < n_; ++k) a[k] = data[k] * chirp_[k];
  radix2(a, twiddles_);
  for (std::size_t k = 0; k < m_; ++k) a[k] = std::conj(a[k] * chirp_fft_[k]);
  radix2(a, twiddles_);  // conj(fft(conj(.))) is the unscaled inverse
  const double scale = 1.0 / static_cast<double>(m_);
  for (std::size_t k = 0; k < n_; ++k) data[k] = std::conj(a[k]) * scale * chirp_[k];
}

std::vector<double> real_power_spectrum(const FftPlan& plan, const std::vector<double>& frame) {
  std::vector<std::complex<double>> buf(frame.begin(), frame.end());
  plan.transform(buf);
  const std::size_t bins = plan.size() / 2 + 1;
  std::vector<double> power(bins);
  for (std::size_t k = 0; k < bins; ++k) power[k] = std::norm(buf[k]);
  return power;
}

}  // namespace typostrike::detail
