#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace typostrike::detail {

// Forward DFT of a fixed length. Power-of-two lengths use iterative radix-2,
// everything else goes through Bluestein's chirp-z reduction. A plan is an
// immutable value; `transform` may be called concurrently.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const { return n_; }
  void transform(std::vector<std::complex<double>>& data) const;

 private:
  void radix2(std::vector<std::complex<double>>& data, const std::vector<std::complex<double>>& twiddles) const;

  std::size_t n_;
  bool pow2_;
  std::size_t m_;  // radix-2 length used internally
  std::vector<std::size_t> bitrev_;
  std::vector<std::complex<double>> twiddles_;
  std::vector<std::complex<double>> chirp_;       // exp(-i pi k^2 / n)
  std::vector<std::complex<double>> chirp_fft_;   // FFT of the conjugate chirp filter
};

// |X_k|^2 for k = 0..n/2 of a real frame.
std::vector<double> real_power_spectrum(const FftPlan& plan, const std::vector<double>& frame);

}  // namespace typostrike::detail
