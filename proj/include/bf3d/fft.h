// Thin wrapper over FFTW real transforms plus FFT-based linear convolution.

#ifndef BF3D_FFT_H_
#define BF3D_FFT_H_

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace bf3d {

// Real-input DFT of fixed size n with the standard negative-exponent kernel:
// X[k] = sum_n x[n] exp(-j 2 pi k n / N), k = 0..n/2. Inverse is unnormalised.
// Safe to share across threads once constructed.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t num_bins() const { return n_ / 2 + 1; }

  void Forward(std::span<const double> in,
               std::span<std::complex<double>> out) const;
  // out[n] = sum_k X[k] exp(+j 2 pi k n / N) over the full Hermitian spectrum.
  void Inverse(std::span<const std::complex<double>> in,
               std::span<double> out) const;

 private:
  struct Plans;
  std::size_t n_;
  std::unique_ptr<Plans> plans_;
};

// Full linear convolution, length a.size() + b.size() - 1.
std::vector<double> FftConvolve(std::span<const double> a,
                                std::span<const double> b);

}  // namespace bf3d

#endif  // BF3D_FFT_H_
