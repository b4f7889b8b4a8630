#include "bf3d/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "bf3d/error.h"

namespace bf3d {
namespace {

// FFTW planning is not thread-safe; execution with the new-array API is.
std::mutex& PlannerMutex() {
  static std::mutex mu;
  return mu;
}

std::size_t NextPowerOfTwo(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

struct RealFft::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

RealFft::RealFft(std::size_t n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n < 2) throw ArgumentError("RealFft: size must be at least 2");
  std::vector<double> real(n);
  std::vector<std::complex<double>> spec(n / 2 + 1);
  auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());
  // FFTW_UNALIGNED pins the codelet choice, so results do not depend on the
  // alignment of the buffers passed at execution time.
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard<std::mutex> lock(PlannerMutex());
  plans_->forward =
      fftw_plan_dft_r2c_1d(static_cast<int>(n), real.data(), cplx, flags);
  plans_->inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n), cplx,
                                         real.data(), flags | FFTW_DESTROY_INPUT);
  if (!plans_->forward || !plans_->inverse) {
    throw NumericalError("RealFft: FFTW planning failed");
  }
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  if (plans_->forward) fftw_destroy_plan(plans_->forward);
  if (plans_->inverse) fftw_destroy_plan(plans_->inverse);
}

void RealFft::Forward(std::span<const double> in,
                      std::span<std::complex<double>> out) const {
  if (in.size() != n_ || out.size() != num_bins()) {
    throw ShapeError("RealFft::Forward: buffer size mismatch");
  }
  // r2c does not modify its input, but the API takes a non-const pointer.
  fftw_execute_dft_r2c(plans_->forward, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::Inverse(std::span<const std::complex<double>> in,
                      std::span<double> out) const {
  if (in.size() != num_bins() || out.size() != n_) {
    throw ShapeError("RealFft::Inverse: buffer size mismatch");
  }
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(plans_->inverse,
                       reinterpret_cast<fftw_complex*>(scratch.data()),
                       out.data());
}

std::vector<double> FftConvolve(std::span<const double> a,
                                std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = NextPowerOfTwo(std::max<std::size_t>(out_len, 2));
  RealFft fft(n);
  std::vector<double> pa(n, 0.0), pb(n, 0.0);
  std::copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  std::vector<std::complex<double>> fa(fft.num_bins()), fb(fft.num_bins());
  fft.Forward(pa, fa);
  fft.Forward(pb, fb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  fft.Inverse(fa, pa);
  std::vector<double> out(pa.begin(), pa.begin() + out_len);
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

}  // namespace bf3d
