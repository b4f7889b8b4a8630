// Short-time Fourier analysis/synthesis with a square-root Hann window pair.

#ifndef BF3D_SPECTRAL_H_
#define BF3D_SPECTRAL_H_

#include <cstddef>
#include <span>
#include <vector>

#include "bf3d/types.h"

namespace bf3d {

struct StftConfig {
  double fs = 16000.0;
  std::size_t n_fft = 512;  // 32 ms
  std::size_t hop = 256;    // 16 ms

  std::size_t num_bins() const { return n_fft / 2 + 1; }
};

// Complex values indexed [frame][bin][channel], stored contiguously in that
// order. `signal_length` is the number of samples the analysis consumed and
// is used by Istft to trim the synthesis tail.
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(std::size_t num_frames, std::size_t num_channels,
              StftConfig config, std::size_t signal_length);

  std::size_t num_frames() const { return num_frames_; }
  std::size_t num_bins() const { return num_bins_; }
  std::size_t num_channels() const { return num_channels_; }
  const StftConfig& config() const { return config_; }
  std::size_t signal_length() const { return signal_length_; }

  Complex& at(std::size_t t, std::size_t f, std::size_t m) {
    return data_[(t * num_bins_ + f) * num_channels_ + m];
  }
  const Complex& at(std::size_t t, std::size_t f, std::size_t m) const {
    return data_[(t * num_bins_ + f) * num_channels_ + m];
  }
  // The M channel values of one bin.
  std::span<const Complex> bin(std::size_t t, std::size_t f) const {
    return {data_.data() + (t * num_bins_ + f) * num_channels_, num_channels_};
  }
  std::span<Complex> bin(std::size_t t, std::size_t f) {
    return {data_.data() + (t * num_bins_ + f) * num_channels_, num_channels_};
  }

  std::span<const Complex> data() const { return data_; }
  std::span<Complex> data() { return data_; }

  // Single-channel copy of channel m. Throws IndexError.
  Spectrogram Channel(std::size_t m) const;

  bool SameShape(const Spectrogram& other) const {
    return num_frames_ == other.num_frames_ && num_bins_ == other.num_bins_ &&
           num_channels_ == other.num_channels_;
  }

 private:
  std::size_t num_frames_ = 0;
  std::size_t num_bins_ = 0;
  std::size_t num_channels_ = 0;
  StftConfig config_;
  std::size_t signal_length_ = 0;
  std::vector<Complex> data_;
};

// w[n] = sin(pi (n + 0.5) / N): the square root of a Hann window sampled
// half a sample off the grid, so w^2[n] + w^2[n + N/2] = 1 and w[0] > 0.
std::vector<double> SqrtHannWindow(std::size_t n);

// floor((len - n_fft) / hop) + 1 full frames, plus one zero-padded frame
// when samples remain past the last full frame. Throws ShapeError when
// the signal is shorter than one window.
std::size_t NumFrames(std::size_t signal_length, const StftConfig& config);

// Analysis uses the positive-exponent kernel Y[k] = sum_n w[n] x[n]
// exp(+j 2 pi k n / N). Under this convention a delay of tau samples appears
// as a phase of +2 pi (k / N) tau, so the inter-channel phase difference of
// a point source equals its theoretical phase difference directly.
Spectrogram Stft(const MultiSignal& signal, const StftConfig& config = {});

// Weighted overlap-add with the same window, normalised by the summed squared
// window at every output sample. Output is trimmed to signal_length().
MultiSignal Istft(const Spectrogram& spec);

}  // namespace bf3d

#endif  // BF3D_SPECTRAL_H_
