#include "bf3d/spectral.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bf3d/error.h"
#include "bf3d/fft.h"

namespace bf3d {

Spectrogram::Spectrogram(std::size_t num_frames, std::size_t num_channels,
                         StftConfig config, std::size_t signal_length)
    : num_frames_(num_frames),
      num_bins_(config.num_bins()),
      num_channels_(num_channels),
      config_(config),
      signal_length_(signal_length),
      data_(num_frames * num_bins_ * num_channels) {}

Spectrogram Spectrogram::Channel(std::size_t m) const {
  if (m >= num_channels_) {
    std::ostringstream os;
    os << "Spectrogram: channel " << m << " out of range (" << num_channels_
       << " channels)";
    throw IndexError(os.str());
  }
  Spectrogram out(num_frames_, 1, config_, signal_length_);
  for (std::size_t t = 0; t < num_frames_; ++t) {
    for (std::size_t f = 0; f < num_bins_; ++f) out.at(t, f, 0) = at(t, f, m);
  }
  return out;
}

std::vector<double> SqrtHannWindow(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::sin(std::numbers::pi * (static_cast<double>(i) + 0.5) /
                    static_cast<double>(n));
  }
  return w;
}

namespace {

void ValidateConfig(const StftConfig& config) {
  if (config.n_fft < 2 || config.n_fft % 2 != 0) {
    throw ArgumentError("STFT: n_fft must be even and >= 2");
  }
  if (config.hop == 0 || config.hop > config.n_fft) {
    throw ArgumentError("STFT: hop must be in [1, n_fft]");
  }
  if (!(config.fs > 0.0)) throw ArgumentError("STFT: fs must be positive");
}

}  // namespace

std::size_t NumFrames(std::size_t signal_length, const StftConfig& config) {
  ValidateConfig(config);
  if (signal_length < config.n_fft) {
    std::ostringstream os;
    os << "STFT: signal of " << signal_length
       << " samples is shorter than one window (" << config.n_fft << ")";
    throw ShapeError(os.str());
  }
  const std::size_t span = signal_length - config.n_fft;
  return span / config.hop + 1 + (span % config.hop != 0 ? 1 : 0);
}

Spectrogram Stft(const MultiSignal& signal, const StftConfig& config) {
  if (signal.empty()) throw ArgumentError("STFT: no channels");
  const std::size_t len = signal[0].size();
  for (const Signal& ch : signal) {
    if (ch.size() != len) throw ShapeError("STFT: channels differ in length");
  }
  const std::size_t frames = NumFrames(len, config);
  const std::size_t n = config.n_fft;
  const std::vector<double> window = SqrtHannWindow(n);
  const RealFft fft(n);

  Spectrogram spec(frames, signal.size(), config, len);
  std::vector<double> frame(n);
  std::vector<Complex> bins(fft.num_bins());
  for (std::size_t m = 0; m < signal.size(); ++m) {
    for (std::size_t t = 0; t < frames; ++t) {
      const std::size_t start = t * config.hop;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = start + i;
        frame[i] = idx < len ? signal[m][idx] * window[i] : 0.0;
      }
      fft.Forward(frame, bins);
      for (std::size_t f = 0; f < bins.size(); ++f) {
        spec.at(t, f, m) = std::conj(bins[f]);
      }
    }
  }
  return spec;
}

MultiSignal Istft(const Spectrogram& spec) {
  const StftConfig& config = spec.config();
  ValidateConfig(config);
  if (spec.num_bins() != config.num_bins()) {
    throw ShapeError("ISTFT: bin count does not match n_fft");
  }
  if (spec.num_frames() == 0 || spec.num_channels() == 0) {
    throw ShapeError("ISTFT: empty spectrogram");
  }
  const std::size_t n = config.n_fft;
  const std::size_t full_len = (spec.num_frames() - 1) * config.hop + n;
  const std::size_t out_len =
      spec.signal_length() > 0 ? spec.signal_length() : full_len;
  if (out_len > full_len) {
    throw ShapeError("ISTFT: signal_length exceeds the frames' coverage");
  }
  const std::vector<double> window = SqrtHannWindow(n);
  const RealFft fft(n);

  std::vector<double> norm(full_len, 0.0);
  for (std::size_t t = 0; t < spec.num_frames(); ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      norm[t * config.hop + i] += window[i] * window[i];
    }
  }

  MultiSignal out(spec.num_channels());
  std::vector<Complex> bins(fft.num_bins());
  std::vector<double> frame(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t m = 0; m < spec.num_channels(); ++m) {
    std::vector<double> acc(full_len, 0.0);
    for (std::size_t t = 0; t < spec.num_frames(); ++t) {
      for (std::size_t f = 0; f < bins.size(); ++f) {
        bins[f] = std::conj(spec.at(t, f, m));
      }
      fft.Inverse(bins, frame);
      const std::size_t start = t * config.hop;
      for (std::size_t i = 0; i < n; ++i) {
        acc[start + i] += frame[i] * inv_n * window[i];
      }
    }
    out[m].resize(out_len);
    for (std::size_t i = 0; i < out_len; ++i) {
      out[m][i] = norm[i] > 0.0 ? acc[i] / norm[i] : 0.0;
    }
  }
  return out;
}

}  // namespace bf3d
