#include "bf3d/signals.h"

#include <cmath>
#include <numbers>
#include <random>

#include "bf3d/error.h"
#include "bf3d/fft.h"

namespace bf3d {
namespace {

constexpr double kTargetRms = 0.1;

std::size_t NextPowerOfTwo(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// White Gaussian noise shaped to |H(f)| = 1/sqrt(f) inside [lo, hi] Hz.
Signal ShapedNoise(std::size_t num_samples, double fs, double lo, double hi,
                   std::mt19937_64& rng) {
  const std::size_t n = NextPowerOfTwo(std::max<std::size_t>(num_samples, 2));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = gauss(rng);
  RealFft fft(n);
  std::vector<Complex> spec(fft.num_bins());
  fft.Forward(x, spec);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n);
    spec[k] *= (f >= lo && f <= hi) ? 1.0 / std::sqrt(f) : 0.0;
  }
  fft.Inverse(spec, x);
  return Signal(x.begin(), x.begin() + static_cast<long>(num_samples));
}

void NormalizeRms(Signal& x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  if (e <= 0.0) return;
  const double g = kTargetRms / std::sqrt(e / static_cast<double>(x.size()));
  for (double& v : x) v *= g;
}

}  // namespace

Signal SyntheticSpeech(std::size_t num_samples, double fs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Signal x = ShapedNoise(num_samples, fs, 100.0, 7000.0, rng);

  constexpr double kSyllableRate = 4.0;
  const double syllable = fs / kSyllableRate;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double offset = unit(rng) * syllable;
  const std::size_t num_syllables =
      static_cast<std::size_t>(std::ceil((num_samples + offset) / syllable)) + 1;
  std::vector<double> level(num_syllables);
  for (double& l : level) l = unit(rng) < 0.2 ? 0.0 : 0.3 + 0.7 * unit(rng);
  for (std::size_t i = 0; i < num_samples; ++i) {
    const double pos = (static_cast<double>(i) + offset) / syllable;
    const auto idx = static_cast<std::size_t>(pos);
    const double s = std::sin(std::numbers::pi * (pos - std::floor(pos)));
    x[i] *= level[idx] * s * s;
  }
  NormalizeRms(x);
  return x;
}

Signal PinkNoise(std::size_t num_samples, double fs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Signal x = ShapedNoise(num_samples, fs, 20.0, fs / 2, rng);
  NormalizeRms(x);
  return x;
}

bool SynthesizeSignalRef(const std::string& ref, std::size_t num_samples,
                         double fs, Signal* out) {
  const auto parse_seed = [&](std::size_t prefix_len) {
    try {
      return std::stoull(ref.substr(prefix_len));
    } catch (const std::exception&) {
      throw ArgumentError("bad synthetic signal reference '" + ref + "'");
    }
  };
  if (ref.rfind("synth:speech:", 0) == 0) {
    *out = SyntheticSpeech(num_samples, fs, parse_seed(13));
    return true;
  }
  if (ref.rfind("synth:pink:", 0) == 0) {
    *out = PinkNoise(num_samples, fs, parse_seed(11));
    return true;
  }
  return false;
}

}  // namespace bf3d
