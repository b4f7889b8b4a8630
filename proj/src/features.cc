#include "bf3d/features.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Core>

#include "bf3d/error.h"

namespace bf3d {

std::string_view FeatureKindName(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kLps: return "lps";
    case FeatureKind::kIpd: return "ipd";
    case FeatureKind::kSf: return "sf";
    case FeatureKind::kRf: return "rf";
    case FeatureKind::kMask: return "mask";
  }
  return "unknown";
}

FeatureMap::FeatureMap(std::size_t num_frames, std::size_t num_bins,
                       FeatureKind kind, std::size_t num_pairs)
    : num_frames_(num_frames),
      num_bins_(num_bins),
      kind_(kind),
      num_pairs_(num_pairs),
      data_(num_frames * num_bins, 0.0) {}

std::pair<double, double> FeatureMap::ValueRange() const {
  const double p = static_cast<double>(num_pairs_);
  switch (kind_) {
    case FeatureKind::kLps: return {std::log(kLpsFloor), HUGE_VAL};
    case FeatureKind::kIpd: return {-std::numbers::pi, std::numbers::pi};
    case FeatureKind::kSf:
    case FeatureKind::kRf: return {-p, p};
    case FeatureKind::kMask: return {0.0, 1.0};
  }
  return {-HUGE_VAL, HUGE_VAL};
}

double FeatureMap::Mean() const {
  if (data_.empty()) return 0.0;
  double sum = 0.0;
  for (double v : data_) sum += v;
  return sum / static_cast<double>(data_.size());
}

double WrapPhase(double angle) {
  constexpr double kTwoPi = 2 * std::numbers::pi;
  return angle - kTwoPi * std::ceil((angle - std::numbers::pi) / kTwoPi);
}

FeatureMap Lps(const Spectrogram& spec, std::size_t ref_channel) {
  if (ref_channel >= spec.num_channels()) {
    throw IndexError("Lps: reference channel out of range");
  }
  FeatureMap out(spec.num_frames(), spec.num_bins(), FeatureKind::kLps);
  for (std::size_t t = 0; t < spec.num_frames(); ++t) {
    for (std::size_t f = 0; f < spec.num_bins(); ++f) {
      out.at(t, f) = std::log(std::norm(spec.at(t, f, ref_channel)) + kLpsFloor);
    }
  }
  return out;
}

FeatureMap Ipd(const Spectrogram& spec, const MicPair& pair) {
  if (pair.first >= spec.num_channels() || pair.second >= spec.num_channels()) {
    throw IndexError("Ipd: pair references a missing channel");
  }
  FeatureMap out(spec.num_frames(), spec.num_bins(), FeatureKind::kIpd);
  for (std::size_t t = 0; t < spec.num_frames(); ++t) {
    for (std::size_t f = 0; f < spec.num_bins(); ++f) {
      out.at(t, f) = WrapPhase(std::arg(spec.at(t, f, pair.first)) -
                               std::arg(spec.at(t, f, pair.second)));
    }
  }
  return out;
}

std::vector<double> Tpd(const Location3D& loc, const MicArray& array,
                        std::size_t pair_index, std::size_t n_fft, double fs,
                        double c) {
  if (n_fft < 2) throw ArgumentError("Tpd: n_fft must be >= 2");
  const double tau = PureDelay(loc, array, pair_index, fs, c);
  std::vector<double> out(n_fft / 2 + 1);
  for (std::size_t f = 0; f < out.size(); ++f) {
    out[f] = 2 * std::numbers::pi *
             (static_cast<double>(f) / static_cast<double>(n_fft)) * tau;
  }
  return out;
}

FeatureMap SpatialFeature(const Spectrogram& spec, const Location3D& loc,
                          const MicArray& array, double c) {
  if (array.num_pairs() == 0) throw ArgumentError("SpatialFeature: no pairs");
  if (array.num_mics() > spec.num_channels()) {
    throw ShapeError("SpatialFeature: array has more mics than channels");
  }
  const StftConfig& cfg = spec.config();
  FeatureMap out(spec.num_frames(), spec.num_bins(), FeatureKind::kSf,
                 array.num_pairs());
  for (std::size_t p = 0; p < array.num_pairs(); ++p) {
    const MicPair& pair = array.pair(p);
    const std::vector<double> tpd = Tpd(loc, array, p, cfg.n_fft, cfg.fs, c);
    for (std::size_t t = 0; t < spec.num_frames(); ++t) {
      for (std::size_t f = 0; f < spec.num_bins(); ++f) {
        const double ipd = std::arg(spec.at(t, f, pair.first)) -
                           std::arg(spec.at(t, f, pair.second));
        out.at(t, f) += std::cos(ipd - tpd[f]);
      }
    }
  }
  return out;
}

namespace {

void CheckStack(std::span<const FeatureMap> stack, const char* where) {
  if (stack.empty()) {
    throw ShapeError(std::string(where) + ": empty feature stack");
  }
  for (const FeatureMap& m : stack) {
    if (!m.SameShape(stack[0])) {
      throw ShapeError(std::string(where) + ": feature maps differ in shape");
    }
  }
}

// In-place numerically stable softmax.
void Softmax(std::span<double> z) {
  const double peak = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - peak);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

std::vector<double> MlpForward(std::span<const FeatureMap> stack,
                               const PosteriorWeights& weights) {
  const std::size_t num_l = stack.size();
  const std::size_t num_f = stack[0].num_bins();
  const std::size_t num_t = stack[0].num_frames();
  if (weights.num_candidates() != num_l || weights.num_bins() != num_f) {
    std::ostringstream os;
    os << "AttentionPosterior: weights expect L=" << weights.num_candidates()
       << ", F=" << weights.num_bins() << " but the stack has L=" << num_l
       << ", F=" << num_f;
    throw ShapeError(os.str());
  }
  if (num_t == 0) throw ShapeError("AttentionPosterior: no frames");
  const std::size_t h = weights.hidden();
  using RowMajor =
      Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> w1(weights.w1().data(), h, num_l * num_f);
  const Eigen::Map<const RowMajor> w2(weights.w2().data(), num_l, h);
  const Eigen::MatrixXd w1d = w1.cast<double>();
  const Eigen::MatrixXd w2d = w2.cast<double>();
  const Eigen::VectorXd b1 =
      Eigen::Map<const Eigen::VectorXf>(weights.b1().data(), h).cast<double>();
  const Eigen::VectorXd b2 = Eigen::Map<const Eigen::VectorXf>(
                                 weights.b2().data(), num_l).cast<double>();

  // Column t holds frame t of every candidate, candidate-major.
  Eigen::MatrixXd input(num_l * num_f, num_t);
  for (std::size_t t = 0; t < num_t; ++t) {
    for (std::size_t i = 0; i < num_l; ++i) {
      const auto row = stack[i].row(t);
      for (std::size_t f = 0; f < num_f; ++f) input(i * num_f + f, t) = row[f];
    }
  }
  const Eigen::MatrixXd hidden =
      ((w1d * input).colwise() + b1).cwiseMax(0.0);
  Eigen::MatrixXd logits = (w2d * hidden).colwise() + b2;

  std::vector<double> posterior(num_l, 0.0);
  std::vector<double> frame(num_l);
  for (std::size_t t = 0; t < num_t; ++t) {
    for (std::size_t i = 0; i < num_l; ++i) frame[i] = logits(i, t);
    Softmax(frame);
    for (std::size_t i = 0; i < num_l; ++i) posterior[i] += frame[i];
  }
  for (double& p : posterior) p /= static_cast<double>(num_t);
  return posterior;
}

}  // namespace

std::vector<double> AttentionPosterior(std::span<const FeatureMap> sf_stack,
                                       const PosteriorMode& mode) {
  CheckStack(sf_stack, "AttentionPosterior");
  const std::size_t num_l = sf_stack.size();
  if (std::holds_alternative<UniformPosterior>(mode)) {
    return std::vector<double>(num_l, 1.0 / static_cast<double>(num_l));
  }
  if (const auto* h = std::get_if<HeuristicPosterior>(&mode)) {
    std::vector<double> z(num_l);
    for (std::size_t i = 0; i < num_l; ++i) {
      z[i] = h->beta * sf_stack[i].Mean();
    }
    Softmax(z);
    return z;
  }
  const auto& mlp = std::get<MlpPosterior>(mode);
  if (mlp.weights == nullptr) {
    throw ArgumentError("AttentionPosterior: mlp mode without weights");
  }
  return MlpForward(sf_stack, *mlp.weights);
}

FeatureMap RegionFeature(std::span<const FeatureMap> sf_stack,
                         std::span<const double> posterior) {
  CheckStack(sf_stack, "RegionFeature");
  if (posterior.size() != sf_stack.size()) {
    throw ShapeError("RegionFeature: posterior length differs from stack size");
  }
  double total = 0.0;
  for (double p : posterior) {
    if (!(p >= 0.0)) throw ArgumentError("RegionFeature: negative posterior");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw ArgumentError("RegionFeature: posterior does not sum to 1");
  }
  const FeatureMap& first = sf_stack[0];
  FeatureMap out(first.num_frames(), first.num_bins(), FeatureKind::kRf,
                 first.num_pairs());
  auto dst = out.data();
  for (std::size_t i = 0; i < sf_stack.size(); ++i) {
    const auto src = sf_stack[i].data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += posterior[i] * src[k];
  }
  return out;
}

FeatureMap FeatureMask(const FeatureMap& feature) {
  if (feature.kind() != FeatureKind::kSf && feature.kind() != FeatureKind::kRf) {
    throw TypeError(std::string("FeatureMask: expected an sf or rf map, got ") +
                    std::string(FeatureKindName(feature.kind())));
  }
  FeatureMap out(feature.num_frames(), feature.num_bins(), FeatureKind::kMask);
  const double p = static_cast<double>(feature.num_pairs());
  auto dst = out.data();
  const auto src = feature.data();
  for (std::size_t k = 0; k < dst.size(); ++k) {
    dst[k] = std::clamp((src[k] / p + 1.0) / 2.0, 0.0, 1.0);
  }
  return out;
}

}  // namespace bf3d
