// Time-frequency features: log power, inter-channel phase difference, 3D
// spatial feature, candidate posterior and the region feature built from it.

#ifndef BF3D_FEATURES_H_
#define BF3D_FEATURES_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "bf3d/geometry.h"
#include "bf3d/spectral.h"

namespace bf3d {

enum class FeatureKind { kLps, kIpd, kSf, kRf, kMask };

std::string_view FeatureKindName(FeatureKind kind);

inline constexpr double kLpsFloor = 1e-10;

// Real T x F map stored row-major by frame.
//   LPS   (-inf, inf), floor log(1e-10)
//   IPD   (-pi, pi]
//   SF/RF [-P, P] with P = num_pairs
//   MASK  [0, 1]
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(std::size_t num_frames, std::size_t num_bins, FeatureKind kind,
             std::size_t num_pairs = 1);

  std::size_t num_frames() const { return num_frames_; }
  std::size_t num_bins() const { return num_bins_; }
  FeatureKind kind() const { return kind_; }
  std::size_t num_pairs() const { return num_pairs_; }
  std::pair<double, double> ValueRange() const;

  double& at(std::size_t t, std::size_t f) { return data_[t * num_bins_ + f]; }
  double at(std::size_t t, std::size_t f) const {
    return data_[t * num_bins_ + f];
  }
  std::span<const double> row(std::size_t t) const {
    return {data_.data() + t * num_bins_, num_bins_};
  }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool SameShape(const FeatureMap& other) const {
    return num_frames_ == other.num_frames_ && num_bins_ == other.num_bins_;
  }
  double Mean() const;

 private:
  std::size_t num_frames_ = 0;
  std::size_t num_bins_ = 0;
  FeatureKind kind_ = FeatureKind::kMask;
  std::size_t num_pairs_ = 1;
  std::vector<double> data_;
};

// Wraps an angle to (-pi, pi].
double WrapPhase(double angle);

// log(|Y_ref|^2 + 1e-10).
FeatureMap Lps(const Spectrogram& spec, std::size_t ref_channel = 0);

// angle(Y_first) - angle(Y_second), wrapped to (-pi, pi].
FeatureMap Ipd(const Spectrogram& spec, const MicPair& pair);

// TPD_f = 2 pi (f / n_fft) tau for f = 0..n_fft/2, tau from PureDelay. The
// bin frequency is normalised so the phase is in radians with tau in samples.
std::vector<double> Tpd(const Location3D& loc, const MicArray& array,
                        std::size_t pair_index, std::size_t n_fft,
                        double fs = kDefaultSampleRate,
                        double c = kSpeedOfSound);

// SF_{t,f} = sum_p cos(IPD^p_{t,f} - TPD^p_f(loc)) over every pair of the
// array. Depends on phases only.
FeatureMap SpatialFeature(const Spectrogram& spec, const Location3D& loc,
                          const MicArray& array, double c = kSpeedOfSound);

// Parameters of the two-layer attention network: hidden = relu(w1 x + b1),
// logits = w2 hidden + b2, where x is one frame of the L stacked spatial
// features (candidate-major, L*F values). Weight matrices are row-major
// [out][in].
class PosteriorWeights {
 public:
  static constexpr std::size_t kDefaultHidden = 40;

  PosteriorWeights(std::size_t num_candidates, std::size_t num_bins,
                   std::size_t hidden, std::vector<float> w1,
                   std::vector<float> b1, std::vector<float> w2,
                   std::vector<float> b2);

  // File layout, little-endian: "BW3D", u32 L, u32 F, u32 H, then float32
  // w1 (H x L*F), b1 (H), w2 (L x H), b2 (L). Throws IoError.
  static PosteriorWeights Load(const std::filesystem::path& path);
  void Save(const std::filesystem::path& path) const;

  std::size_t num_candidates() const { return num_candidates_; }
  std::size_t num_bins() const { return num_bins_; }
  std::size_t hidden() const { return hidden_; }
  const std::vector<float>& w1() const { return w1_; }
  const std::vector<float>& b1() const { return b1_; }
  const std::vector<float>& w2() const { return w2_; }
  const std::vector<float>& b2() const { return b2_; }

 private:
  std::size_t num_candidates_;
  std::size_t num_bins_;
  std::size_t hidden_;
  std::vector<float> w1_, b1_, w2_, b2_;
};

struct UniformPosterior {};
// softmax(beta * time-frequency mean of each candidate's SF).
struct HeuristicPosterior {
  double beta = 5.0;
};
// Per-frame softmax of the network output, averaged over frames.
struct MlpPosterior {
  const PosteriorWeights* weights = nullptr;
};
using PosteriorMode =
    std::variant<UniformPosterior, HeuristicPosterior, MlpPosterior>;

// Probability over the L candidates. Throws ShapeError on mismatched maps or
// weight dimensions.
std::vector<double> AttentionPosterior(std::span<const FeatureMap> sf_stack,
                                       const PosteriorMode& mode);

// RF_{t,f} = sum_i p_i SF_{t,f}(l_i). Throws ShapeError on length or shape
// mismatch and ArgumentError when p is not a distribution.
FeatureMap RegionFeature(std::span<const FeatureMap> sf_stack,
                         std::span<const double> posterior);

// clamp((x / P + 1) / 2, 0, 1). Throws TypeError unless kind is SF or RF.
FeatureMap FeatureMask(const FeatureMap& feature);

}  // namespace bf3d

#endif  // BF3D_FEATURES_H_
