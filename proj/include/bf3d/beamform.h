// Mask-weighted spatial covariance matrices and closed-form beamformers.

#ifndef BF3D_BEAMFORM_H_
#define BF3D_BEAMFORM_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bf3d/features.h"
#include "bf3d/geometry.h"
#include "bf3d/spectral.h"

namespace bf3d {

inline constexpr double kMaskFloor = 1e-10;
inline constexpr double kDiagonalLoading = 1e-6;

// |S| / (|S| + sum |others| + eps) at the reference channel.
FeatureMap OracleIrm(const Spectrogram& target,
                     std::span<const Spectrogram> others,
                     std::size_t ref_channel = 0);
// 1 - mask.
FeatureMap ComplementMask(const FeatureMap& mask);

enum class ScmMode { kUtterance, kFramewise };

// M x M Hermitian matrices, one per bin (utterance) or per (t, f)
// (framewise, stored frame-major).
class Scm {
 public:
  Scm(ScmMode mode, std::size_t num_frames, std::size_t num_bins,
      std::size_t num_channels, StftConfig config = {});

  ScmMode mode() const { return mode_; }
  std::size_t num_frames() const { return num_frames_; }
  std::size_t num_bins() const { return num_bins_; }
  std::size_t num_channels() const { return num_channels_; }
  const StftConfig& config() const { return config_; }

  Eigen::MatrixXcd& at(std::size_t t, std::size_t f) {
    return mats_[t * num_bins_ + f];
  }
  const Eigen::MatrixXcd& at(std::size_t t, std::size_t f) const {
    return mats_[t * num_bins_ + f];
  }
  // Utterance-mode access.
  Eigen::MatrixXcd& at(std::size_t f) { return mats_[f]; }
  const Eigen::MatrixXcd& at(std::size_t f) const { return mats_[f]; }

 private:
  ScmMode mode_;
  std::size_t num_frames_;
  std::size_t num_bins_;
  std::size_t num_channels_;
  StftConfig config_;
  std::vector<Eigen::MatrixXcd> mats_;
};

// (M o Y)(M o Y)^H at every bin; rank <= 1.
Scm MaskedScmFramewise(const Spectrogram& spec, const FeatureMap& mask);

enum class MaskWeighting { kLinear, kSquared };

// sum_t w_t Y Y^H / (sum_t w_t + eps) with w = M^2 (kSquared) or M.
Scm MaskedScmUtterance(const Spectrogram& spec, const FeatureMap& mask,
                       MaskWeighting weighting = MaskWeighting::kSquared);

// Complex M-vector per bin (utterance weights, num_frames() == 0) or per
// (t, f). The beamformer output is w^H Y.
class BeamWeights {
 public:
  BeamWeights(std::size_t num_frames, std::size_t num_bins,
              std::size_t num_channels, std::size_t ref_channel,
              StftConfig config);

  bool framewise() const { return num_frames_ > 0; }
  std::size_t num_frames() const { return num_frames_; }
  std::size_t num_bins() const { return num_bins_; }
  std::size_t num_channels() const { return num_channels_; }
  std::size_t ref_channel() const { return ref_channel_; }
  const StftConfig& config() const { return config_; }

  std::span<Complex> at(std::size_t t, std::size_t f) {
    return {data_.data() + (t * num_bins_ + f) * num_channels_, num_channels_};
  }
  std::span<const Complex> at(std::size_t t, std::size_t f) const {
    return {data_.data() + (t * num_bins_ + f) * num_channels_, num_channels_};
  }
  std::span<Complex> at(std::size_t f) { return at(0, f); }
  std::span<const Complex> at(std::size_t f) const { return at(0, f); }

  // The selector e_ref at every bin.
  static BeamWeights Selector(std::size_t num_bins, std::size_t num_channels,
                              std::size_t ref_channel, StftConfig config);

 private:
  std::size_t num_frames_;
  std::size_t num_bins_;
  std::size_t num_channels_;
  std::size_t ref_channel_;
  StftConfig config_;
  std::vector<Complex> data_;
};

enum class BinStatus { kOk, kZeroTarget, kSingular };

// Souden MVDR: w_f = (Phi_NN + dI)^-1 Phi_SS e_ref / tr((Phi_NN + dI)^-1
// Phi_SS), d = 1e-6 tr(Phi_NN) / M. Bins with zero target statistics get
// zero weights; bins whose loaded noise matrix is still singular fall back to
// e_ref. Both are flagged in `status` (and warned about once per call).
BeamWeights MvdrWeights(const Scm& scm_s, const Scm& scm_n,
                        std::size_t ref_channel,
                        std::vector<BinStatus>* status = nullptr);

// Utterance multichannel Wiener filter toward the reference-channel target
// spectrogram: w_f = (Phi_YY + dI)^-1 phi_YS with both statistics averaged
// over frames. `target_ref` must be single-channel and frame-aligned.
BeamWeights McwfWeights(const Spectrogram& spec, const Spectrogram& target_ref,
                        std::size_t ref_channel = 0,
                        std::vector<BinStatus>* status = nullptr);

// S_{t,f} = w^H_{(t),f} Y_{t,f}; single-channel result.
Spectrogram ApplyBeamformer(const BeamWeights& w, const Spectrogram& spec);

// Array response toward `loc` at bin f_bin, referenced to `ref_channel`:
// v_m = (d_ref / d_m) exp(+j 2 pi (f / N) (tau_m - tau_ref)), matching the
// positive-exponent analysis convention. With near_field = false the
// amplitude term is dropped and tau_m comes from the plane-wave projection,
// so the vector no longer depends on distance.
Eigen::VectorXcd SteeringVector(const Location3D& loc, const MicArray& array,
                                std::size_t f_bin, std::size_t n_fft,
                                double fs = kDefaultSampleRate,
                                double c = kSpeedOfSound,
                                bool near_field = true,
                                std::size_t ref_channel = 0);

// Weighted by w: spatial response over an azimuth x elevation x distance
// lattice, in dB relative to the grid maximum.
struct BeampatternGrid {
  std::vector<double> azimuths_deg;
  std::vector<double> elevations_deg;
  std::vector<double> distances_m;
  std::vector<std::size_t> bands;  // bin indices averaged in power
};

class Beampattern {
 public:
  Beampattern(BeampatternGrid grid, std::vector<double> response_db);

  const BeampatternGrid& grid() const { return grid_; }
  // Row-major [azimuth][elevation][distance].
  const std::vector<double>& response_db() const { return response_db_; }
  double at(std::size_t ia, std::size_t ie, std::size_t id) const;
  std::size_t NearestIndex(const Location3D& loc) const;
  // Fraction of cells whose response is strictly above cell `index`.
  double RankFraction(std::size_t index) const;

  // Header theta_deg,phi_deg,dist_m,response_db, one row per cell in
  // row-major order.
  void WriteCsv(const std::string& path) const;
  // Little-endian float32 responses plus a JSON sidecar at `path`.json
  // describing the axes and layout.
  void WriteRaw(const std::string& path) const;

 private:
  BeampatternGrid grid_;
  std::vector<double> response_db_;
};

// B(l) = 10 log10(mean over bands of |w_f^H v_f(l)|^2), normalised to a
// 0 dB grid maximum. Requires utterance weights. Throws ArgumentError for an
// empty grid or band set.
Beampattern ComputeBeampattern(const BeamWeights& w, const MicArray& array,
                               const BeampatternGrid& grid,
                               double c = kSpeedOfSound,
                               bool near_field = true);

}  // namespace bf3d

#endif  // BF3D_BEAMFORM_H_
