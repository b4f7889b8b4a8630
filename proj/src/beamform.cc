#include "bf3d/beamform.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

#include "bf3d/error.h"
#include "bf3d/log.h"

namespace bf3d {

FeatureMap OracleIrm(const Spectrogram& target,
                     std::span<const Spectrogram> others,
                     std::size_t ref_channel) {
  if (ref_channel >= target.num_channels()) {
    throw IndexError("OracleIrm: reference channel out of range");
  }
  for (const Spectrogram& o : others) {
    if (o.num_frames() != target.num_frames() ||
        o.num_bins() != target.num_bins() ||
        ref_channel >= o.num_channels()) {
      throw ShapeError("OracleIrm: spectrogram shapes differ");
    }
  }
  FeatureMap mask(target.num_frames(), target.num_bins(), FeatureKind::kMask);
  for (std::size_t t = 0; t < target.num_frames(); ++t) {
    for (std::size_t f = 0; f < target.num_bins(); ++f) {
      const double s = std::abs(target.at(t, f, ref_channel));
      double n = 0.0;
      for (const Spectrogram& o : others) n += std::abs(o.at(t, f, ref_channel));
      mask.at(t, f) = s / (s + n + kMaskFloor);
    }
  }
  return mask;
}

FeatureMap ComplementMask(const FeatureMap& mask) {
  if (mask.kind() != FeatureKind::kMask) {
    throw TypeError("ComplementMask: input is not a mask");
  }
  FeatureMap out(mask.num_frames(), mask.num_bins(), FeatureKind::kMask);
  auto dst = out.data();
  const auto src = mask.data();
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = 1.0 - src[k];
  return out;
}

Scm::Scm(ScmMode mode, std::size_t num_frames, std::size_t num_bins,
         std::size_t num_channels, StftConfig config)
    : mode_(mode),
      num_frames_(mode == ScmMode::kUtterance ? 1 : num_frames),
      num_bins_(num_bins),
      num_channels_(num_channels),
      config_(config),
      mats_(num_frames_ * num_bins,
            Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(num_channels),
                                   static_cast<Eigen::Index>(num_channels))) {}

namespace {

void CheckMask(const Spectrogram& spec, const FeatureMap& mask,
               const char* where) {
  if (mask.num_frames() != spec.num_frames() ||
      mask.num_bins() != spec.num_bins()) {
    throw ShapeError(std::string(where) + ": mask shape differs from spectrogram");
  }
  for (double v : mask.data()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ArgumentError(std::string(where) + ": mask values outside [0, 1]");
    }
  }
}

Eigen::Map<const Eigen::VectorXcd> BinVector(const Spectrogram& spec,
                                             std::size_t t, std::size_t f) {
  const auto b = spec.bin(t, f);
  return {b.data(), static_cast<Eigen::Index>(b.size())};
}

// Solves (a + load I) x = b. Closed form for 2 x 2. Returns false when the
// loaded matrix is singular.
bool SolveLoaded(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b,
                 Eigen::MatrixXcd* x) {
  const Eigen::Index m = a.rows();
  const double load = kDiagonalLoading * a.trace().real() / static_cast<double>(m);
  Eigen::MatrixXcd loaded = a;
  loaded.diagonal().array() += load;
  if (m == 2) {
    const Complex det = loaded(0, 0) * loaded(1, 1) - loaded(0, 1) * loaded(1, 0);
    if (!(std::abs(det) > 0.0) || !std::isfinite(std::abs(det))) return false;
    Eigen::Matrix2cd inv;
    inv << loaded(1, 1), -loaded(0, 1), -loaded(1, 0), loaded(0, 0);
    *x = (inv / det) * b;
  } else {
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(loaded);
    if (!lu.isInvertible()) return false;
    *x = lu.solve(b);
  }
  return x->allFinite();
}

void WarnStatus(const std::vector<BinStatus>& status, const char* where) {
  std::size_t zero = 0, singular = 0;
  for (BinStatus s : status) {
    if (s == BinStatus::kZeroTarget) ++zero;
    if (s == BinStatus::kSingular) ++singular;
  }
  if (zero == 0 && singular == 0) return;
  std::ostringstream os;
  os << where << ": " << zero << " bin(s) with zero target statistics (zero "
     << "weights), " << singular << " singular bin(s) (reference passthrough)";
  if (singular > 0) {
    os << "; singular bins:";
    for (std::size_t f = 0; f < status.size(); ++f) {
      if (status[f] == BinStatus::kSingular) os << ' ' << f;
    }
  }
  LogWarning(os.str());
}

}  // namespace

Scm MaskedScmFramewise(const Spectrogram& spec, const FeatureMap& mask) {
  CheckMask(spec, mask, "MaskedScmFramewise");
  Scm scm(ScmMode::kFramewise, spec.num_frames(), spec.num_bins(),
          spec.num_channels(), spec.config());
  for (std::size_t t = 0; t < spec.num_frames(); ++t) {
    for (std::size_t f = 0; f < spec.num_bins(); ++f) {
      const Eigen::VectorXcd s = mask.at(t, f) * BinVector(spec, t, f);
      scm.at(t, f) = s * s.adjoint();
    }
  }
  return scm;
}

Scm MaskedScmUtterance(const Spectrogram& spec, const FeatureMap& mask,
                       MaskWeighting weighting) {
  CheckMask(spec, mask, "MaskedScmUtterance");
  Scm scm(ScmMode::kUtterance, 1, spec.num_bins(), spec.num_channels(),
          spec.config());
  for (std::size_t f = 0; f < spec.num_bins(); ++f) {
    Eigen::MatrixXcd& acc = scm.at(f);
    double total = 0.0;
    for (std::size_t t = 0; t < spec.num_frames(); ++t) {
      const double m = mask.at(t, f);
      const double w = weighting == MaskWeighting::kSquared ? m * m : m;
      if (w == 0.0) continue;
      const auto y = BinVector(spec, t, f);
      acc.noalias() += w * (y * y.adjoint());
      total += w;
    }
    acc /= total + kMaskFloor;
  }
  return scm;
}

BeamWeights::BeamWeights(std::size_t num_frames, std::size_t num_bins,
                         std::size_t num_channels, std::size_t ref_channel,
                         StftConfig config)
    : num_frames_(num_frames),
      num_bins_(num_bins),
      num_channels_(num_channels),
      ref_channel_(ref_channel),
      config_(config),
      data_(std::max<std::size_t>(num_frames, 1) * num_bins * num_channels) {
  if (ref_channel >= num_channels) {
    throw IndexError("BeamWeights: reference channel out of range");
  }
}

BeamWeights BeamWeights::Selector(std::size_t num_bins,
                                  std::size_t num_channels,
                                  std::size_t ref_channel, StftConfig config) {
  BeamWeights w(0, num_bins, num_channels, ref_channel, config);
  for (std::size_t f = 0; f < num_bins; ++f) w.at(f)[ref_channel] = 1.0;
  return w;
}

BeamWeights MvdrWeights(const Scm& scm_s, const Scm& scm_n,
                        std::size_t ref_channel,
                        std::vector<BinStatus>* status) {
  if (scm_s.mode() != ScmMode::kUtterance || scm_n.mode() != ScmMode::kUtterance) {
    throw ShapeError("MvdrWeights: requires utterance-mode SCMs");
  }
  if (scm_s.num_bins() != scm_n.num_bins() ||
      scm_s.num_channels() != scm_n.num_channels()) {
    throw ShapeError("MvdrWeights: target and noise SCM shapes differ");
  }
  const std::size_t num_m = scm_s.num_channels();
  BeamWeights w(0, scm_s.num_bins(), num_m, ref_channel, scm_s.config());
  std::vector<BinStatus> local(scm_s.num_bins(), BinStatus::kOk);
  Eigen::MatrixXcd numerator;
  for (std::size_t f = 0; f < scm_s.num_bins(); ++f) {
    const Eigen::MatrixXcd& phi_s = scm_s.at(f);
    if (!(phi_s.trace().real() > 0.0)) {
      local[f] = BinStatus::kZeroTarget;
      continue;
    }
    if (!SolveLoaded(scm_n.at(f), phi_s, &numerator)) {
      local[f] = BinStatus::kSingular;
      w.at(f)[ref_channel] = 1.0;
      continue;
    }
    const Complex tr = numerator.trace();
    if (!(std::abs(tr) > 0.0)) {
      local[f] = BinStatus::kZeroTarget;
      continue;
    }
    for (std::size_t m = 0; m < num_m; ++m) {
      w.at(f)[m] = numerator(static_cast<Eigen::Index>(m),
                             static_cast<Eigen::Index>(ref_channel)) / tr;
    }
  }
  WarnStatus(local, "MvdrWeights");
  if (status) *status = std::move(local);
  return w;
}

BeamWeights McwfWeights(const Spectrogram& spec, const Spectrogram& target_ref,
                        std::size_t ref_channel,
                        std::vector<BinStatus>* status) {
  if (target_ref.num_channels() != 1 ||
      target_ref.num_frames() != spec.num_frames() ||
      target_ref.num_bins() != spec.num_bins()) {
    throw ShapeError("McwfWeights: target must be a frame-aligned mono spectrogram");
  }
  const std::size_t num_m = spec.num_channels();
  const auto num_t = static_cast<double>(spec.num_frames());
  BeamWeights w(0, spec.num_bins(), num_m, ref_channel, spec.config());
  std::vector<BinStatus> local(spec.num_bins(), BinStatus::kOk);
  const auto mm = static_cast<Eigen::Index>(num_m);
  Eigen::MatrixXcd solution;
  for (std::size_t f = 0; f < spec.num_bins(); ++f) {
    Eigen::MatrixXcd phi_yy = Eigen::MatrixXcd::Zero(mm, mm);
    Eigen::VectorXcd phi_ys = Eigen::VectorXcd::Zero(mm);
    for (std::size_t t = 0; t < spec.num_frames(); ++t) {
      const auto y = BinVector(spec, t, f);
      phi_yy.noalias() += y * y.adjoint();
      phi_ys += y * std::conj(target_ref.at(t, f, 0));
    }
    phi_yy /= num_t;
    phi_ys /= num_t;
    if (!(phi_ys.squaredNorm() > 0.0)) {
      local[f] = BinStatus::kZeroTarget;
      continue;
    }
    if (!SolveLoaded(phi_yy, phi_ys, &solution)) {
      local[f] = BinStatus::kSingular;
      w.at(f)[ref_channel] = 1.0;
      continue;
    }
    for (std::size_t m = 0; m < num_m; ++m) {
      w.at(f)[m] = solution(static_cast<Eigen::Index>(m), 0);
    }
  }
  WarnStatus(local, "McwfWeights");
  if (status) *status = std::move(local);
  return w;
}

Spectrogram ApplyBeamformer(const BeamWeights& w, const Spectrogram& spec) {
  if (w.num_channels() != spec.num_channels() ||
      w.num_bins() != spec.num_bins()) {
    throw ShapeError("ApplyBeamformer: weight and spectrogram shapes differ");
  }
  if (w.framewise() && w.num_frames() != spec.num_frames()) {
    throw ShapeError("ApplyBeamformer: per-frame weights do not match T");
  }
  Spectrogram out(spec.num_frames(), 1, spec.config(), spec.signal_length());
  for (std::size_t t = 0; t < spec.num_frames(); ++t) {
    for (std::size_t f = 0; f < spec.num_bins(); ++f) {
      const auto wf = w.framewise() ? w.at(t, f) : w.at(f);
      const auto y = spec.bin(t, f);
      Complex acc = 0.0;
      for (std::size_t m = 0; m < y.size(); ++m) acc += std::conj(wf[m]) * y[m];
      out.at(t, f, 0) = acc;
    }
  }
  return out;
}

Eigen::VectorXcd SteeringVector(const Location3D& loc, const MicArray& array,
                                std::size_t f_bin, std::size_t n_fft,
                                double fs, double c, bool near_field,
                                std::size_t ref_channel) {
  const std::size_t num_m = array.num_mics();
  if (ref_channel >= num_m) {
    throw IndexError("SteeringVector: reference channel out of range");
  }
  std::vector<double> delay(num_m), amp(num_m, 1.0);
  if (near_field) {
    for (std::size_t m = 0; m < num_m; ++m) {
      const double d = SourceToMicDistance(loc, array, m);
      delay[m] = d * fs / c;
      amp[m] = d;
    }
    const double d_ref = amp[ref_channel];
    for (double& a : amp) a = d_ref / a;
  } else {
    const Vec3 u = loc.Direction();
    for (std::size_t m = 0; m < num_m; ++m) {
      delay[m] = -u.dot(array.position(m)) * fs / c;
    }
  }
  const double omega = 2 * std::numbers::pi * static_cast<double>(f_bin) /
                       static_cast<double>(n_fft);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(num_m));
  for (std::size_t m = 0; m < num_m; ++m) {
    v(static_cast<Eigen::Index>(m)) =
        std::polar(amp[m], omega * (delay[m] - delay[ref_channel]));
  }
  return v;
}

}  // namespace bf3d
