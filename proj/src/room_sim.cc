#include "bf3d/room_sim.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bf3d/error.h"
#include "bf3d/fft.h"
#include "bf3d/log.h"

namespace bf3d {

Room::Room(Vec3 dims, double t60, int max_order)
    : dims_(dims), t60_(t60), max_order_(max_order) {
  if (!dims_.allFinite() || !(dims_.array() > 0.0).all()) {
    throw ArgumentError("Room: dimensions must be positive");
  }
  if (!(t60_ >= 0.0 && t60_ <= 1.0)) {
    throw ArgumentError("Room: t60 must be in [0, 1] s");
  }
  if (max_order_ < 0) throw ArgumentError("Room: max_order must be >= 0");
}

double Room::Volume() const { return dims_.prod(); }

double Room::SurfaceArea() const {
  return 2.0 * (dims_.x() * dims_.y() + dims_.x() * dims_.z() +
                dims_.y() * dims_.z());
}

bool Room::StrictlyContains(const Vec3& p) const {
  return (p.array() > 0.0).all() && (p.array() < dims_.array()).all();
}

double AbsorptionFromT60(const Room& room) {
  if (room.t60() <= 0.0) return 1.0;
  const double a =
      0.161 * room.Volume() / (room.SurfaceArea() * room.t60());
  if (a > 1.0) {
    std::ostringstream os;
    os << "Sabine absorption " << a << " exceeds 1 for t60=" << room.t60()
       << " s; clamped to 1";
    LogWarning(os.str());
    return 1.0;
  }
  return a;
}

namespace {

double Sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

struct Image {
  double delay;  // samples
  double amplitude;
};

}  // namespace

std::vector<double> SimulateRir(const Room& room, const Vec3& source,
                                const Vec3& mic, double fs, double c) {
  if (!room.StrictlyContains(source)) {
    throw GeometryError("SimulateRir: source outside the room");
  }
  if (!room.StrictlyContains(mic)) {
    throw GeometryError("SimulateRir: microphone outside the room");
  }
  if ((source - mic).norm() <= 0.0) {
    throw GeometryError("SimulateRir: source and microphone coincide");
  }
  if (!(fs > 0.0) || !(c > 0.0)) {
    throw ArgumentError("SimulateRir: fs and c must be positive");
  }
  const double reflection = std::sqrt(1.0 - AbsorptionFromT60(room));
  const int max_order = room.max_order();
  const Vec3& dims = room.dims();
  const double direct_amp = 1.0 / (4 * std::numbers::pi * (source - mic).norm());

  std::vector<Image> images;
  const int n_max = max_order / 2 + 1;
  for (int nx = -n_max; nx <= n_max; ++nx)
    for (int ny = -n_max; ny <= n_max; ++ny)
      for (int nz = -n_max; nz <= n_max; ++nz)
        for (int q = 0; q < 8; ++q) {
          const int n[3] = {nx, ny, nz};
          int order = 0;
          Vec3 image;
          for (int axis = 0; axis < 3; ++axis) {
            const int qa = (q >> axis) & 1;
            order += std::abs(n[axis] - qa) + std::abs(n[axis]);
            image[axis] = (1 - 2 * qa) * source[axis] + 2 * n[axis] * dims[axis];
          }
          if (order > max_order) continue;
          const double r = (image - mic).norm();
          const double amp =
              std::pow(reflection, order) / (4 * std::numbers::pi * r);
          if (order > 0 && amp < kImageAmplitudeCutoff * direct_amp) continue;
          images.push_back({r * fs / c, amp});
        }

  double max_delay = 0.0;
  for (const Image& im : images) max_delay = std::max(max_delay, im.delay);
  constexpr int kHalf = kSincTaps / 2;
  const std::size_t length =
      static_cast<std::size_t>(std::floor(max_delay)) + kHalf + 1;
  std::vector<double> rir(length, 0.0);
  for (const Image& im : images) {
    const long base = static_cast<long>(std::floor(im.delay));
    for (int k = -kHalf; k <= kHalf; ++k) {
      const long idx = base + k;
      if (idx < 0) continue;
      const double x = static_cast<double>(idx) - im.delay;
      const double window =
          0.5 * (1.0 + std::cos(std::numbers::pi * x / (kHalf + 1)));
      rir[static_cast<std::size_t>(idx)] += im.amplitude * window * Sinc(x);
    }
  }
  return rir;
}

Vec3 ArrayPlacement::ToRoom(const Vec3& p) const {
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  return center + Vec3(cy * p.x() - sy * p.y(), sy * p.x() + cy * p.y(), p.z());
}

Vec3 ArrayPlacement::ToArray(const Vec3& room) const {
  const Vec3 p = room - center;
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  return {cy * p.x() + sy * p.y(), -sy * p.x() + cy * p.y(), p.z()};
}

std::string SourceRoleName(SourceRole role) {
  switch (role) {
    case SourceRole::kTarget: return "target";
    case SourceRole::kInterferer: return "interferer";
    case SourceRole::kNoise: return "noise";
  }
  return "unknown";
}

SourceRole ParseSourceRole(const std::string& name) {
  if (name == "target") return SourceRole::kTarget;
  if (name == "interferer") return SourceRole::kInterferer;
  if (name == "noise") return SourceRole::kNoise;
  throw ArgumentError("unknown source role '" + name + "'");
}

void SceneSpec::Validate() const {
  std::size_t targets = 0, noises = 0;
  for (const SceneSource& s : sources) {
    if (s.role == SourceRole::kTarget) ++targets;
    if (s.role == SourceRole::kNoise) ++noises;
  }
  if (targets != 1) {
    throw ArgumentError("scene " + id + ": expected exactly one target source");
  }
  if (noises > 0 && noises < 3) {
    throw ArgumentError("scene " + id +
                        ": at least 3 directional noises when noise is enabled");
  }
  if (ref_channel >= array.num_mics()) {
    throw IndexError("scene " + id + ": reference channel out of range");
  }
  if (num_samples == 0) throw ArgumentError("scene " + id + ": zero length");
  for (std::size_t m = 0; m < array.num_mics(); ++m) {
    if (!room.StrictlyContains(placement.ToRoom(array.position(m)))) {
      throw GeometryError("scene " + id + ": microphone outside the room");
    }
  }
  for (const SceneSource& s : sources) {
    const Vec3 p = placement.ToRoom(s.location.ToCartesian());
    if (!room.StrictlyContains(p)) {
      throw GeometryError("scene " + id + ": source '" + s.name +
                          "' outside the room");
    }
  }
}

const SceneSource& SceneSpec::target() const {
  for (const SceneSource& s : sources) {
    if (s.role == SourceRole::kTarget) return s;
  }
  throw ArgumentError("scene " + id + ": no target source");
}

namespace {

double Power(const Signal& x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

void Scale(MultiSignal& x, double g) {
  for (Signal& ch : x)
    for (double& v : ch) v *= g;
}

}  // namespace

RenderedScene RenderScene(const SceneSpec& spec,
                          const std::map<std::string, Signal>& signals) {
  spec.Validate();
  const std::size_t num_mics = spec.array.num_mics();
  const std::size_t len = spec.num_samples;

  std::vector<Vec3> mics(num_mics);
  for (std::size_t m = 0; m < num_mics; ++m) {
    mics[m] = spec.placement.ToRoom(spec.array.position(m));
  }

  RenderedScene out;
  out.absorption = AbsorptionFromT60(spec.room);
  out.stems.reserve(spec.sources.size());
  for (const SceneSource& s : spec.sources) {
    auto it = signals.find(s.signal);
    if (it == signals.end()) {
      throw IoError("scene " + spec.id + ": missing signal '" + s.signal +
                    "' for source '" + s.name + "'");
    }
    Signal dry(len, 0.0);
    std::copy_n(it->second.begin(), std::min(len, it->second.size()),
                dry.begin());
    const Vec3 src = spec.placement.ToRoom(s.location.ToCartesian());
    MultiSignal image(num_mics);
    for (std::size_t m = 0; m < num_mics; ++m) {
      const auto rir = SimulateRir(spec.room, src, mics[m], spec.fs, spec.c);
      auto wet = FftConvolve(dry, rir);
      wet.resize(len);
      image[m] = std::move(wet);
    }
    out.stems.push_back(std::move(image));
  }

  const std::size_t ref = spec.ref_channel;
  double p_target = 0.0, p_interf = 0.0, p_noise = 0.0;
  std::vector<double> sum_interf(len, 0.0), sum_noise(len, 0.0);
  for (std::size_t i = 0; i < spec.sources.size(); ++i) {
    const Signal& x = out.stems[i][ref];
    switch (spec.sources[i].role) {
      case SourceRole::kTarget: p_target = Power(x); break;
      case SourceRole::kInterferer:
        for (std::size_t n = 0; n < len; ++n) sum_interf[n] += x[n];
        break;
      case SourceRole::kNoise:
        for (std::size_t n = 0; n < len; ++n) sum_noise[n] += x[n];
        break;
    }
  }
  if (!(p_target > 0.0)) {
    throw NumericalError("scene " + spec.id + ": target image is silent");
  }
  p_interf = Power(sum_interf);
  p_noise = Power(sum_noise);
  const double g_interf =
      p_interf > 0.0
          ? std::sqrt(p_target / (p_interf * std::pow(10.0, spec.sir_db / 10)))
          : 0.0;
  const double g_noise =
      p_noise > 0.0
          ? std::sqrt(p_target / (p_noise * std::pow(10.0, spec.snr_db / 10)))
          : 0.0;

  out.gains.resize(spec.sources.size(), 1.0);
  for (std::size_t i = 0; i < spec.sources.size(); ++i) {
    switch (spec.sources[i].role) {
      case SourceRole::kTarget: break;
      case SourceRole::kInterferer: out.gains[i] = g_interf; break;
      case SourceRole::kNoise: out.gains[i] = g_noise; break;
    }
    if (out.gains[i] != 1.0) Scale(out.stems[i], out.gains[i]);
  }

  out.mixture.assign(num_mics, Signal(len, 0.0));
  for (const MultiSignal& stem : out.stems) {
    for (std::size_t m = 0; m < num_mics; ++m) {
      for (std::size_t n = 0; n < len; ++n) out.mixture[m][n] += stem[m][n];
    }
  }
  return out;
}

}  // namespace bf3d
