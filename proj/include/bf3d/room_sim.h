// Shoebox image-source room simulation and multi-source scene rendering.

#ifndef BF3D_ROOM_SIM_H_
#define BF3D_ROOM_SIM_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bf3d/geometry.h"
#include "bf3d/types.h"

namespace bf3d {

inline constexpr int kDefaultMaxOrder = 20;
// Images weaker than this fraction of the direct path are skipped.
inline constexpr double kImageAmplitudeCutoff = 1e-4;
inline constexpr int kSincTaps = 81;

class Room {
 public:
  // Throws ArgumentError unless dims > 0, 0 <= t60 <= 1 and max_order >= 0.
  Room(Vec3 dims, double t60, int max_order = kDefaultMaxOrder);

  const Vec3& dims() const { return dims_; }
  double t60() const { return t60_; }
  int max_order() const { return max_order_; }
  double Volume() const;
  double SurfaceArea() const;
  bool StrictlyContains(const Vec3& point) const;

 private:
  Vec3 dims_;
  double t60_;
  int max_order_;
};

// Sabine inversion a = 0.161 V / (S t60), clamped to (0, 1] with a warning.
// t60 = 0 is the anechoic convention and returns 1.
double AbsorptionFromT60(const Room& room);

// Impulse response from `source` to `mic` (room coordinates, metres). Each
// image contributes sqrt(1 - a)^order / (4 pi r) through an 81-tap
// Hann-windowed sinc centred at r fs / c. Throws GeometryError for
// positions outside the room or coincident source and mic.
std::vector<double> SimulateRir(const Room& room, const Vec3& source,
                                const Vec3& mic, double fs = kDefaultSampleRate,
                                double c = kSpeedOfSound);

// Maps array-frame coordinates into the room: rotate by `yaw` about +z,
// then translate to `center`.
struct ArrayPlacement {
  Vec3 center = Vec3::Zero();
  double yaw = 0.0;  // radians

  Vec3 ToRoom(const Vec3& array_frame) const;
  Vec3 ToArray(const Vec3& room) const;
};

enum class SourceRole { kTarget, kInterferer, kNoise };

std::string SourceRoleName(SourceRole role);
// Throws ArgumentError for unknown names.
SourceRole ParseSourceRole(const std::string& name);

struct SceneSource {
  std::string name;
  std::string region;  // seat region id, empty for noise sources
  SourceRole role;
  Location3D location;  // array frame
  std::string signal;   // key into the signal map
};

struct SceneSpec {
  std::string id = "scene";
  std::string mix_condition;  // e.g. "S1+3"
  double fs = kDefaultSampleRate;
  double c = kSpeedOfSound;
  std::size_t num_samples = 64000;
  Room room{Vec3(2.8, 1.5, 1.3), 0.0};
  MicArray array = MicArray::DefaultDualMic();
  ArrayPlacement placement;
  std::size_t ref_channel = 0;
  std::vector<SceneSource> sources;
  std::optional<RegionBox> target_region;
  std::string target_region_name;
  double sir_db = 0.0;
  double snr_db = 10.0;
  std::uint64_t seed = 0;

  // Exactly one target; three or more noises whenever any noise is present;
  // every source and microphone strictly inside the room. Throws
  // ArgumentError or GeometryError.
  void Validate() const;
  const SceneSource& target() const;
};

struct RenderedScene {
  MultiSignal mixture;
  // Reverberant, gain-scaled image of each source, in SceneSpec order.
  std::vector<MultiSignal> stems;
  std::vector<double> gains;
  double absorption = 1.0;
};

// Convolves every source with its per-microphone RIRs, scales interferers
// jointly to sir_db and noises jointly to snr_db relative to the target at
// the reference channel, and sums the stems in source order. Throws
// IoError for a missing signal and NumericalError for a silent target.
RenderedScene RenderScene(const SceneSpec& spec,
                          const std::map<std::string, Signal>& signals);

}  // namespace bf3d

#endif  // BF3D_ROOM_SIM_H_
