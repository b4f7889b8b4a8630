// Array-frame geometry: source locations, microphone arrays, near-field
// path lengths and candidate regions.
//
// Frame convention: the array centre is the origin, the default dual-mic
// array lies on the x-axis, azimuth is measured from +x in the horizontal
// plane and elevation from the horizontal plane. The unit direction of a
// location is (cos(el) cos(az), cos(el) sin(az), sin(el)).

#ifndef BF3D_GEOMETRY_H_
#define BF3D_GEOMETRY_H_

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace bf3d {

using Vec3 = Eigen::Vector3d;

inline constexpr double kSpeedOfSound = 343.0;
inline constexpr double kDefaultSampleRate = 16000.0;
// Half of the 11.8 cm dual-mic spacing.
inline constexpr double kDualMicHalfSpacing = 0.059;

double DegToRad(double deg);
double RadToDeg(double rad);

// Source position relative to the array centre. Immutable; azimuth is kept
// in [0, 2pi), elevation in [-pi/2, pi/2] and distance > 0.
class Location3D {
 public:
  // Throws GeometryError for distance <= 0, non-finite values or elevation
  // outside [-pi/2, pi/2]. Azimuth is wrapped.
  Location3D(double azimuth, double elevation, double distance);

  static Location3D FromDegrees(double azimuth_deg, double elevation_deg,
                                double distance);
  // Throws GeometryError for the origin. Azimuth is 0 on the vertical axis.
  static Location3D FromCartesian(const Vec3& point);

  double azimuth() const { return azimuth_; }
  double elevation() const { return elevation_; }
  double distance() const { return distance_; }

  Vec3 Direction() const;
  Vec3 ToCartesian() const { return distance_ * Direction(); }

 private:
  double azimuth_;
  double elevation_;
  double distance_;
};

struct MicPair {
  std::size_t first;
  std::size_t second;
};

// Microphone positions in metres. The constructor moves the origin to the
// mean of the positions, so every downstream distance is measured from the
// array centre.
class MicArray {
 public:
  MicArray(std::vector<Vec3> positions, std::vector<MicPair> pairs);

  // Two microphones at (+-0.059, 0, 0) m with the single pair (0, 1).
  static MicArray DefaultDualMic();

  std::size_t num_mics() const { return positions_.size(); }
  std::size_t num_pairs() const { return pairs_.size(); }
  const Vec3& position(std::size_t mic) const;
  const MicPair& pair(std::size_t index) const;
  const std::vector<Vec3>& positions() const { return positions_; }
  const std::vector<MicPair>& pairs() const { return pairs_; }

 private:
  std::vector<Vec3> positions_;
  std::vector<MicPair> pairs_;
};

// Euclidean distance from the source to one microphone. For the default
// array this equals the law-of-cosines form with cos(alpha) =
// cos(az) cos(el).
double SourceToMicDistance(const Location3D& loc, const MicArray& array,
                           std::size_t mic);

// Fractional sample delay (d_first - d_second) * fs / c of a pair.
double PureDelay(const Location3D& loc, const MicArray& array,
                 std::size_t pair_index, double fs = kDefaultSampleRate,
                 double c = kSpeedOfSound);

// Axis-aligned box around the Cartesian image of `center`.
class RegionBox {
 public:
  static constexpr std::size_t kNumVertices = 8;
  static constexpr std::size_t kNumSamplingPoints = kNumVertices + 1;

  // Throws GeometryError unless every half extent is positive and finite.
  RegionBox(Location3D center, Vec3 half_extents);

  const Location3D& center() const { return center_; }
  const Vec3& half_extents() const { return half_extents_; }
  bool Contains(const Vec3& point) const;

 private:
  Location3D center_;
  Vec3 half_extents_;
};

// The 8 corners followed by the centre. Corner i takes the negative half
// extent on axis k when bit k of i is set, so corner 0 is (+dx, +dy, +dz).
// Throws GeometryError when a corner coincides with the array centre.
std::vector<Location3D> RegionVertices(const RegionBox& box);

}  // namespace bf3d

#endif  // BF3D_GEOMETRY_H_
