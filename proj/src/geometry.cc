#include "bf3d/geometry.h"

#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include "bf3d/error.h"

namespace bf3d {

double DegToRad(double deg) { return deg * std::numbers::pi / 180.0; }
double RadToDeg(double rad) { return rad * 180.0 / std::numbers::pi; }

Location3D::Location3D(double azimuth, double elevation, double distance) {
  if (!std::isfinite(azimuth) || !std::isfinite(elevation) ||
      !std::isfinite(distance)) {
    throw GeometryError("Location3D: non-finite coordinate");
  }
  if (distance <= 0.0) {
    std::ostringstream os;
    os << "Location3D: distance must be > 0, got " << distance;
    throw GeometryError(os.str());
  }
  constexpr double kHalfPi = std::numbers::pi / 2;
  if (elevation < -kHalfPi || elevation > kHalfPi) {
    std::ostringstream os;
    os << "Location3D: elevation " << elevation << " outside [-pi/2, pi/2]";
    throw GeometryError(os.str());
  }
  constexpr double kTwoPi = 2 * std::numbers::pi;
  double az = std::fmod(azimuth, kTwoPi);
  if (az < 0.0) az += kTwoPi;
  if (az >= kTwoPi) az = 0.0;
  azimuth_ = az;
  elevation_ = elevation;
  distance_ = distance;
}

Location3D Location3D::FromDegrees(double azimuth_deg, double elevation_deg,
                                   double distance) {
  return Location3D(DegToRad(azimuth_deg), DegToRad(elevation_deg), distance);
}

Location3D Location3D::FromCartesian(const Vec3& point) {
  const double d = point.norm();
  if (!(d > 0.0)) throw GeometryError("Location3D: point at the array centre");
  const double horizontal = std::hypot(point.x(), point.y());
  const double azimuth =
      horizontal > 0.0 ? std::atan2(point.y(), point.x()) : 0.0;
  const double elevation = std::atan2(point.z(), horizontal);
  return Location3D(azimuth, elevation, d);
}

Vec3 Location3D::Direction() const {
  const double ce = std::cos(elevation_);
  return {ce * std::cos(azimuth_), ce * std::sin(azimuth_),
          std::sin(elevation_)};
}

MicArray::MicArray(std::vector<Vec3> positions, std::vector<MicPair> pairs)
    : positions_(std::move(positions)), pairs_(std::move(pairs)) {
  if (positions_.size() < 2) {
    throw ArgumentError("MicArray: need at least two microphones");
  }
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    if (!positions_[i].allFinite()) {
      throw ArgumentError("MicArray: non-finite microphone position");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (positions_[i] == positions_[j]) {
        throw ArgumentError("MicArray: duplicate microphone positions");
      }
    }
  }
  for (const MicPair& p : pairs_) {
    if (p.first >= positions_.size() || p.second >= positions_.size()) {
      throw IndexError("MicArray: pair references a missing microphone");
    }
    if (p.first == p.second) {
      throw ArgumentError("MicArray: pair uses the same microphone twice");
    }
  }
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : positions_) mean += p;
  mean /= static_cast<double>(positions_.size());
  for (Vec3& p : positions_) p -= mean;
}

MicArray MicArray::DefaultDualMic() {
  return MicArray({Vec3(kDualMicHalfSpacing, 0, 0),
                   Vec3(-kDualMicHalfSpacing, 0, 0)},
                  {MicPair{0, 1}});
}

const Vec3& MicArray::position(std::size_t mic) const {
  if (mic >= positions_.size()) {
    std::ostringstream os;
    os << "MicArray: microphone index " << mic << " out of range ("
       << positions_.size() << " mics)";
    throw IndexError(os.str());
  }
  return positions_[mic];
}

const MicPair& MicArray::pair(std::size_t index) const {
  if (index >= pairs_.size()) {
    std::ostringstream os;
    os << "MicArray: pair index " << index << " out of range ("
       << pairs_.size() << " pairs)";
    throw IndexError(os.str());
  }
  return pairs_[index];
}

double SourceToMicDistance(const Location3D& loc, const MicArray& array,
                           std::size_t mic) {
  return (loc.ToCartesian() - array.position(mic)).norm();
}

double PureDelay(const Location3D& loc, const MicArray& array,
                 std::size_t pair_index, double fs, double c) {
  if (!(fs > 0.0) || !(c > 0.0)) {
    throw ArgumentError("PureDelay: fs and c must be positive");
  }
  const MicPair& p = array.pair(pair_index);
  const Vec3 source = loc.ToCartesian();
  const double d1 = (source - array.position(p.first)).norm();
  const double d2 = (source - array.position(p.second)).norm();
  return (d1 - d2) * fs / c;
}

RegionBox::RegionBox(Location3D center, Vec3 half_extents)
    : center_(center), half_extents_(half_extents) {
  if (!half_extents_.allFinite() || !(half_extents_.array() > 0.0).all()) {
    throw GeometryError("RegionBox: half extents must be positive");
  }
}

bool RegionBox::Contains(const Vec3& point) const {
  const Vec3 offset = point - center_.ToCartesian();
  return (offset.array().abs() <= half_extents_.array() + 1e-12).all();
}

std::vector<Location3D> RegionVertices(const RegionBox& box) {
  const Vec3 c = box.center().ToCartesian();
  const Vec3& h = box.half_extents();
  std::vector<Location3D> out;
  out.reserve(RegionBox::kNumSamplingPoints);
  for (unsigned code = 0; code < RegionBox::kNumVertices; ++code) {
    Vec3 corner = c;
    for (int axis = 0; axis < 3; ++axis) {
      corner[axis] += (code >> axis & 1u) ? -h[axis] : h[axis];
    }
    if (!(corner.norm() > 1e-9)) {
      throw GeometryError("RegionBox: corner coincides with the array centre");
    }
    out.push_back(Location3D::FromCartesian(corner));
  }
  out.push_back(box.center());
  return out;
}

}  // namespace bf3d
