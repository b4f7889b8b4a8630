#include <cmath>
#include <random>

#include <doctest.h>

#include "bf3d/error.h"
#include "bf3d/geometry.h"

using namespace bf3d;

namespace {
const MicArray kDual = MicArray::DefaultDualMic();
}

TEST_CASE("location normalises azimuth and validates fields") {
  const Location3D loc(-M_PI / 2, 0.1, 2.0);
  CHECK(loc.azimuth() == doctest::Approx(3 * M_PI / 2).epsilon(1e-15));
  CHECK(Location3D(2 * M_PI, 0.0, 1.0).azimuth() == 0.0);
  CHECK_THROWS_AS(Location3D(0.0, 0.0, 0.0), GeometryError);
  CHECK_THROWS_AS(Location3D(0.0, 0.0, -1.0), GeometryError);
  CHECK_THROWS_AS(Location3D(0.0, 2.0, 1.0), GeometryError);
  CHECK_THROWS_AS(Location3D(NAN, 0.0, 1.0), GeometryError);
}

TEST_CASE("cartesian round trip") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> az(0, 2 * M_PI), el(-1.5, 1.5), d(0.3, 5);
  for (int i = 0; i < 1000; ++i) {
    const Location3D a(az(rng), el(rng), d(rng));
    const Location3D b = Location3D::FromCartesian(a.ToCartesian());
    double daz = std::abs(a.azimuth() - b.azimuth());
    daz = std::min(daz, 2 * M_PI - daz);
    CHECK(daz < 1e-9);
    CHECK(std::abs(a.elevation() - b.elevation()) < 1e-9);
    CHECK(std::abs(a.distance() - b.distance()) < 1e-9);
  }
}

TEST_CASE("mic array recentres and validates") {
  const MicArray a({Vec3(1, 0, 0), Vec3(3, 0, 0)}, {{0, 1}});
  CHECK(a.position(0).x() == -1.0);
  CHECK(a.position(1).x() == 1.0);
  CHECK_THROWS_AS(MicArray({Vec3(0, 0, 0)}, {}), ArgumentError);
  CHECK_THROWS_AS(MicArray({Vec3(0, 0, 0), Vec3(0, 0, 0)}, {{0, 1}}), ArgumentError);
  CHECK_THROWS_AS(MicArray({Vec3(0, 0, 0), Vec3(1, 0, 0)}, {{0, 2}}), IndexError);
  CHECK_THROWS_AS(MicArray({Vec3(0, 0, 0), Vec3(1, 0, 0)}, {{1, 1}}), ArgumentError);
  CHECK(kDual.num_mics() == 2);
  CHECK(kDual.position(0).x() == doctest::Approx(0.059));
  CHECK(kDual.position(1).x() == doctest::Approx(-0.059));
}

TEST_CASE("source to mic distance") {
  CHECK(SourceToMicDistance(Location3D(0, 0, 1.0), kDual, 0) ==
        doctest::Approx(0.941).epsilon(1e-12));
  const double broadside = std::sqrt(1 + 0.059 * 0.059);
  CHECK(SourceToMicDistance(Location3D(M_PI / 2, 0, 1.0), kDual, 0) ==
        doctest::Approx(broadside).epsilon(1e-12));
  CHECK(SourceToMicDistance(Location3D(M_PI / 2, 0, 1.0), kDual, 1) ==
        doctest::Approx(broadside).epsilon(1e-12));
  CHECK(broadside == doctest::Approx(1.001738988).epsilon(1e-9));
  // oracles/derive_expected.py
  CHECK(SourceToMicDistance(Location3D::FromDegrees(60, 0, 1.0), kDual, 0) ==
        doctest::Approx(0.971844123).epsilon(1e-9));
  CHECK_THROWS_AS(SourceToMicDistance(Location3D(0, 0, 1), kDual, 2), IndexError);
}

TEST_CASE("law of cosines form holds for the default array") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> az(0, 2 * M_PI), el(-1.5, 1.5), d(0.3, 5);
  for (int i = 0; i < 200; ++i) {
    const Location3D loc(az(rng), el(rng), d(rng));
    const double cos_alpha = std::cos(loc.azimuth()) * std::cos(loc.elevation());
    const double r = loc.distance(), h = 0.059;
    const double expected = std::sqrt(h * h + r * r - 2 * h * r * cos_alpha);
    CHECK(SourceToMicDistance(loc, kDual, 0) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("pure delay examples") {
  CHECK(PureDelay(Location3D(0, 0, 1.0), kDual, 0) ==
        doctest::Approx((0.941 - 1.059) * 16000 / 343).epsilon(1e-12));
  CHECK(PureDelay(Location3D(0, 0, 1.0), kDual, 0) ==
        doctest::Approx(-5.504373178).epsilon(1e-9));
  CHECK(std::abs(PureDelay(Location3D(M_PI / 2, 0, 1.0), kDual, 0)) < 1e-12);
  CHECK(std::abs(PureDelay(Location3D(M_PI / 2, 0, 3.7), kDual, 0)) < 1e-12);
  CHECK(PureDelay(Location3D::FromDegrees(60, 0, 1.0), kDual, 0) ==
        doctest::Approx(-2.748597864).epsilon(1e-9));
  CHECK_THROWS_AS(PureDelay(Location3D(0, 0, 1), kDual, 1), IndexError);
  CHECK_THROWS_AS(PureDelay(Location3D(0, 0, 1), kDual, 0, 0.0), ArgumentError);
}

TEST_CASE("pure delay is antisymmetric under pair reversal") {
  const MicArray fwd({Vec3(0.059, 0, 0), Vec3(-0.059, 0, 0)}, {{0, 1}});
  const MicArray rev({Vec3(0.059, 0, 0), Vec3(-0.059, 0, 0)}, {{1, 0}});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> az(0, 2 * M_PI), el(-1.5, 1.5), d(0.3, 5);
  for (int i = 0; i < 200; ++i) {
    const Location3D loc(az(rng), el(rng), d(rng));
    CHECK(PureDelay(loc, fwd, 0) == -PureDelay(loc, rev, 0));
  }
}

TEST_CASE("pure delay far-field limit") {
  const double endfire = -0.118 * 16000 / 343;
  CHECK(std::abs(PureDelay(Location3D(0, 0, 1000.0), kDual, 0) - endfire) < 1e-3);
  CHECK(endfire == doctest::Approx(-5.5044).epsilon(1e-4));
  const Location3D oblique(0.7, 0.3, 1000.0);
  const double projected =
      -2 * 0.059 * std::cos(0.7) * std::cos(0.3) * 16000 / 343;
  CHECK(std::abs(PureDelay(oblique, kDual, 0) - projected) < 1e-3);
}

TEST_CASE("pure delay is continuous") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> az(0, 2 * M_PI), el(-1.5, 1.5), d(0.3, 5);
  for (int i = 0; i < 200; ++i) {
    const double a = az(rng), e = el(rng), r = d(rng);
    const double base = PureDelay(Location3D(a, e, r), kDual, 0);
    CHECK(std::abs(PureDelay(Location3D(a + 1e-6, e, r), kDual, 0) - base) < 1e-3);
    CHECK(std::abs(PureDelay(Location3D(a, e + 1e-6, r), kDual, 0) - base) < 1e-3);
    CHECK(std::abs(PureDelay(Location3D(a, e, r + 1e-6), kDual, 0) - base) < 1e-3);
  }
}

TEST_CASE("region box validation and vertices") {
  const Location3D center = Location3D::FromCartesian(Vec3(1, 0, 0));
  CHECK_THROWS_AS(RegionBox(center, Vec3(0, 0.1, 0.1)), GeometryError);
  CHECK_THROWS_AS(RegionBox(center, Vec3(0.1, -0.1, 0.1)), GeometryError);
  const RegionBox box(center, Vec3(0.1, 0.1, 0.1));
  const auto verts = RegionVertices(box);
  REQUIRE(verts.size() == RegionBox::kNumSamplingPoints);
  CHECK(RegionBox::kNumVertices == 8);
  CHECK(verts.back().distance() == doctest::Approx(1.0));
  CHECK(verts.back().azimuth() == center.azimuth());
  // Corner 0 takes +extent on every axis: (1.1, 0.1, 0.1).
  CHECK(verts[0].distance() == doctest::Approx(1.109053651).epsilon(1e-9));
  const Vec3 c0 = verts[0].ToCartesian();
  CHECK(c0.x() == doctest::Approx(1.1));
  CHECK(c0.y() == doctest::Approx(0.1));
  CHECK(c0.z() == doctest::Approx(0.1));
  const Vec3 c7 = verts[7].ToCartesian();
  CHECK(c7.x() == doctest::Approx(0.9));
  CHECK(c7.y() == doctest::Approx(-0.1));
  CHECK(c7.z() == doctest::Approx(-0.1));
  for (const Location3D& v : verts) CHECK(box.Contains(v.ToCartesian()));
}

TEST_CASE("region box containing the array centre is rejected at a corner") {
  const Location3D center = Location3D::FromCartesian(Vec3(0.1, 0.1, 0.1));
  CHECK_THROWS_AS(RegionVertices(RegionBox(center, Vec3(0.1, 0.1, 0.1))),
                  GeometryError);
}
