// In-memory scenes shared by the feature, beamformer and acceptance tests.

#ifndef BF3D_TESTS_SCENE_FIXTURES_H_
#define BF3D_TESTS_SCENE_FIXTURES_H_

#include <map>
#include <string>
#include <vector>

#include "bf3d/room_sim.h"
#include "bf3d/signals.h"
#include "bf3d/spectral.h"

namespace bf3d::testing {

struct FixtureSource {
  Location3D location;
  SourceRole role;
  std::uint64_t seed;
};

// Speech sources (pink noise for kNoise roles) in a `dims` room with the
// array at its centre; t60 = 0 makes the room anechoic.
inline SceneSpec FixtureSpec(const std::vector<FixtureSource>& sources,
                             double t60 = 0.0, double sir_db = 0.0,
                             double snr_db = 10.0,
                             std::size_t num_samples = 32000,
                             Vec3 dims = Vec3(10.0, 10.0, 5.0)) {
  SceneSpec spec;
  spec.id = "fixture";
  spec.num_samples = num_samples;
  spec.room = Room(dims, t60);
  spec.placement.center = dims / 2;
  spec.sir_db = sir_db;
  spec.snr_db = snr_db;
  int k = 0;
  for (const FixtureSource& s : sources) {
    const std::string kind = s.role == SourceRole::kNoise ? "pink" : "speech";
    spec.sources.push_back(SceneSource{"src" + std::to_string(k++), "", s.role,
                                       s.location,
                                       "synth:" + kind + ":" + std::to_string(s.seed)});
  }
  return spec;
}

inline RenderedScene RenderFixture(const SceneSpec& spec) {
  std::map<std::string, Signal> signals;
  for (const SceneSource& s : spec.sources) {
    Signal x;
    SynthesizeSignalRef(s.signal, spec.num_samples, spec.fs, &x);
    signals[s.signal] = std::move(x);
  }
  return RenderScene(spec, signals);
}

}  // namespace bf3d::testing

#endif  // BF3D_TESTS_SCENE_FIXTURES_H_
