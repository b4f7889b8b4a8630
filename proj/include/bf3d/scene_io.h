// JSON scene documents, the in-car seat layout and the scene generator.
//
// SceneSpec document (angles in degrees, lengths in metres):
//   {
//     "id": "scene_0000", "mix_condition": "S1+3",
//     "fs": 16000, "c": 343, "num_samples": 64000, "seed": 7,
//     "room": {"dims": [2.8, 1.5, 1.3], "t60": 0.2, "max_order": 20},
//     "array": {"positions": [[0.059, 0, 0], [-0.059, 0, 0]],
//               "pairs": [[0, 1]], "center": [0.3, 0.75, 1.15],
//               "yaw_deg": -90, "ref_channel": 0},
//     "target_region": {"name": "S1",
//                       "center": {"azimuth_deg": 56, "elevation_deg": -8.4,
//                                  "distance_m": 0.67},
//                       "half_extents": [0.2, 0.25, 0.1]},
//     "sir_db": 0, "snr_db": 10,
//     "sources": [{"name": "S1", "region": "S1", "role": "target",
//                  "location": {...}, "signal": "synth:speech:11"}, ...]
//   }
// "signal" is either a synthetic reference (see signals.h) or a path to a
// 16 kHz WAV file, relative to the document's directory.

#ifndef BF3D_SCENE_IO_H_
#define BF3D_SCENE_IO_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "bf3d/geometry.h"
#include "bf3d/room_sim.h"

namespace bf3d {

nlohmann::json LocationToJson(const Location3D& loc);
Location3D LocationFromJson(const nlohmann::json& j);

nlohmann::json SceneSpecToJson(const SceneSpec& spec);
// Throws ArgumentError (wrapping JSON type errors) or GeometryError.
SceneSpec SceneSpecFromJson(const nlohmann::json& j);

// Reads a JSON document from disk. Throws IoError.
nlohmann::json ReadJsonFile(const std::filesystem::path& path);
void WriteJsonFile(const std::filesystem::path& path, const nlohmann::json& j);

// Seat layout of the default cabin in array-frame coordinates: the array
// sits at the front centre with +x toward the driver side and +y pointing
// back into the cabin. S1/S3 (driver, behind driver) centres are 56 and 72
// degrees in azimuth; S2/S4 mirror them. Heads sit 0.1 m below the array.
std::map<std::string, RegionBox> DefaultSeatRegions(
    const Vec3& half_extents = Vec3(0.2, 0.25, 0.1));

// Default cabin placement: array centre at (0.3, 0.75, 1.15) m in a
// 2.8 x 1.5 x 1.3 m room, yawed -90 degrees so the mic axis spans the width.
ArrayPlacement DefaultCabinPlacement();

// "S1+2+3" -> {"S1", "S2", "S3"}. The first region is the target. Throws
// ArgumentError for malformed conditions.
std::vector<std::string> ParseMixCondition(const std::string& condition);

struct SimulationConfig {
  double fs = kDefaultSampleRate;
  double c = kSpeedOfSound;
  double duration_s = 4.0;
  std::size_t num_scenes = 1;
  std::uint64_t seed = 1;

  Vec3 room_dims = Vec3(2.8, 1.5, 1.3);
  double t60_min = 0.05;
  double t60_max = 0.3;
  int max_order = kDefaultMaxOrder;

  MicArray array = MicArray::DefaultDualMic();
  ArrayPlacement placement = DefaultCabinPlacement();
  std::size_t ref_channel = 0;
  std::map<std::string, RegionBox> regions = DefaultSeatRegions();

  // Cycled over scenes.
  std::vector<std::string> mix_conditions = {"S1+3"};
  double sir_min_db = -6.0, sir_max_db = 6.0;
  double snr_min_db = -5.0, snr_max_db = 20.0;
  std::size_t num_noises = 3;  // 0 disables noise
  // Place speakers uniformly inside their region boxes rather than at the
  // centres.
  bool perturb = true;
  // Optional per-region speech WAV paths (absolute, or relative to the
  // config file). Missing regions use synthetic speech.
  std::map<std::string, std::string> speech;
};

// Keys mirror SimulationConfig field names; every key is optional.
SimulationConfig SimulationConfigFromJson(const nlohmann::json& j);

// Named presets: "s1", "s1+2", "s1+3", "s1+4", "s1+2+3", "s1+2+4",
// "s1+3+4" and "mixed" (all seven conditions cycled). Throws ArgumentError.
SimulationConfig PresetConfig(const std::string& name);

// Deterministic: scene i draws from a generator seeded by (seed, i) only.
std::vector<SceneSpec> GenerateScenes(const SimulationConfig& config);

}  // namespace bf3d

#endif  // BF3D_SCENE_IO_H_
