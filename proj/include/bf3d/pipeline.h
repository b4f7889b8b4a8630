// Scene directories and the simulate / separate / evaluate / beampattern
// commands.
//
// Scene directory layout:
//   <dir>/scene.json          SceneSpec document plus a "render" section
//   <dir>/mixture.wav         M-channel mixture
//   <dir>/stems/<name>.wav    M-channel reverberant image of each source
//   <dir>/enhanced/<tag>.wav  separation outputs
// Feature, mask and posterior dumps sit next to the enhanced WAV as
// <tag>.<what>.f32 (little-endian float32) with a <tag>.<what>.json sidecar.

#ifndef BF3D_PIPELINE_H_
#define BF3D_PIPELINE_H_

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bf3d/beamform.h"
#include "bf3d/features.h"
#include "bf3d/metrics.h"
#include "bf3d/room_sim.h"
#include "bf3d/scene_io.h"

namespace bf3d {

// sf-center: SF at the target region centre. sf-perturbed: SF at the true
// source location. rf-region: posterior-weighted SF over the region centre
// and its eight vertices.
enum class FeatureMode { kSfCenter, kSfPerturbed, kRfRegion };
enum class PosteriorKind { kUniform, kHeuristic, kMlp };
enum class MaskSource { kOracleIrm, kFeature };
enum class BeamformerKind { kMvdr, kMcwf, kMaskOnly };

FeatureMode ParseFeatureMode(const std::string& name);
PosteriorKind ParsePosteriorKind(const std::string& name);
MaskSource ParseMaskSource(const std::string& name);
BeamformerKind ParseBeamformerKind(const std::string& name);
std::string FeatureModeName(FeatureMode mode);
std::string PosteriorKindName(PosteriorKind kind);
std::string MaskSourceName(MaskSource source);
std::string BeamformerKindName(BeamformerKind kind);

struct RunConfig {
  FeatureMode mode = FeatureMode::kSfCenter;
  PosteriorKind posterior = PosteriorKind::kHeuristic;
  double beta = 5.0;
  std::filesystem::path weights_path;  // BW3D file, required for kMlp
  MaskSource mask = MaskSource::kOracleIrm;
  BeamformerKind beamformer = BeamformerKind::kMvdr;
  MaskWeighting mask_weighting = MaskWeighting::kSquared;
  std::string tag;  // enhanced file stem; DefaultTag() when empty
  bool dump_features = false;

  // Scene-independent checks. Throws ArgumentError.
  void Validate() const;
  // Checks against a loaded scene (region availability). Throws
  // ArgumentError.
  void ValidateFor(const SceneSpec& spec) const;
  std::string DefaultTag() const;
  std::string EffectiveTag() const { return tag.empty() ? DefaultTag() : tag; }
};

// What the feature stage may know about the target. rf-region cues carry
// the region only, so the true source location is never consulted.
struct TargetCue {
  std::optional<Location3D> point;
  std::optional<RegionBox> region;
};

// Throws ArgumentError when the scene lacks what the mode needs.
TargetCue MakeTargetCue(const SceneSpec& spec, FeatureMode mode);

struct FeatureResult {
  FeatureMap feature;              // SF or RF
  std::vector<double> posterior;   // empty for point cues
};

// SF at the cue point, or RF over the cue region's sampling points.
FeatureResult TargetFeature(const Spectrogram& spec, const TargetCue& cue,
                            const MicArray& array, double c,
                            const PosteriorMode& posterior);

struct SeparationResult {
  Signal enhanced;
  FeatureResult feature;
  FeatureMap mask;
  std::optional<BeamWeights> weights;  // absent for mask-only
  std::vector<BinStatus> status;
};

// STFT -> target feature -> mask -> SCMs -> weights -> beamforming ->
// iSTFT. `stems` (SceneSpec order) are required for the oracle mask and for
// MCWF; `weights` for the MLP posterior.
SeparationResult Separate(const MultiSignal& mixture, const SceneSpec& spec,
                          const RunConfig& config,
                          const std::vector<MultiSignal>* stems,
                          const PosteriorWeights* weights = nullptr);

struct SceneData {
  std::filesystem::path dir;
  SceneSpec spec;
  MultiSignal mixture;
  std::vector<MultiSignal> stems;  // SceneSpec order
};

// Resolves every source signal (synthetic references or WAV paths relative
// to `base_dir`), truncated or zero-padded to the scene length.
std::map<std::string, Signal> ResolveSignals(const SceneSpec& spec,
                                             const std::filesystem::path& base_dir);

// Renders `spec`, scales mixture and stems jointly to a 0.9 peak and writes
// the scene directory. Returns the directory.
std::filesystem::path WriteScene(const SceneSpec& spec,
                                 const std::map<std::string, Signal>& signals,
                                 const std::filesystem::path& out_root);
// Throws IoError naming the missing file.
SceneData LoadScene(const std::filesystem::path& dir, bool load_stems = true);

// Writes float32 data and a JSON sidecar describing `shape`.
void WriteFloatDump(const std::filesystem::path& path,
                    std::span<const double> data,
                    const std::vector<std::size_t>& shape,
                    const nlohmann::json& extra = {});

std::vector<std::filesystem::path> CmdSimulate(
    const SimulationConfig& config, const std::filesystem::path& out_root,
    const std::filesystem::path& config_dir = {});
// Returns the enhanced WAV path. Outputs peaking above 0.99 are scaled down
// to that peak (the gain is recorded in <tag>.json).
std::filesystem::path CmdSeparate(const RunConfig& config,
                                  const std::filesystem::path& scene_dir);
// Conditions are enhanced tags; "mixture" scores the mixture itself.
// Writes per-scene rows to `csv_path` and means to the sibling
// <stem>_summary.csv when `csv_path` is non-empty.
MetricReport CmdEvaluate(const std::vector<std::filesystem::path>& scene_dirs,
                         const std::vector<std::string>& conditions,
                         const std::filesystem::path& csv_path);

// Default lattice: azimuth 0..180 step 5, elevation {-20, -10, 0, 10},
// distance 0.3..1.8 step 0.3, bands 500..4000 Hz.
BeampatternGrid DefaultBeampatternGrid(const StftConfig& stft = {});
// Requires mvdr or mcwf. Writes <out>.csv, <out>.f32 and <out>.f32.json
// when `out` is non-empty.
Beampattern CmdBeampattern(const RunConfig& config,
                           const std::filesystem::path& scene_dir,
                           const BeampatternGrid& grid, bool near_field,
                           const std::filesystem::path& out);

// 2 usage / argument errors, 3 I/O, 4 numerical, 1 anything else.
int ExitCodeFor(const std::exception& e);

}  // namespace bf3d

#endif  // BF3D_PIPELINE_H_
