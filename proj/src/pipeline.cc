#include "bf3d/pipeline.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bf3d/error.h"
#include "bf3d/log.h"
#include "bf3d/signals.h"
#include "bf3d/wav.h"

namespace bf3d {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Enhanced outputs louder than this are scaled down rather than clipped.
constexpr double kOutputPeak = 0.99;

template <typename E>
struct NamedValue {
  const char* name;
  E value;
};

constexpr NamedValue<FeatureMode> kFeatureModes[] = {
    {"sf-center", FeatureMode::kSfCenter},
    {"sf-perturbed", FeatureMode::kSfPerturbed},
    {"rf-region", FeatureMode::kRfRegion}};
constexpr NamedValue<PosteriorKind> kPosteriorKinds[] = {
    {"uniform", PosteriorKind::kUniform},
    {"heuristic", PosteriorKind::kHeuristic},
    {"mlp", PosteriorKind::kMlp}};
constexpr NamedValue<MaskSource> kMaskSources[] = {
    {"oracle-irm", MaskSource::kOracleIrm}, {"feature", MaskSource::kFeature}};
constexpr NamedValue<BeamformerKind> kBeamformers[] = {
    {"mvdr", BeamformerKind::kMvdr},
    {"mcwf", BeamformerKind::kMcwf},
    {"mask-only", BeamformerKind::kMaskOnly}};

template <typename E, std::size_t N>
E ParseNamed(const NamedValue<E> (&table)[N], const std::string& name,
             const char* what) {
  for (const auto& entry : table)
    if (name == entry.name) return entry.value;
  std::string options;
  for (const auto& entry : table) {
    if (!options.empty()) options += ", ";
    options += entry.name;
  }
  throw ArgumentError(std::string("unknown ") + what + " '" + name +
                      "' (expected " + options + ")");
}

template <typename E, std::size_t N>
std::string NameOf(const NamedValue<E> (&table)[N], E value) {
  for (const auto& entry : table)
    if (entry.value == value) return entry.name;
  return "?";
}

std::size_t TargetIndex(const SceneSpec& spec) {
  for (std::size_t i = 0; i < spec.sources.size(); ++i)
    if (spec.sources[i].role == SourceRole::kTarget) return i;
  throw ArgumentError("scene " + spec.id + ": no target source");
}

bool SafeName(const std::string& name) {
  if (name.empty() || name == "." || name == "..") return false;
  return std::all_of(name.begin(), name.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' ||
           ch == '-' || ch == '.' || ch == '+';
  });
}

void RequireSafeName(const std::string& name, const char* what) {
  if (!SafeName(name)) {
    throw ArgumentError(std::string(what) + " name '" + name +
                        "' is not a plain file name");
  }
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void CreateDirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

FeatureMode ParseFeatureMode(const std::string& name) {
  return ParseNamed(kFeatureModes, name, "mode");
}
PosteriorKind ParsePosteriorKind(const std::string& name) {
  return ParseNamed(kPosteriorKinds, name, "posterior");
}
MaskSource ParseMaskSource(const std::string& name) {
  return ParseNamed(kMaskSources, name, "mask source");
}
BeamformerKind ParseBeamformerKind(const std::string& name) {
  return ParseNamed(kBeamformers, name, "beamformer");
}
std::string FeatureModeName(FeatureMode mode) { return NameOf(kFeatureModes, mode); }
std::string PosteriorKindName(PosteriorKind kind) {
  return NameOf(kPosteriorKinds, kind);
}
std::string MaskSourceName(MaskSource source) { return NameOf(kMaskSources, source); }
std::string BeamformerKindName(BeamformerKind kind) {
  return NameOf(kBeamformers, kind);
}

void RunConfig::Validate() const {
  if (beamformer == BeamformerKind::kMcwf && mask != MaskSource::kOracleIrm) {
    throw ArgumentError("mcwf needs the oracle target reference (--mask oracle-irm)");
  }
  if (posterior == PosteriorKind::kMlp && weights_path.empty()) {
    throw ArgumentError("posterior mlp requires --weights");
  }
  if (posterior == PosteriorKind::kHeuristic && !std::isfinite(beta)) {
    throw ArgumentError("beta must be finite");
  }
  if (!tag.empty()) RequireSafeName(tag, "tag");
}

void RunConfig::ValidateFor(const SceneSpec& spec) const {
  if ((mode == FeatureMode::kRfRegion || mode == FeatureMode::kSfCenter) &&
      !spec.target_region) {
    throw ArgumentError("scene " + spec.id + ": mode " + FeatureModeName(mode) +
                        " requires a target region box");
  }
  if (posterior == PosteriorKind::kMlp && mode != FeatureMode::kRfRegion) {
    LogWarning("posterior mlp has no effect outside rf-region mode");
  }
}

std::string RunConfig::DefaultTag() const {
  std::string t = BeamformerKindName(beamformer) + "_" + MaskSourceName(mask);
  if (mask == MaskSource::kFeature || dump_features) {
    t += "_" + FeatureModeName(mode);
    if (mode == FeatureMode::kRfRegion) t += "_" + PosteriorKindName(posterior);
  }
  return t;
}

TargetCue MakeTargetCue(const SceneSpec& spec, FeatureMode mode) {
  TargetCue cue;
  switch (mode) {
    case FeatureMode::kSfCenter:
      if (!spec.target_region) {
        throw ArgumentError("scene " + spec.id + ": sf-center needs a target region");
      }
      cue.point = spec.target_region->center();
      break;
    case FeatureMode::kSfPerturbed:
      cue.point = spec.target().location;
      break;
    case FeatureMode::kRfRegion:
      if (!spec.target_region) {
        throw ArgumentError("scene " + spec.id + ": rf-region needs a target region");
      }
      cue.region = *spec.target_region;
      break;
  }
  return cue;
}

FeatureResult TargetFeature(const Spectrogram& spec, const TargetCue& cue,
                            const MicArray& array, double c,
                            const PosteriorMode& posterior) {
  FeatureResult out;
  if (cue.point) {
    out.feature = SpatialFeature(spec, *cue.point, array, c);
    return out;
  }
  if (!cue.region) throw ArgumentError("empty target cue");
  std::vector<FeatureMap> stack;
  for (const Location3D& loc : RegionVertices(*cue.region)) {
    stack.push_back(SpatialFeature(spec, loc, array, c));
  }
  out.posterior = AttentionPosterior(stack, posterior);
  out.feature = RegionFeature(stack, out.posterior);
  return out;
}

SeparationResult Separate(const MultiSignal& mixture, const SceneSpec& spec,
                          const RunConfig& config,
                          const std::vector<MultiSignal>* stems,
                          const PosteriorWeights* weights) {
  config.Validate();
  config.ValidateFor(spec);
  const bool needs_stems = config.mask == MaskSource::kOracleIrm ||
                           config.beamformer == BeamformerKind::kMcwf;
  if (needs_stems && (!stems || stems->size() != spec.sources.size())) {
    throw ArgumentError("scene " + spec.id + ": oracle processing needs every stem");
  }
  if (config.posterior == PosteriorKind::kMlp && !weights) {
    throw ArgumentError("posterior mlp requires loaded weights");
  }
  if (mixture.size() != spec.array.num_mics()) {
    throw ShapeError("scene " + spec.id + ": mixture has " +
                     std::to_string(mixture.size()) + " channels, array has " +
                     std::to_string(spec.array.num_mics()));
  }

  StftConfig stft;
  stft.fs = spec.fs;
  const Spectrogram y = Stft(mixture, stft);
  const std::size_t ref = spec.ref_channel;

  PosteriorMode posterior;
  switch (config.posterior) {
    case PosteriorKind::kUniform: posterior = UniformPosterior{}; break;
    case PosteriorKind::kHeuristic: posterior = HeuristicPosterior{config.beta}; break;
    case PosteriorKind::kMlp: posterior = MlpPosterior{weights}; break;
  }

  SeparationResult out;
  out.feature = TargetFeature(y, MakeTargetCue(spec, config.mode), spec.array,
                              spec.c, posterior);

  std::optional<Spectrogram> target_spec;
  if (needs_stems) {
    const std::size_t ti = TargetIndex(spec);
    target_spec = Stft((*stems)[ti], stft);
    if (config.mask == MaskSource::kOracleIrm) {
      std::vector<Spectrogram> others;
      for (std::size_t i = 0; i < stems->size(); ++i) {
        if (i != ti) others.push_back(Stft((*stems)[i], stft));
      }
      out.mask = OracleIrm(*target_spec, others, ref);
    }
  }
  if (config.mask == MaskSource::kFeature) out.mask = FeatureMask(out.feature.feature);

  Spectrogram enhanced;
  switch (config.beamformer) {
    case BeamformerKind::kMaskOnly: {
      enhanced = y.Channel(ref);
      for (std::size_t t = 0; t < enhanced.num_frames(); ++t)
        for (std::size_t f = 0; f < enhanced.num_bins(); ++f)
          enhanced.at(t, f, 0) *= out.mask.at(t, f);
      break;
    }
    case BeamformerKind::kMvdr: {
      const Scm phi_s = MaskedScmUtterance(y, out.mask, config.mask_weighting);
      const Scm phi_n =
          MaskedScmUtterance(y, ComplementMask(out.mask), config.mask_weighting);
      out.weights = MvdrWeights(phi_s, phi_n, ref, &out.status);
      enhanced = ApplyBeamformer(*out.weights, y);
      break;
    }
    case BeamformerKind::kMcwf: {
      out.weights = McwfWeights(y, target_spec->Channel(ref), ref, &out.status);
      enhanced = ApplyBeamformer(*out.weights, y);
      break;
    }
  }
  out.enhanced = std::move(Istft(enhanced)[0]);
  return out;
}

std::map<std::string, Signal> ResolveSignals(const SceneSpec& spec,
                                             const fs::path& base_dir) {
  std::map<std::string, Signal> signals;
  for (const SceneSource& s : spec.sources) {
    if (signals.contains(s.signal)) continue;
    Signal x;
    if (!SynthesizeSignalRef(s.signal, spec.num_samples, spec.fs, &x)) {
      fs::path path(s.signal);
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      MultiSignal wav = ReadWav(path);
      if (wav.size() > 1) {
        LogWarning(path.string() + ": using the first of " +
                   std::to_string(wav.size()) + " channels");
      }
      x = std::move(wav[0]);
    }
    x.resize(spec.num_samples, 0.0);
    signals.emplace(s.signal, std::move(x));
  }
  return signals;
}

fs::path WriteScene(const SceneSpec& spec,
                    const std::map<std::string, Signal>& signals,
                    const fs::path& out_root) {
  RequireSafeName(spec.id, "scene");
  for (const SceneSource& s : spec.sources) RequireSafeName(s.name, "source");
  RenderedScene rendered = RenderScene(spec, signals);

  double peak = 0.0;
  for (const Signal& ch : rendered.mixture)
    for (double v : ch) peak = std::max(peak, std::abs(v));
  const double scale = peak > 0.0 ? 0.9 / peak : 1.0;
  MultiSignal mixture(spec.array.num_mics(), Signal(spec.num_samples, 0.0));
  for (MultiSignal& stem : rendered.stems) {
    for (std::size_t m = 0; m < stem.size(); ++m) {
      for (std::size_t n = 0; n < stem[m].size(); ++n) {
        stem[m][n] *= scale;
        mixture[m][n] += stem[m][n];
      }
    }
  }

  const fs::path dir = out_root / spec.id;
  CreateDirs(dir / "stems");
  WriteWav(dir / "mixture.wav", mixture, static_cast<int>(spec.fs));
  json stem_files = json::object();
  for (std::size_t i = 0; i < spec.sources.size(); ++i) {
    const std::string rel = "stems/" + spec.sources[i].name + ".wav";
    WriteWav(dir / rel, rendered.stems[i], static_cast<int>(spec.fs));
    stem_files[spec.sources[i].name] = rel;
  }
  json doc = SceneSpecToJson(spec);
  doc["render"] = {{"gains", rendered.gains},
                   {"absorption", rendered.absorption},
                   {"output_scale", scale},
                   {"files", {{"mixture", "mixture.wav"}, {"stems", stem_files}}}};
  WriteJsonFile(dir / "scene.json", doc);
  return dir;
}

SceneData LoadScene(const fs::path& dir, bool load_stems) {
  const fs::path manifest = dir / "scene.json";
  if (!fs::exists(manifest)) throw IoError("missing " + manifest.string());
  const json doc = ReadJsonFile(manifest);
  SceneData scene;
  scene.dir = dir;
  try {
    scene.spec = SceneSpecFromJson(doc);
  } catch (const Error& e) {
    throw ArgumentError(manifest.string() + ": " + e.what());
  }
  const auto check = [&](const MultiSignal& x, const fs::path& path) {
    if (x.size() != scene.spec.array.num_mics() ||
        x[0].size() != scene.spec.num_samples) {
      throw IoError(path.string() + ": expected " +
                    std::to_string(scene.spec.array.num_mics()) + " channels of " +
                    std::to_string(scene.spec.num_samples) + " samples");
    }
  };
  const fs::path mix_path = dir / "mixture.wav";
  scene.mixture = ReadWav(mix_path);
  check(scene.mixture, mix_path);
  if (load_stems) {
    json files;
    if (doc.contains("render")) files = doc["render"].value("files", json::object());
    for (const SceneSource& s : scene.spec.sources) {
      std::string rel = "stems/" + s.name + ".wav";
      if (files.contains("stems") && files["stems"].contains(s.name)) {
        rel = files["stems"][s.name].get<std::string>();
      }
      const fs::path path = dir / rel;
      scene.stems.push_back(ReadWav(path));
      check(scene.stems.back(), path);
    }
  }
  return scene;
}

void WriteFloatDump(const fs::path& path, std::span<const double> data,
                    const std::vector<std::size_t>& shape, const json& extra) {
  std::size_t count = 1;
  for (std::size_t s : shape) count *= s;
  if (count != data.size()) throw ShapeError("dump shape does not match data");
  std::string bytes(data.size() * 4, '\0');
  for (std::size_t i = 0; i < data.size(); ++i) {
    const float v = static_cast<float>(data[i]);
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<char>((u >> (8 * b)) & 0xff);
  }
  WriteText(path, bytes);
  json side = extra.is_object() ? extra : json::object();
  side["dtype"] = "float32";
  side["endianness"] = "little";
  side["shape"] = shape;
  side["layout"] = "row-major";
  WriteJsonFile(fs::path(path.string() + ".json"), side);
}

std::vector<fs::path> CmdSimulate(const SimulationConfig& config,
                                  const fs::path& out_root,
                                  const fs::path& config_dir) {
  const std::vector<SceneSpec> scenes = GenerateScenes(config);
  CreateDirs(out_root);
  std::vector<fs::path> dirs;
  json index = json::array();
  for (const SceneSpec& spec : scenes) {
    try {
      dirs.push_back(WriteScene(spec, ResolveSignals(spec, config_dir), out_root));
    } catch (const IoError& e) {
      throw IoError("scene " + spec.id + ": " + e.what());
    }
    index.push_back(spec.id);
  }
  WriteJsonFile(out_root / "scenes.json", {{"scenes", index}});
  return dirs;
}

fs::path CmdSeparate(const RunConfig& config, const fs::path& scene_dir) {
  config.Validate();
  const fs::path manifest = scene_dir / "scene.json";
  if (!fs::exists(manifest)) throw IoError("missing " + manifest.string());
  config.ValidateFor(SceneSpecFromJson(ReadJsonFile(manifest)));

  std::optional<PosteriorWeights> weights;
  if (config.posterior == PosteriorKind::kMlp) {
    weights = PosteriorWeights::Load(config.weights_path);
  }
  const bool needs_stems = config.mask == MaskSource::kOracleIrm ||
                           config.beamformer == BeamformerKind::kMcwf;
  const SceneData scene = LoadScene(scene_dir, needs_stems);
  const SeparationResult result =
      Separate(scene.mixture, scene.spec, config,
               needs_stems ? &scene.stems : nullptr, weights ? &*weights : nullptr);

  const std::string tag = config.EffectiveTag();
  const fs::path out_dir = scene_dir / "enhanced";
  CreateDirs(out_dir);
  const fs::path wav = out_dir / (tag + ".wav");
  double peak = 0.0;
  for (double v : result.enhanced) peak = std::max(peak, std::abs(v));
  const double gain = peak > kOutputPeak ? kOutputPeak / peak : 1.0;
  MultiSignal enhanced{result.enhanced};
  for (double& v : enhanced[0]) v *= gain;
  WriteWav(wav, enhanced, static_cast<int>(scene.spec.fs));

  std::size_t num_singular = 0, num_zero = 0;
  for (BinStatus s : result.status) {
    num_singular += s == BinStatus::kSingular;
    num_zero += s == BinStatus::kZeroTarget;
  }
  json run = {{"scene", scene.spec.id},
              {"mode", FeatureModeName(config.mode)},
              {"posterior", PosteriorKindName(config.posterior)},
              {"beta", config.beta},
              {"mask", MaskSourceName(config.mask)},
              {"beamformer", BeamformerKindName(config.beamformer)},
              {"mask_weighting",
               config.mask_weighting == MaskWeighting::kSquared ? "squared" : "linear"},
              {"singular_bins", num_singular},
              {"zero_target_bins", num_zero},
              {"output_gain", gain}};
  if (!result.feature.posterior.empty()) run["posterior_weights"] = result.feature.posterior;
  WriteJsonFile(out_dir / (tag + ".json"), run);

  if (config.dump_features) {
    const FeatureMap& feat = result.feature.feature;
    json info = {{"kind", std::string(FeatureKindName(feat.kind()))},
                 {"axes", {"frame", "bin"}}};
    if (!result.feature.posterior.empty()) info["posterior"] = result.feature.posterior;
    WriteFloatDump(out_dir / (tag + ".feature.f32"), feat.data(),
                   {feat.num_frames(), feat.num_bins()}, info);
    WriteFloatDump(out_dir / (tag + ".mask.f32"), result.mask.data(),
                   {result.mask.num_frames(), result.mask.num_bins()},
                   {{"kind", "mask"}, {"axes", {"frame", "bin"}}});
  }
  return wav;
}

MetricReport CmdEvaluate(const std::vector<fs::path>& scene_dirs,
                         const std::vector<std::string>& conditions,
                         const fs::path& csv_path) {
  if (scene_dirs.empty()) throw ArgumentError("no scene directories given");
  if (conditions.empty()) throw ArgumentError("no conditions given");
  MetricReport report;
  for (const fs::path& dir : scene_dirs) {
    const SceneData scene = LoadScene(dir, true);
    const SceneSpec& spec = scene.spec;
    const std::size_t ref = spec.ref_channel;
    const Signal& reference = scene.stems[TargetIndex(spec)][ref];
    const Signal& mix = scene.mixture[ref];
    const double si_mix = SiSdr(reference, mix);
    for (const std::string& cond : conditions) {
      double si_enh = si_mix;
      if (cond != "mixture") {
        RequireSafeName(cond, "condition");
        const fs::path path = dir / "enhanced" / (cond + ".wav");
        const MultiSignal est = ReadWav(path);
        if (est[0].size() != reference.size()) {
          throw IoError(path.string() + ": length " + std::to_string(est[0].size()) +
                        " does not match the reference (" +
                        std::to_string(reference.size()) + ")");
        }
        si_enh = SiSdr(reference, est[0]);
      }
      report.Add({spec.id, spec.mix_condition, cond, si_mix, si_enh});
    }
  }
  if (!csv_path.empty()) {
    if (csv_path.has_parent_path()) CreateDirs(csv_path.parent_path());
    std::ostringstream rows, summary;
    report.WriteCsv(rows);
    report.WriteSummaryCsv(summary);
    WriteText(csv_path, rows.str());
    fs::path summary_path = csv_path;
    summary_path.replace_filename(csv_path.stem().string() + "_summary.csv");
    WriteText(summary_path, summary.str());
  }
  return report;
}

BeampatternGrid DefaultBeampatternGrid(const StftConfig& stft) {
  BeampatternGrid grid;
  for (int a = 0; a <= 180; a += 5) grid.azimuths_deg.push_back(a);
  grid.elevations_deg = {-20.0, -10.0, 0.0, 10.0};
  for (int d = 1; d <= 6; ++d) grid.distances_m.push_back(0.3 * d);
  const double bin_hz = stft.fs / static_cast<double>(stft.n_fft);
  for (std::size_t k = 0; k < stft.num_bins(); ++k) {
    const double f = k * bin_hz;
    if (f >= 500.0 && f <= 4000.0) grid.bands.push_back(k);
  }
  return grid;
}

Beampattern CmdBeampattern(const RunConfig& config, const fs::path& scene_dir,
                           const BeampatternGrid& grid, bool near_field,
                           const fs::path& out) {
  config.Validate();
  if (config.beamformer == BeamformerKind::kMaskOnly) {
    throw ArgumentError("beampattern needs spatial weights (mvdr or mcwf)");
  }
  if (grid.azimuths_deg.empty() || grid.elevations_deg.empty() ||
      grid.distances_m.empty() || grid.bands.empty()) {
    throw ArgumentError("empty beampattern grid");
  }
  std::optional<PosteriorWeights> weights;
  if (config.posterior == PosteriorKind::kMlp) {
    weights = PosteriorWeights::Load(config.weights_path);
  }
  const SceneData scene = LoadScene(scene_dir, true);
  const SeparationResult result = Separate(scene.mixture, scene.spec, config,
                                           &scene.stems, weights ? &*weights : nullptr);
  Beampattern pattern =
      ComputeBeampattern(*result.weights, scene.spec.array, grid, scene.spec.c, near_field);
  if (!out.empty()) {
    if (out.has_parent_path()) CreateDirs(out.parent_path());
    pattern.WriteCsv(out.string() + ".csv");
    pattern.WriteRaw(out.string() + ".f32");
  }
  return pattern;
}

int ExitCodeFor(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return 3;
  if (dynamic_cast<const NumericalError*>(&e)) return 4;
  if (dynamic_cast<const Error*>(&e)) return 2;
  return 1;
}

}  // namespace bf3d
