#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include <doctest.h>

#include "bf3d/error.h"
#include "bf3d/pipeline.h"
#include "bf3d/spectral.h"
#include "bf3d/wav.h"
#include "test_util.h"

using namespace bf3d;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

SimulationConfig SmallConfig(const std::string& preset, std::size_t n = 1) {
  SimulationConfig cfg = PresetConfig(preset);
  cfg.duration_s = 1.0;
  cfg.num_scenes = n;
  return cfg;
}

struct InMemoryScene {
  SceneSpec spec;
  RenderedScene rendered;
};

InMemoryScene RenderInMemory(const SceneSpec& spec) {
  return {spec, RenderScene(spec, ResolveSignals(spec, {}))};
}

}  // namespace

TEST_CASE("run option names") {
  for (auto m : {FeatureMode::kSfCenter, FeatureMode::kSfPerturbed, FeatureMode::kRfRegion})
    CHECK(ParseFeatureMode(FeatureModeName(m)) == m);
  for (auto p : {PosteriorKind::kUniform, PosteriorKind::kHeuristic, PosteriorKind::kMlp})
    CHECK(ParsePosteriorKind(PosteriorKindName(p)) == p);
  for (auto s : {MaskSource::kOracleIrm, MaskSource::kFeature})
    CHECK(ParseMaskSource(MaskSourceName(s)) == s);
  for (auto b : {BeamformerKind::kMvdr, BeamformerKind::kMcwf, BeamformerKind::kMaskOnly})
    CHECK(ParseBeamformerKind(BeamformerKindName(b)) == b);
  CHECK(FeatureModeName(FeatureMode::kRfRegion) == "rf-region");
  CHECK_THROWS_AS(ParseFeatureMode("rf"), ArgumentError);
  CHECK_THROWS_AS(ParsePosteriorKind("softmax"), ArgumentError);
  CHECK_THROWS_AS(ParseMaskSource("irm"), ArgumentError);
  CHECK_THROWS_AS(ParseBeamformerKind("gev"), ArgumentError);
}

TEST_CASE("run config validation") {
  RunConfig cfg;
  CHECK_NOTHROW(cfg.Validate());
  CHECK(cfg.DefaultTag() == "mvdr_oracle-irm");

  cfg.beamformer = BeamformerKind::kMcwf;
  cfg.mask = MaskSource::kFeature;
  CHECK_THROWS_AS(cfg.Validate(), ArgumentError);

  cfg = RunConfig{};
  cfg.posterior = PosteriorKind::kMlp;
  CHECK_THROWS_AS(cfg.Validate(), ArgumentError);

  cfg = RunConfig{};
  cfg.tag = "../escape";
  CHECK_THROWS_AS(cfg.Validate(), ArgumentError);

  cfg = RunConfig{};
  cfg.mask = MaskSource::kFeature;
  cfg.mode = FeatureMode::kRfRegion;
  CHECK(cfg.DefaultTag() == "mvdr_feature_rf-region_heuristic");
  cfg.tag = "custom";
  CHECK(cfg.EffectiveTag() == "custom");
}

TEST_CASE("region modes need a region") {
  SceneSpec spec = GenerateScenes(SmallConfig("s1+3"))[0];
  spec.target_region.reset();
  RunConfig cfg;
  cfg.mask = MaskSource::kFeature;
  cfg.mode = FeatureMode::kRfRegion;
  CHECK_THROWS_AS(cfg.ValidateFor(spec), ArgumentError);
  CHECK_THROWS_AS(MakeTargetCue(spec, FeatureMode::kRfRegion), ArgumentError);
  cfg.mode = FeatureMode::kSfPerturbed;
  CHECK_NOTHROW(cfg.ValidateFor(spec));
}

TEST_CASE("target cues") {
  const SceneSpec spec = GenerateScenes(SmallConfig("s1+3"))[0];
  const TargetCue center = MakeTargetCue(spec, FeatureMode::kSfCenter);
  REQUIRE(center.point);
  CHECK((center.point->ToCartesian() - spec.target_region->center().ToCartesian()).norm() <
        1e-12);
  const TargetCue perturbed = MakeTargetCue(spec, FeatureMode::kSfPerturbed);
  REQUIRE(perturbed.point);
  CHECK((perturbed.point->ToCartesian() - spec.target().location.ToCartesian()).norm() <
        1e-12);
  const TargetCue region = MakeTargetCue(spec, FeatureMode::kRfRegion);
  CHECK_FALSE(region.point);
  REQUIRE(region.region);
}

TEST_CASE("region feature never reads the true location") {
  SimulationConfig sim = SmallConfig("s1+3");
  const InMemoryScene scene = RenderInMemory(GenerateScenes(sim)[0]);
  RunConfig cfg;
  cfg.mode = FeatureMode::kRfRegion;
  cfg.mask = MaskSource::kFeature;
  const SeparationResult a = Separate(scene.rendered.mixture, scene.spec, cfg, nullptr);

  SceneSpec moved = scene.spec;
  for (SceneSource& s : moved.sources)
    if (s.role == SourceRole::kTarget) s.location = Location3D::FromDegrees(150, 0, 0.5);
  const SeparationResult b = Separate(scene.rendered.mixture, moved, cfg, nullptr);
  CHECK(a.enhanced == b.enhanced);
  CHECK(a.feature.posterior == b.feature.posterior);

  cfg.mode = FeatureMode::kSfPerturbed;
  const SeparationResult c = Separate(scene.rendered.mixture, scene.spec, cfg, nullptr);
  const SeparationResult d = Separate(scene.rendered.mixture, moved, cfg, nullptr);
  CHECK(c.enhanced != d.enhanced);
}

TEST_CASE("uniform posterior equals the plain SF average") {
  const InMemoryScene scene = RenderInMemory(GenerateScenes(SmallConfig("s1+2"))[0]);
  const Spectrogram y = Stft(scene.rendered.mixture);
  TargetCue cue;
  cue.region = scene.spec.target_region;
  const FeatureResult rf =
      TargetFeature(y, cue, scene.spec.array, scene.spec.c, UniformPosterior{});
  const auto points = RegionVertices(*scene.spec.target_region);
  std::vector<FeatureMap> sf;
  for (const Location3D& p : points)
    sf.push_back(SpatialFeature(y, p, scene.spec.array, scene.spec.c));
  REQUIRE(rf.posterior.size() == points.size());
  double worst = 0.0;
  for (std::size_t t = 0; t < y.num_frames(); ++t)
    for (std::size_t f = 0; f < y.num_bins(); ++f) {
      double mean = 0.0;
      for (const FeatureMap& m : sf) mean += m.at(t, f);
      mean /= static_cast<double>(sf.size());
      worst = std::max(worst, std::abs(mean - rf.feature.at(t, f)));
    }
  CHECK(worst < 1e-12);
  CHECK(rf.feature.kind() == FeatureKind::kRf);
}

TEST_CASE("separation is deterministic") {
  const InMemoryScene scene = RenderInMemory(GenerateScenes(SmallConfig("s1+3"))[0]);
  for (auto bf : {BeamformerKind::kMvdr, BeamformerKind::kMcwf, BeamformerKind::kMaskOnly}) {
    RunConfig cfg;
    cfg.beamformer = bf;
    const auto a = Separate(scene.rendered.mixture, scene.spec, cfg, &scene.rendered.stems);
    const auto b = Separate(scene.rendered.mixture, scene.spec, cfg, &scene.rendered.stems);
    CHECK(a.enhanced == b.enhanced);
    CHECK(a.enhanced.size() == scene.spec.num_samples);
    CHECK(a.weights.has_value() == (bf != BeamformerKind::kMaskOnly));
  }
  RunConfig oracle;
  CHECK_THROWS_AS(Separate(scene.rendered.mixture, scene.spec, oracle, nullptr),
                  ArgumentError);
}

TEST_CASE("simulate, separate and evaluate a clean single-speaker scene") {
  const auto root = testing::TempDir("pipeline_clean");
  SimulationConfig sim = SmallConfig("s1");
  sim.num_noises = 0;
  const auto dirs = CmdSimulate(sim, root);
  REQUIRE(dirs.size() == 1);
  CHECK(fs::exists(dirs[0] / "mixture.wav"));
  CHECK(fs::exists(dirs[0] / "stems" / "S1.wav"));
  CHECK(fs::exists(root / "scenes.json"));

  RunConfig cfg;
  cfg.beamformer = BeamformerKind::kMaskOnly;
  const fs::path wav = CmdSeparate(cfg, dirs[0]);
  CHECK(wav == dirs[0] / "enhanced" / "mask-only_oracle-irm.wav");
  const json sidecar = ReadJsonFile(dirs[0] / "enhanced" / "mask-only_oracle-irm.json");
  CHECK(sidecar["beamformer"] == "mask-only");

  const MetricReport report =
      CmdEvaluate(dirs, {"mixture", "mask-only_oracle-irm"}, root / "report.csv");
  REQUIRE(report.rows().size() == 2);
  CHECK(report.rows()[0].delta() == 0.0);
  CHECK(report.rows()[1].si_sdr_enh >= 20.0);
  CHECK(fs::exists(root / "report.csv"));
  CHECK(fs::exists(root / "report_summary.csv"));

  CHECK_THROWS_AS(CmdEvaluate({}, {"mixture"}, {}), ArgumentError);
  CHECK_THROWS_AS(CmdEvaluate(dirs, {}, {}), ArgumentError);
  CHECK_THROWS_AS(CmdEvaluate(dirs, {"unknown_tag"}, {}), IoError);
}

TEST_CASE("simulate and separate are reproducible") {
  const auto a = testing::TempDir("pipeline_rep_a");
  const auto b = testing::TempDir("pipeline_rep_b");
  const SimulationConfig sim = SmallConfig("s1+3", 2);
  const auto da = CmdSimulate(sim, a);
  const auto db = CmdSimulate(sim, b);
  REQUIRE(da.size() == 2);
  for (std::size_t i = 0; i < da.size(); ++i) {
    CHECK(Slurp(da[i] / "mixture.wav") == Slurp(db[i] / "mixture.wav"));
    CHECK(Slurp(da[i] / "scene.json") == Slurp(db[i] / "scene.json"));
  }
  RunConfig cfg;
  cfg.mode = FeatureMode::kRfRegion;
  cfg.mask = MaskSource::kFeature;
  cfg.dump_features = true;
  const fs::path wa = CmdSeparate(cfg, da[0]);
  const fs::path wb = CmdSeparate(cfg, db[0]);
  CHECK(Slurp(wa) == Slurp(wb));
  const fs::path feature = da[0] / "enhanced" / (cfg.EffectiveTag() + ".feature.f32");
  REQUIRE(fs::exists(feature));
  const json meta = ReadJsonFile(feature.string() + ".json");
  CHECK(meta["dtype"] == "float32");
  const auto shape = meta["shape"].get<std::vector<std::size_t>>();
  REQUIRE(shape.size() == 2);
  CHECK(fs::file_size(feature) == shape[0] * shape[1] * 4);
  CHECK(shape[1] == 257);
}

TEST_CASE("scene loading errors name the file") {
  const auto root = testing::TempDir("pipeline_load");
  const auto dirs = CmdSimulate(SmallConfig("s1+3"), root);
  const SceneData data = LoadScene(dirs[0]);
  CHECK(data.stems.size() == data.spec.sources.size());
  CHECK(data.mixture.size() == 2);
  fs::remove(dirs[0] / "stems" / "S3.wav");
  CHECK_NOTHROW(LoadScene(dirs[0], false));
  try {
    LoadScene(dirs[0]);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("S3.wav") != std::string::npos);
  }
  CHECK_THROWS_AS(LoadScene(root / "nowhere"), IoError);
}

TEST_CASE("beampattern export") {
  const auto root = testing::TempDir("pipeline_bp");
  SimulationConfig sim = SmallConfig("s1+3");
  sim.perturb = false;
  const auto dirs = CmdSimulate(sim, root);
  const SceneData data = LoadScene(dirs[0], false);
  BeampatternGrid grid = DefaultBeampatternGrid();
  grid.elevations_deg = {RadToDeg(data.spec.target().location.elevation())};
  grid.distances_m = {data.spec.target().location.distance()};
  RunConfig cfg;
  const Beampattern bp = CmdBeampattern(cfg, dirs[0], grid, true, root / "bp");
  REQUIRE(bp.response_db().size() == grid.azimuths_deg.size());
  CHECK(fs::file_size(root / "bp.f32") == grid.azimuths_deg.size() * 4);
  const json meta = ReadJsonFile(root / "bp.f32.json");
  CHECK(meta["shape"] == json::array({grid.azimuths_deg.size(), 1, 1}));
  std::ifstream csv(root / "bp.csv");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(csv, line)) ++lines;
  CHECK(lines == grid.azimuths_deg.size() + 1);

  cfg.beamformer = BeamformerKind::kMaskOnly;
  CHECK_THROWS_AS(CmdBeampattern(cfg, dirs[0], grid, true, {}), ArgumentError);
}

TEST_CASE("anechoic mvdr nulls the interferer") {
  const auto root = testing::TempDir("pipeline_bp_anechoic");
  SimulationConfig sim = SmallConfig("s1+3");
  sim.perturb = false;
  sim.num_noises = 0;
  sim.t60_min = sim.t60_max = 0.0;
  const auto dirs = CmdSimulate(sim, root);
  const SceneData data = LoadScene(dirs[0], false);
  const BeampatternGrid grid = DefaultBeampatternGrid();
  const Beampattern bp = CmdBeampattern(RunConfig{}, dirs[0], grid, true, {});
  CHECK(bp.response_db().size() == 37 * 4 * 6);
  const double target = bp.response_db()[bp.NearestIndex(data.spec.target().location)];
  const double interferer = bp.response_db()[bp.NearestIndex(data.spec.sources[1].location)];
  CHECK(target - interferer >= 10.0);
  CHECK(*std::max_element(bp.response_db().begin(), bp.response_db().end()) == 0.0);
}

TEST_CASE("default beampattern grid") {
  const BeampatternGrid g = DefaultBeampatternGrid();
  CHECK(g.azimuths_deg.size() == 37);
  CHECK(g.elevations_deg == std::vector<double>{-20, -10, 0, 10});
  CHECK(g.distances_m.size() == 6);
  CHECK(g.bands.front() == 16);
  CHECK(g.bands.back() == 128);
}

TEST_CASE("exit codes") {
  CHECK(ExitCodeFor(ArgumentError("x")) == 2);
  CHECK(ExitCodeFor(ShapeError("x")) == 2);
  CHECK(ExitCodeFor(GeometryError("x")) == 2);
  CHECK(ExitCodeFor(IoError("x")) == 3);
  CHECK(ExitCodeFor(NumericalError("x")) == 4);
  CHECK(ExitCodeFor(std::runtime_error("x")) == 1);
}
