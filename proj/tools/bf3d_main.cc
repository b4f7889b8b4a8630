#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bf3d/error.h"
#include "bf3d/pipeline.h"
#include "bf3d/scene_io.h"

namespace fs = std::filesystem;
using namespace bf3d;

namespace {

struct RunFlags {
  std::string mode = "sf-center";
  std::string posterior = "heuristic";
  double beta = 5.0;
  std::string weights;
  std::string mask = "oracle-irm";
  std::string beamformer = "mvdr";
  std::string weighting = "squared";
  std::string tag;
  bool dump_features = false;

  void Register(CLI::App* app) {
    app->add_option("--mode", mode, "sf-center | sf-perturbed | rf-region")
        ->capture_default_str();
    app->add_option("--posterior", posterior, "uniform | heuristic | mlp")
        ->capture_default_str();
    app->add_option("--beta", beta, "heuristic posterior sharpness")
        ->capture_default_str();
    app->add_option("--weights", weights, "BW3D posterior network weights");
    app->add_option("--mask", mask, "oracle-irm | feature")->capture_default_str();
    app->add_option("--beamformer", beamformer, "mvdr | mcwf | mask-only")
        ->capture_default_str();
    app->add_option("--mask-weighting", weighting, "squared | linear")
        ->capture_default_str();
    app->add_option("--tag", tag, "output name under enhanced/");
    app->add_flag("--dump-features", dump_features, "write feature and mask dumps");
  }

  RunConfig Build() const {
    RunConfig c;
    c.mode = ParseFeatureMode(mode);
    c.posterior = ParsePosteriorKind(posterior);
    c.beta = beta;
    c.weights_path = weights;
    c.mask = ParseMaskSource(mask);
    c.beamformer = ParseBeamformerKind(beamformer);
    if (weighting == "squared") {
      c.mask_weighting = MaskWeighting::kSquared;
    } else if (weighting == "linear") {
      c.mask_weighting = MaskWeighting::kLinear;
    } else {
      throw ArgumentError("unknown mask weighting '" + weighting + "'");
    }
    c.tag = tag;
    c.dump_features = dump_features;
    c.Validate();
    return c;
  }
};

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> ParseRange(const std::string& text, const char* what) {
  // "start:stop:step" or a comma-separated list.
  std::vector<double> out;
  try {
    if (text.find(':') != std::string::npos) {
      std::vector<double> parts;
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
      if (parts.size() != 3 || !(parts[2] > 0) || parts[1] < parts[0]) {
        throw ArgumentError("");
      }
      const auto n = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
      for (long i = 0; i <= n; ++i) out.push_back(parts[0] + i * parts[2]);
    } else {
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    }
  } catch (const std::exception&) {
    throw ArgumentError(std::string("bad ") + what + " '" + text +
                        "' (use start:stop:step or a,b,c)");
  }
  if (out.empty()) throw ArgumentError(std::string("empty ") + what);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"3D spatial-feature target speech separation toolkit"};
  app.require_subcommand(1);

  std::string sim_config, sim_preset = "s1+3", sim_out = "scenes";
  std::optional<std::uint64_t> sim_seed;
  std::optional<std::size_t> sim_num;
  auto* simulate = app.add_subcommand("simulate", "render simulated scenes");
  simulate->add_option("--config", sim_config,
                       "simulation config or single scene document (JSON)");
  simulate->add_option("--preset", sim_preset, "s1 | s1+2 | s1+3 | s1+4 | s1+2+3 | "
                                               "s1+2+4 | s1+3+4 | mixed")
      ->capture_default_str();
  simulate->add_option("--seed", sim_seed, "master seed");
  simulate->add_option("--num-scenes", sim_num, "number of scenes");
  simulate->add_option("--out", sim_out, "output root")->capture_default_str();

  RunFlags sep_flags;
  std::vector<std::string> sep_scenes;
  auto* separate = app.add_subcommand("separate", "enhance scene directories");
  sep_flags.Register(separate);
  separate->add_option("--scene,scenes", sep_scenes, "scene directories")->required();

  std::vector<std::string> eval_scenes;
  std::string eval_conditions;
  std::string eval_out = "report.csv";
  auto* evaluate = app.add_subcommand("evaluate", "score enhanced outputs");
  evaluate->add_option("--scene,scenes", eval_scenes, "scene directories");
  evaluate->add_option("--conditions", eval_conditions,
                       "enhanced tags to score; 'mixture' scores the input")
      ->required();
  evaluate->add_option("--out", eval_out, "per-scene CSV path")->capture_default_str();

  RunFlags bp_flags;
  std::string bp_scene, bp_out = "beampattern", bp_az, bp_el, bp_dist, bp_bands;
  bool bp_far = false;
  auto* beampattern = app.add_subcommand("beampattern", "export a 3D beampattern");
  bp_flags.Register(beampattern);
  beampattern->add_option("--scene", bp_scene, "scene directory")->required();
  beampattern->add_option("--out", bp_out, "output prefix (.csv, .f32)")
      ->capture_default_str();
  beampattern->add_option("--az", bp_az, "azimuths in degrees");
  beampattern->add_option("--el", bp_el, "elevations in degrees");
  beampattern->add_option("--dist", bp_dist, "distances in metres");
  beampattern->add_option("--bands", bp_bands, "frequency bins");
  beampattern->add_flag("--far-field", bp_far, "plane-wave steering");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) {
      fs::path config_dir;
      std::vector<fs::path> dirs;
      if (!sim_config.empty()) {
        const fs::path cfg_path(sim_config);
        config_dir = cfg_path.parent_path();
        const nlohmann::json doc = ReadJsonFile(cfg_path);
        if (doc.contains("sources")) {
          SceneSpec spec = SceneSpecFromJson(doc);
          if (sim_seed) spec.seed = *sim_seed;
          dirs.push_back(WriteScene(spec, ResolveSignals(spec, config_dir), sim_out));
        } else {
          SimulationConfig cfg = SimulationConfigFromJson(doc);
          if (sim_seed) cfg.seed = *sim_seed;
          if (sim_num) cfg.num_scenes = *sim_num;
          dirs = CmdSimulate(cfg, sim_out, config_dir);
        }
      } else {
        SimulationConfig cfg = PresetConfig(sim_preset);
        if (sim_seed) cfg.seed = *sim_seed;
        if (sim_num) cfg.num_scenes = *sim_num;
        dirs = CmdSimulate(cfg, sim_out);
      }
      for (const fs::path& d : dirs) std::cout << d.string() << '\n';
    } else if (*separate) {
      const RunConfig config = sep_flags.Build();
      for (const std::string& dir : sep_scenes) {
        try {
          std::cout << CmdSeparate(config, dir).string() << '\n';
        } catch (const Error& e) {
          std::cerr << "error: scene " << dir << ": " << e.what() << '\n';
          return ExitCodeFor(e);
        }
      }
    } else if (*evaluate) {
      std::vector<fs::path> dirs(eval_scenes.begin(), eval_scenes.end());
      const MetricReport report = CmdEvaluate(dirs, SplitList(eval_conditions), eval_out);
      report.WriteSummaryCsv(std::cout);
    } else if (*beampattern) {
      const RunConfig config = bp_flags.Build();
      BeampatternGrid grid = DefaultBeampatternGrid();
      if (!bp_az.empty()) grid.azimuths_deg = ParseRange(bp_az, "--az");
      if (!bp_el.empty()) grid.elevations_deg = ParseRange(bp_el, "--el");
      if (!bp_dist.empty()) grid.distances_m = ParseRange(bp_dist, "--dist");
      if (!bp_bands.empty()) {
        grid.bands.clear();
        for (double b : ParseRange(bp_bands, "--bands")) {
          if (b < 0 || b != std::floor(b)) throw ArgumentError("--bands takes bin indices");
          grid.bands.push_back(static_cast<std::size_t>(b));
        }
      }
      CmdBeampattern(config, bp_scene, grid, !bp_far, bp_out);
      std::cout << bp_out << ".csv\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ExitCodeFor(e);
  }
  return 0;
}
