#include "bf3d/scene_io.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "bf3d/error.h"

namespace bf3d {

using nlohmann::json;

namespace {

json VecToJson(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 VecFromJson(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw ArgumentError("expected a 3-element array, got " + j.dump());
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json RegionToJson(const std::string& name, const RegionBox& box) {
  return {{"name", name},
          {"center", LocationToJson(box.center())},
          {"half_extents", VecToJson(box.half_extents())}};
}

RegionBox RegionFromJson(const json& j) {
  return RegionBox(LocationFromJson(j.at("center")),
                   VecFromJson(j.at("half_extents")));
}

template <typename Fn>
auto Guarded(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw ArgumentError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

json LocationToJson(const Location3D& loc) {
  return {{"azimuth_deg", RadToDeg(loc.azimuth())},
          {"elevation_deg", RadToDeg(loc.elevation())},
          {"distance_m", loc.distance()}};
}

Location3D LocationFromJson(const json& j) {
  return Guarded("location", [&] {
    return Location3D::FromDegrees(j.at("azimuth_deg").get<double>(),
                                   j.at("elevation_deg").get<double>(),
                                   j.at("distance_m").get<double>());
  });
}

json SceneSpecToJson(const SceneSpec& spec) {
  json positions = json::array();
  for (const Vec3& p : spec.array.positions()) positions.push_back(VecToJson(p));
  json pairs = json::array();
  for (const MicPair& p : spec.array.pairs()) pairs.push_back({p.first, p.second});
  json sources = json::array();
  for (const SceneSource& s : spec.sources) {
    sources.push_back({{"name", s.name},
                       {"region", s.region},
                       {"role", SourceRoleName(s.role)},
                       {"location", LocationToJson(s.location)},
                       {"signal", s.signal}});
  }
  json j = {
      {"id", spec.id},
      {"mix_condition", spec.mix_condition},
      {"fs", spec.fs},
      {"c", spec.c},
      {"num_samples", spec.num_samples},
      {"seed", spec.seed},
      {"room",
       {{"dims", VecToJson(spec.room.dims())},
        {"t60", spec.room.t60()},
        {"max_order", spec.room.max_order()}}},
      {"array",
       {{"positions", positions},
        {"pairs", pairs},
        {"center", VecToJson(spec.placement.center)},
        {"yaw_deg", RadToDeg(spec.placement.yaw)},
        {"ref_channel", spec.ref_channel}}},
      {"sir_db", spec.sir_db},
      {"snr_db", spec.snr_db},
      {"sources", sources}};
  if (spec.target_region) {
    j["target_region"] = RegionToJson(spec.target_region_name, *spec.target_region);
  }
  return j;
}

SceneSpec SceneSpecFromJson(const json& j) {
  return Guarded("scene spec", [&] {
    SceneSpec spec;
    spec.id = j.value("id", std::string("scene"));
    spec.mix_condition = j.value("mix_condition", std::string());
    spec.fs = j.value("fs", kDefaultSampleRate);
    spec.c = j.value("c", kSpeedOfSound);
    spec.num_samples = j.value("num_samples", std::size_t{64000});
    spec.seed = j.value("seed", std::uint64_t{0});
    const json& room = j.at("room");
    spec.room = Room(VecFromJson(room.at("dims")), room.value("t60", 0.0),
                     room.value("max_order", kDefaultMaxOrder));
    if (j.contains("array")) {
      const json& a = j.at("array");
      std::vector<Vec3> positions;
      for (const json& p : a.at("positions")) positions.push_back(VecFromJson(p));
      std::vector<MicPair> pairs;
      for (const json& p : a.value("pairs", json::array({{0, 1}}))) {
        pairs.push_back({p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>()});
      }
      spec.array = MicArray(std::move(positions), std::move(pairs));
      spec.placement.center = VecFromJson(a.at("center"));
      spec.placement.yaw = DegToRad(a.value("yaw_deg", 0.0));
      spec.ref_channel = a.value("ref_channel", std::size_t{0});
    }
    spec.sir_db = j.value("sir_db", 0.0);
    spec.snr_db = j.value("snr_db", 10.0);
    for (const json& s : j.at("sources")) {
      spec.sources.push_back(SceneSource{
          s.at("name").get<std::string>(), s.value("region", std::string()),
          ParseSourceRole(s.at("role").get<std::string>()),
          LocationFromJson(s.at("location")), s.at("signal").get<std::string>()});
    }
    if (j.contains("target_region")) {
      const json& r = j.at("target_region");
      spec.target_region = RegionFromJson(r);
      spec.target_region_name = r.value("name", std::string());
    }
    spec.Validate();
    return spec;
  });
}

json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void WriteJsonFile(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::map<std::string, RegionBox> DefaultSeatRegions(const Vec3& half_extents) {
  constexpr double kLateral = 0.37;
  constexpr double kHeadDrop = -0.10;
  const auto seat = [&](double sign, double azimuth_deg) {
    const double side = sign * kLateral;
    const double depth = kLateral * std::tan(DegToRad(azimuth_deg));
    return RegionBox(Location3D::FromCartesian(Vec3(side, depth, kHeadDrop)),
                     half_extents);
  };
  return {{"S1", seat(1.0, 56.0)},
          {"S2", seat(-1.0, 56.0)},
          {"S3", seat(1.0, 72.0)},
          {"S4", seat(-1.0, 72.0)}};
}

ArrayPlacement DefaultCabinPlacement() {
  return ArrayPlacement{Vec3(0.30, 0.75, 1.15), DegToRad(-90.0)};
}

std::vector<std::string> ParseMixCondition(const std::string& condition) {
  std::vector<std::string> out;
  if (condition.size() < 2 || (condition[0] != 'S' && condition[0] != 's') ||
      condition.back() == '+') {
    throw ArgumentError("bad mix condition '" + condition + "'");
  }
  std::stringstream ss(condition.substr(1));
  std::string part;
  while (std::getline(ss, part, '+')) {
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos) {
      throw ArgumentError("bad mix condition '" + condition + "'");
    }
    out.push_back("S" + part);
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t k = 0; k < i; ++k)
      if (out[i] == out[k]) {
        throw ArgumentError("repeated region in mix condition '" + condition + "'");
      }
  return out;
}

SimulationConfig SimulationConfigFromJson(const json& j) {
  return Guarded("simulation config", [&] {
    SimulationConfig cfg;
    cfg.fs = j.value("fs", cfg.fs);
    cfg.c = j.value("c", cfg.c);
    cfg.duration_s = j.value("duration_s", cfg.duration_s);
    cfg.num_scenes = j.value("num_scenes", cfg.num_scenes);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("room")) {
      const json& r = j.at("room");
      if (r.contains("dims")) cfg.room_dims = VecFromJson(r.at("dims"));
      if (r.contains("t60")) {
        const json& t = r.at("t60");
        if (t.is_array()) {
          cfg.t60_min = t.at(0).get<double>();
          cfg.t60_max = t.at(1).get<double>();
        } else {
          cfg.t60_min = cfg.t60_max = t.get<double>();
        }
      }
      cfg.max_order = r.value("max_order", cfg.max_order);
    }
    if (j.contains("array")) {
      const json& a = j.at("array");
      if (a.contains("positions")) {
        std::vector<Vec3> positions;
        for (const json& p : a.at("positions")) positions.push_back(VecFromJson(p));
        std::vector<MicPair> pairs;
        for (const json& p : a.value("pairs", json::array({{0, 1}}))) {
          pairs.push_back({p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>()});
        }
        cfg.array = MicArray(std::move(positions), std::move(pairs));
      }
      if (a.contains("center")) cfg.placement.center = VecFromJson(a.at("center"));
      if (a.contains("yaw_deg")) {
        cfg.placement.yaw = DegToRad(a.at("yaw_deg").get<double>());
      }
      cfg.ref_channel = a.value("ref_channel", cfg.ref_channel);
    }
    if (j.contains("region_half_extents")) {
      cfg.regions = DefaultSeatRegions(VecFromJson(j.at("region_half_extents")));
    }
    if (j.contains("regions")) {
      for (const auto& [name, r] : j.at("regions").items()) {
        cfg.regions.insert_or_assign(name, RegionFromJson(r));
      }
    }
    if (j.contains("mix_conditions")) {
      cfg.mix_conditions = j.at("mix_conditions").get<std::vector<std::string>>();
    }
    if (j.contains("sir_db")) {
      cfg.sir_min_db = j.at("sir_db").at(0).get<double>();
      cfg.sir_max_db = j.at("sir_db").at(1).get<double>();
    }
    if (j.contains("snr_db")) {
      cfg.snr_min_db = j.at("snr_db").at(0).get<double>();
      cfg.snr_max_db = j.at("snr_db").at(1).get<double>();
    }
    cfg.num_noises = j.value("num_noises", cfg.num_noises);
    cfg.perturb = j.value("perturb", cfg.perturb);
    if (j.contains("speech")) {
      cfg.speech = j.at("speech").get<std::map<std::string, std::string>>();
    }
    if (cfg.num_scenes == 0) throw ArgumentError("num_scenes must be >= 1");
    if (cfg.mix_conditions.empty()) throw ArgumentError("no mix conditions");
    for (const std::string& c : cfg.mix_conditions) {
      for (const std::string& r : ParseMixCondition(c)) {
        if (!cfg.regions.contains(r)) {
          throw ArgumentError("mix condition '" + c + "' uses unknown region " + r);
        }
      }
    }
    if (cfg.num_noises > 0 && cfg.num_noises < 3) {
      throw ArgumentError("num_noises must be 0 or >= 3");
    }
    if (!(cfg.t60_min <= cfg.t60_max) || !(cfg.sir_min_db <= cfg.sir_max_db) ||
        !(cfg.snr_min_db <= cfg.snr_max_db)) {
      throw ArgumentError("range minimum exceeds maximum");
    }
    return cfg;
  });
}

SimulationConfig PresetConfig(const std::string& name) {
  static const std::vector<std::string> kConditions = {
      "S1", "S1+2", "S1+3", "S1+4", "S1+2+3", "S1+2+4", "S1+3+4"};
  SimulationConfig cfg;
  if (name == "mixed") {
    cfg.mix_conditions = kConditions;
    return cfg;
  }
  std::string upper = name;
  if (!upper.empty() && upper[0] == 's') upper[0] = 'S';
  for (const std::string& c : kConditions) {
    if (c == upper) {
      cfg.mix_conditions = {c};
      return cfg;
    }
  }
  throw ArgumentError("unknown preset '" + name + "'");
}

namespace {

std::mt19937_64 SceneRng(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

double Uniform(std::mt19937_64& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Location3D SampleInBox(const RegionBox& box, std::mt19937_64& rng) {
  const Vec3 c = box.center().ToCartesian();
  const Vec3& h = box.half_extents();
  const Vec3 p(Uniform(rng, c.x() - h.x(), c.x() + h.x()),
               Uniform(rng, c.y() - h.y(), c.y() + h.y()),
               Uniform(rng, c.z() - h.z(), c.z() + h.z()));
  return Location3D::FromCartesian(p);
}

Location3D SampleNoiseLocation(const SimulationConfig& cfg,
                               std::mt19937_64& rng) {
  constexpr double kWallMargin = 0.1;
  constexpr double kMinArrayDistance = 0.3;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Vec3 room_point;
    for (int a = 0; a < 3; ++a) {
      room_point[a] = Uniform(rng, kWallMargin, cfg.room_dims[a] - kWallMargin);
    }
    const Vec3 local = cfg.placement.ToArray(room_point);
    if (local.norm() >= kMinArrayDistance) return Location3D::FromCartesian(local);
  }
  throw GeometryError("room too small to place noise sources");
}

std::string SceneId(std::size_t index) {
  std::ostringstream os;
  os << "scene_" << std::setw(4) << std::setfill('0') << index;
  return os.str();
}

}  // namespace

std::vector<SceneSpec> GenerateScenes(const SimulationConfig& cfg) {
  std::vector<SceneSpec> scenes;
  scenes.reserve(cfg.num_scenes);
  const auto num_samples =
      static_cast<std::size_t>(std::llround(cfg.duration_s * cfg.fs));
  for (std::size_t i = 0; i < cfg.num_scenes; ++i) {
    std::mt19937_64 rng = SceneRng(cfg.seed, i);
    SceneSpec spec;
    spec.id = SceneId(i);
    spec.mix_condition = cfg.mix_conditions[i % cfg.mix_conditions.size()];
    spec.fs = cfg.fs;
    spec.c = cfg.c;
    spec.num_samples = num_samples;
    spec.seed = rng();
    spec.room = Room(cfg.room_dims, Uniform(rng, cfg.t60_min, cfg.t60_max),
                     cfg.max_order);
    spec.array = cfg.array;
    spec.placement = cfg.placement;
    spec.ref_channel = cfg.ref_channel;
    spec.sir_db = Uniform(rng, cfg.sir_min_db, cfg.sir_max_db);
    spec.snr_db = Uniform(rng, cfg.snr_min_db, cfg.snr_max_db);

    const std::vector<std::string> regions = ParseMixCondition(spec.mix_condition);
    for (std::size_t k = 0; k < regions.size(); ++k) {
      const RegionBox& box = cfg.regions.at(regions[k]);
      const Location3D loc = cfg.perturb ? SampleInBox(box, rng) : box.center();
      auto it = cfg.speech.find(regions[k]);
      const std::uint64_t signal_seed = rng();
      const std::string signal = it != cfg.speech.end()
                                     ? it->second
                                     : "synth:speech:" + std::to_string(signal_seed);
      spec.sources.push_back(SceneSource{
          regions[k], regions[k],
          k == 0 ? SourceRole::kTarget : SourceRole::kInterferer, loc, signal});
      if (k == 0) {
        spec.target_region = box;
        spec.target_region_name = regions[k];
      }
    }
    for (std::size_t k = 0; k < cfg.num_noises; ++k) {
      const Location3D loc = SampleNoiseLocation(cfg, rng);
      spec.sources.push_back(SceneSource{"noise" + std::to_string(k), "",
                                         SourceRole::kNoise, loc,
                                         "synth:pink:" + std::to_string(rng())});
    }
    spec.Validate();
    scenes.push_back(std::move(spec));
  }
  return scenes;
}

}  // namespace bf3d
