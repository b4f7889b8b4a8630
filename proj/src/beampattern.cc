#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include <json.hpp>

#include "bf3d/beamform.h"
#include "bf3d/error.h"

namespace bf3d {

Beampattern::Beampattern(BeampatternGrid grid, std::vector<double> response_db)
    : grid_(std::move(grid)), response_db_(std::move(response_db)) {
  const std::size_t cells = grid_.azimuths_deg.size() *
                            grid_.elevations_deg.size() *
                            grid_.distances_m.size();
  if (cells != response_db_.size()) {
    throw ShapeError("Beampattern: response size does not match the grid");
  }
}

double Beampattern::at(std::size_t ia, std::size_t ie, std::size_t id) const {
  const std::size_t ne = grid_.elevations_deg.size();
  const std::size_t nd = grid_.distances_m.size();
  return response_db_[(ia * ne + ie) * nd + id];
}

namespace {

std::size_t Nearest(const std::vector<double>& axis, double value) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (std::abs(axis[i] - value) < std::abs(axis[best] - value)) best = i;
  }
  return best;
}

// Angular distance on the azimuth circle, degrees.
double AzimuthGap(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 360.0);
  return std::min(d, 360.0 - d);
}

}  // namespace

std::size_t Beampattern::NearestIndex(const Location3D& loc) const {
  const double az = RadToDeg(loc.azimuth());
  std::size_t ia = 0;
  for (std::size_t i = 1; i < grid_.azimuths_deg.size(); ++i) {
    if (AzimuthGap(grid_.azimuths_deg[i], az) <
        AzimuthGap(grid_.azimuths_deg[ia], az)) {
      ia = i;
    }
  }
  const std::size_t ie = Nearest(grid_.elevations_deg, RadToDeg(loc.elevation()));
  const std::size_t id = Nearest(grid_.distances_m, loc.distance());
  return (ia * grid_.elevations_deg.size() + ie) * grid_.distances_m.size() + id;
}

double Beampattern::RankFraction(std::size_t index) const {
  const double v = response_db_.at(index);
  const auto above = std::count_if(response_db_.begin(), response_db_.end(),
                                   [v](double x) { return x > v; });
  return static_cast<double>(above) / static_cast<double>(response_db_.size());
}

void Beampattern::WriteCsv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write beampattern CSV " + path);
  out << "theta_deg,phi_deg,dist_m,response_db\n";
  out << std::setprecision(10);
  for (std::size_t ia = 0; ia < grid_.azimuths_deg.size(); ++ia)
    for (std::size_t ie = 0; ie < grid_.elevations_deg.size(); ++ie)
      for (std::size_t id = 0; id < grid_.distances_m.size(); ++id) {
        out << grid_.azimuths_deg[ia] << ',' << grid_.elevations_deg[ie] << ','
            << grid_.distances_m[id] << ',' << at(ia, ie, id) << '\n';
      }
  if (!out) throw IoError("write failed for " + path);
}

void Beampattern::WriteRaw(const std::string& path) const {
  static_assert(std::endian::native == std::endian::little);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write beampattern raw file " + path);
  for (double v : response_db_) {
    const float f = static_cast<float>(v);
    out.write(reinterpret_cast<const char*>(&f), sizeof(f));
  }
  if (!out) throw IoError("write failed for " + path);

  nlohmann::json sidecar = {
      {"dtype", "float32"},
      {"endianness", "little"},
      {"layout", "row-major"},
      {"axes", {"theta_deg", "phi_deg", "dist_m"}},
      {"shape",
       {grid_.azimuths_deg.size(), grid_.elevations_deg.size(),
        grid_.distances_m.size()}},
      {"theta_deg", grid_.azimuths_deg},
      {"phi_deg", grid_.elevations_deg},
      {"dist_m", grid_.distances_m},
      {"bands", grid_.bands},
      {"units", "dB re grid maximum"}};
  std::ofstream js(path + ".json");
  if (!js) throw IoError("cannot write sidecar " + path + ".json");
  js << sidecar.dump(2) << '\n';
}

Beampattern ComputeBeampattern(const BeamWeights& w, const MicArray& array,
                               const BeampatternGrid& grid, double c,
                               bool near_field) {
  if (grid.azimuths_deg.empty() || grid.elevations_deg.empty() ||
      grid.distances_m.empty()) {
    throw ArgumentError("ComputeBeampattern: empty grid axis");
  }
  if (grid.bands.empty()) throw ArgumentError("ComputeBeampattern: no bands");
  if (w.framewise()) {
    throw ArgumentError("ComputeBeampattern: requires utterance weights");
  }
  if (w.num_channels() != array.num_mics()) {
    throw ShapeError("ComputeBeampattern: weights and array differ in M");
  }
  for (std::size_t b : grid.bands) {
    if (b >= w.num_bins()) throw ArgumentError("ComputeBeampattern: band out of range");
  }
  const StftConfig& cfg = w.config();
  const auto num_m = static_cast<Eigen::Index>(w.num_channels());
  std::vector<Eigen::VectorXcd> weights;
  for (std::size_t b : grid.bands) {
    weights.emplace_back(Eigen::Map<const Eigen::VectorXcd>(w.at(b).data(), num_m));
  }

  std::vector<double> power;
  power.reserve(grid.azimuths_deg.size() * grid.elevations_deg.size() *
                grid.distances_m.size());
  for (double az : grid.azimuths_deg)
    for (double el : grid.elevations_deg)
      for (double d : grid.distances_m) {
        const Location3D loc = Location3D::FromDegrees(az, el, d);
        double acc = 0.0;
        for (std::size_t i = 0; i < grid.bands.size(); ++i) {
          const Eigen::VectorXcd v =
              SteeringVector(loc, array, grid.bands[i], cfg.n_fft, cfg.fs, c,
                             near_field, w.ref_channel());
          acc += std::norm(weights[i].dot(v));  // dot() conjugates weights
        }
        power.push_back(acc / static_cast<double>(grid.bands.size()));
      }
  const double peak = *std::max_element(power.begin(), power.end());
  constexpr double kFloor = std::numeric_limits<double>::min();
  std::vector<double> db(power.size());
  for (std::size_t i = 0; i < power.size(); ++i) {
    db[i] = 10.0 * std::log10(std::max(power[i], kFloor) / std::max(peak, kFloor));
  }
  return Beampattern(grid, std::move(db));
}

}  // namespace bf3d
