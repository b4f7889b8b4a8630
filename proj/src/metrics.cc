#include "bf3d/metrics.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <tuple>

#include "bf3d/error.h"

namespace bf3d {

double SiSdr(std::span<const double> reference,
             std::span<const double> estimate) {
  if (reference.size() != estimate.size()) {
    throw ShapeError("SiSdr: reference and estimate differ in length");
  }
  if (reference.empty()) throw ArgumentError("SiSdr: empty signals");
  double ref_energy = 0.0, cross = 0.0;
  for (std::size_t n = 0; n < reference.size(); ++n) {
    ref_energy += reference[n] * reference[n];
    cross += reference[n] * estimate[n];
  }
  if (!(ref_energy > 0.0)) throw ArgumentError("SiSdr: all-zero reference");
  const double alpha = cross / ref_energy;
  double err = 0.0;
  for (std::size_t n = 0; n < reference.size(); ++n) {
    const double e = estimate[n] - alpha * reference[n];
    err += e * e;
  }
  const double target = alpha * alpha * ref_energy;
  if (!(target > 0.0)) return -kSiSdrCapDb;
  if (!(err > 0.0)) return kSiSdrCapDb;
  const double db = 10.0 * std::log10(target / err);
  return std::clamp(db, -kSiSdrCapDb, kSiSdrCapDb);
}

std::vector<ConditionSummary> MetricReport::Summaries() const {
  using Key = std::tuple<int, std::string, std::string>;
  std::map<Key, ConditionSummary> groups;
  auto accumulate = [&](const Key& key, const MetricRow& r) {
    ConditionSummary& s = groups[key];
    s.mix_condition = std::get<1>(key);
    s.condition = std::get<2>(key);
    ++s.num_scenes;
    s.mean_si_sdr_mix += r.si_sdr_mix;
    s.mean_si_sdr_enh += r.si_sdr_enh;
  };
  for (const MetricRow& r : rows_) {
    accumulate({0, r.mix_condition, r.condition}, r);
    accumulate({1, "all", r.condition}, r);
  }
  std::vector<ConditionSummary> out;
  for (auto& [key, s] : groups) {
    const auto n = static_cast<double>(s.num_scenes);
    s.mean_si_sdr_mix /= n;
    s.mean_si_sdr_enh /= n;
    s.mean_delta = s.mean_si_sdr_enh - s.mean_si_sdr_mix;
    out.push_back(s);
  }
  return out;
}

void MetricReport::WriteCsv(std::ostream& out) const {
  out << "scene_id,condition,si_sdr_mix,si_sdr_enh,delta\n" << std::fixed
      << std::setprecision(4);
  for (const MetricRow& r : rows_) {
    out << r.scene_id << ',' << r.condition << ',' << r.si_sdr_mix << ','
        << r.si_sdr_enh << ',' << r.delta() << '\n';
  }
}

void MetricReport::WriteSummaryCsv(std::ostream& out) const {
  out << "mix_condition,condition,num_scenes,mean_si_sdr_mix,mean_si_sdr_enh,"
         "mean_delta\n"
      << std::fixed << std::setprecision(4);
  for (const ConditionSummary& s : Summaries()) {
    out << s.mix_condition << ',' << s.condition << ',' << s.num_scenes << ','
        << s.mean_si_sdr_mix << ',' << s.mean_si_sdr_enh << ',' << s.mean_delta
        << '\n';
  }
}

}  // namespace bf3d
