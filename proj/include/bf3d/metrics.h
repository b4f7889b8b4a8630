// Scale-invariant SDR and per-scene evaluation reports.

#ifndef BF3D_METRICS_H_
#define BF3D_METRICS_H_

#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace bf3d {

inline constexpr double kSiSdrCapDb = 100.0;

// alpha = <est, ref> / |ref|^2;
// 10 log10(|alpha ref|^2 / |est - alpha ref|^2), clamped to [-100, 100] dB;
// a zero residual gives +100 dB. Throws ArgumentError for a zero reference and ShapeError
// for a length mismatch.
double SiSdr(std::span<const double> reference, std::span<const double> estimate);

struct MetricRow {
  std::string scene_id;
  std::string mix_condition;  // speaker mix, e.g. "S1+3"
  std::string condition;      // enhancement condition, e.g. "mvdr"
  double si_sdr_mix = 0.0;
  double si_sdr_enh = 0.0;
  double delta() const { return si_sdr_enh - si_sdr_mix; }
};

struct ConditionSummary {
  std::string mix_condition;  // "all" for the pooled mean
  std::string condition;
  std::size_t num_scenes = 0;
  double mean_si_sdr_mix = 0.0;
  double mean_si_sdr_enh = 0.0;
  double mean_delta = 0.0;
};

class MetricReport {
 public:
  void Add(MetricRow row) { rows_.push_back(std::move(row)); }
  const std::vector<MetricRow>& rows() const { return rows_; }

  // Means per (mix condition, condition), followed by the pooled "all"
  // group per condition.
  std::vector<ConditionSummary> Summaries() const;

  // scene_id,condition,si_sdr_mix,si_sdr_enh,delta
  void WriteCsv(std::ostream& out) const;
  // mix_condition,condition,num_scenes,mean_si_sdr_mix,mean_si_sdr_enh,mean_delta
  void WriteSummaryCsv(std::ostream& out) const;

 private:
  std::vector<MetricRow> rows_;
};

}  // namespace bf3d

#endif  // BF3D_METRICS_H_
