#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>

#include "bf3d/error.h"
#include "bf3d/metrics.h"
#include "test_util.h"

using namespace bf3d;

TEST_CASE("si-sdr examples") {
  const Signal ref = testing::RandomSignal(1, 1000, 1)[0];
  CHECK(SiSdr(ref, ref) == 100.0);
  Signal triple = ref;
  for (double& v : triple) v *= 3.0;
  CHECK(SiSdr(ref, triple) == 100.0);
  // oracles/derive_expected.py
  CHECK(SiSdr(Signal{1, 0, 0, 0}, Signal{1, 0, 0.1, 0}) ==
        doctest::Approx(20.0).epsilon(1e-12));
  CHECK(SiSdr(Signal{1, 0}, Signal{0, 1}) == -100.0);
}

TEST_CASE("si-sdr errors") {
  CHECK_THROWS_AS(SiSdr(Signal{0, 0, 0}, Signal{1, 2, 3}), ArgumentError);
  CHECK_THROWS_AS(SiSdr(Signal{1, 2}, Signal{1, 2, 3}), ShapeError);
  CHECK_THROWS_AS(SiSdr(Signal{}, Signal{}), ArgumentError);
}

TEST_CASE("si-sdr is scale invariant") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = testing::RandomSignal(2, 2000, trial);
    const double base = SiSdr(x[0], x[1]);
    double alpha = u(rng);
    if (alpha == 0.0) alpha = 1.0;
    Signal scaled = x[1];
    for (double& v : scaled) v *= alpha;
    CHECK(std::abs(SiSdr(x[0], scaled) - base) < 1e-9);
  }
}

TEST_CASE("si-sdr of orthogonal noise is exact") {
  for (int k = 0; k <= 6; ++k) {
    const auto x = testing::RandomSignal(2, 4000, 50 + k);
    const Signal& ref = x[0];
    Signal n = x[1];
    double rr = 0.0, rn = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) rr += ref[i] * ref[i], rn += ref[i] * n[i];
    double nn = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
      n[i] -= rn / rr * ref[i];
      nn += n[i] * n[i];
    }
    const double scale = std::sqrt(rr / std::pow(10.0, k) / nn);
    Signal est = ref;
    for (std::size_t i = 0; i < n.size(); ++i) est[i] += scale * n[i];
    CHECK(std::abs(SiSdr(ref, est) - 10.0 * k) < 1e-6);
  }
}

TEST_CASE("metric report") {
  MetricReport report;
  report.Add({"a", "S1+3", "mvdr", -2.0, 3.5});
  report.Add({"b", "S1+3", "mvdr", -4.0, 0.5});
  report.Add({"c", "S1+2", "mvdr", 1.0, 2.0});
  report.Add({"a", "S1+3", "mixture", -2.0, -2.0});
  for (const MetricRow& r : report.rows()) CHECK(r.delta() == r.si_sdr_enh - r.si_sdr_mix);
  CHECK(report.rows()[3].delta() == 0.0);
  const auto summaries = report.Summaries();
  bool found = false, found_all = false;
  for (const ConditionSummary& s : summaries) {
    if (s.mix_condition == "S1+3" && s.condition == "mvdr") {
      found = true;
      CHECK(s.num_scenes == 2);
      CHECK(s.mean_si_sdr_mix == -3.0);
      CHECK(s.mean_si_sdr_enh == 2.0);
      CHECK(s.mean_delta == 5.0);
    }
    if (s.mix_condition == "all" && s.condition == "mvdr") {
      found_all = true;
      CHECK(s.num_scenes == 3);
      CHECK(s.mean_delta == doctest::Approx((5.5 + 4.5 + 1.0) / 3));
    }
  }
  CHECK(found);
  CHECK(found_all);
  CHECK(summaries.back().mix_condition == "all");
  std::ostringstream csv;
  report.WriteCsv(csv);
  std::istringstream in(csv.str());
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "scene_id,condition,si_sdr_mix,si_sdr_enh,delta");
  CHECK(first.rfind("a,mvdr,", 0) == 0);
  std::ostringstream summary;
  report.WriteSummaryCsv(summary);
  CHECK(summary.str().rfind(
            "mix_condition,condition,num_scenes,mean_si_sdr_mix,mean_si_sdr_enh,mean_delta\n",
            0) == 0);
}
