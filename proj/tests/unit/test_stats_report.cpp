#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "coevo/errors.hpp"
#include "coevo/oracles.hpp"
#include "coevo/stats_report.hpp"

using namespace coevo;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

ScenarioResult result_with_hv(const std::vector<double>& hv) {
  ScenarioResult r;
  for (std::size_t i = 0; i < hv.size(); ++i) {
    ApproxParetoSet aps;
    aps.run_id = static_cast<int>(i);
    r.aps_per_run.push_back(aps);
    RunRecord rec;
    rec.run = static_cast<int>(i);
    rec.ok = true;
    r.runs.push_back(rec);
  }
  r.hv_per_run = hv;
  return r;
}

}  // namespace

TEST_CASE("block ranks average ties and sum to k(k+1)/2") {
  const std::vector<double> row = {0.5, 0.9, 0.5, 0.1};
  const auto r = rank_block(row);
  CHECK(r == std::vector<double>{2.5, 1, 2.5, 4});
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(5);
    for (auto& v : x) v = std::floor(uniform01(rng) * 3);
    const auto rr = rank_block(x);
    CHECK(std::accumulate(rr.begin(), rr.end(), 0.0) == doctest::Approx(15.0));
  }
}

TEST_CASE("Friedman: identical columns give statistic 0, p 1") {
  const HvMatrix m = {{0.3, 0.3, 0.3}, {0.5, 0.5, 0.5}};
  const auto f = friedman_test(m);
  CHECK(f.statistic == 0.0);
  CHECK(f.p_value == 1.0);
}

TEST_CASE("Friedman: hand-ranked 3 x 4 table") {
  const HvMatrix m = {{0.9, 0.5, 0.1}, {0.8, 0.6, 0.2}, {0.7, 0.4, 0.3}, {0.95, 0.55, 0.05}};
  const auto f = friedman_test(m);
  CHECK(f.statistic == doctest::Approx(8.0));
  boost::math::chi_squared chi(2);
  CHECK(f.p_value == doctest::Approx(boost::math::cdf(boost::math::complement(chi, 8.0))).epsilon(1e-12));
  CHECK(f.p_value == doctest::Approx(0.0183).epsilon(1e-2));
  CHECK(f.avg_ranks == std::vector<double>{1, 2, 3});
}

TEST_CASE("Friedman statistic equals the textbook tie-corrected form") {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    HvMatrix m(10, std::vector<double>(4));
    for (auto& row : m) {
      for (auto& v : row) v = std::round(uniform01(rng) * 4) / 4;
    }
    bool varied = false;
    for (const auto& row : m) varied = varied || row[0] != row[1] || row[1] != row[2] || row[2] != row[3];
    if (!varied) continue;
    CHECK(friedman_test(m).statistic == doctest::Approx(oracle::friedman_statistic(m)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(friedman_test(HvMatrix{{1, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(friedman_test(HvMatrix{{1, 2}, {1}}), std::invalid_argument);
}

TEST_CASE("Friedman accepts the 4 x 40 layout") {
  Rng rng(2);
  HvMatrix m(40, std::vector<double>(4));
  for (auto& row : m) {
    for (std::size_t j = 0; j < 4; ++j) row[j] = uniform01(rng) + 0.1 * static_cast<double>(j);
  }
  const auto f = friedman_test(m);
  CHECK(f.blocks == 40);
  CHECK(f.treatments == 4);
  CHECK(f.p_value >= 0.0);
  CHECK(f.p_value <= 1.0);
}

TEST_CASE("Hommel adjusted p-values") {
  CHECK(hommel_apv(std::vector<double>{0.03}) == std::vector<double>{0.03});
  for (double v : hommel_apv(std::vector<double>{0.001, 0.001, 0.001})) CHECK(v <= 0.003);
  const auto a = hommel_apv(std::vector<double>{0.01, 0.02, 0.04});
  CHECK(a[0] == doctest::Approx(0.03));
  CHECK(a[1] == doctest::Approx(0.04));
  CHECK(a[2] == doctest::Approx(0.04));
  const auto b = hommel_apv(std::vector<double>{0.5, 0.02, 0.03});
  CHECK(b[0] == doctest::Approx(0.5));
  CHECK(b[1] == doctest::Approx(0.045));
  CHECK(b[2] == doctest::Approx(0.06));
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> p(2 + uniform_index(rng, 5));
    for (auto& v : p) v = uniform01(rng) * 0.2;
    const auto apv = hommel_apv(p);
    const auto ref = oracle::closed_testing_hommel(p);
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return p[x] < p[y]; });
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(apv[i] == doctest::Approx(ref[i]).epsilon(1e-12));
      CHECK(apv[i] >= p[i]);
      CHECK(apv[i] <= std::min(1.0, static_cast<double>(p.size()) * p[i]) + 1e-15);
      if (i > 0) CHECK(apv[order[i]] >= apv[order[i - 1]]);
    }
  }
}

TEST_CASE("post-hoc p-values are one-sided normal tails of the rank gap") {
  const HvMatrix m = {{0.9, 0.5, 0.1}, {0.8, 0.6, 0.2}, {0.7, 0.4, 0.3}, {0.95, 0.55, 0.05}};
  const auto f = friedman_test(m);
  const auto p = friedman_posthoc_p(f, 0);
  CHECK(p[0] == 1.0);
  const double se = std::sqrt(3.0 * 4.0 / (6.0 * 4.0));
  CHECK(p[1] == doctest::Approx(0.5 * std::erfc((1.0 / se) / std::sqrt(2.0))).epsilon(1e-12));
  CHECK(p[2] == doctest::Approx(0.5 * std::erfc((2.0 / se) / std::sqrt(2.0))).epsilon(1e-12));
}

TEST_CASE("compare_scenarios picks the best-ranked control, ties by id") {
  const std::vector<std::string> ids = {"LF+NSGA2", "LS+EAGD", "LF+EAGD"};
  const HvMatrix m = {{0.1, 0.9, 0.5}, {0.2, 0.8, 0.4}, {0.3, 0.7, 0.6}};
  const auto rep = compare_scenarios(ids, m);
  CHECK(rep.control == 1);
  CHECK(rep.scenarios[1].control);
  CHECK(rep.scenarios[1].apv == 1.0);
  for (const auto& s : rep.scenarios) CHECK(s.apv >= s.p_value);
  const HvMatrix tied = {{0.5, 0.5}, {0.4, 0.4}};
  const std::vector<std::string> two = {"LS+NSGA2", "LF+EAGD"};
  CHECK(compare_scenarios(two, tied).control == 1);
}

TEST_CASE("median front uses the lower median") {
  CHECK(median_index(std::vector<double>{0.2, 0.5, 0.9}) == 1);
  CHECK(median_index(std::vector<double>{0.8, 0.2, 0.6, 0.4}) == 3);
  Rng rng(4);
  std::vector<double> hv(40);
  for (auto& v : hv) v = uniform01(rng);
  auto sorted = hv;
  std::sort(sorted.begin(), sorted.end());
  CHECK(hv[median_index(hv)] == sorted[19]);
  const auto r = result_with_hv({0.2, 0.4, 0.6, 0.8});
  CHECK(median_front(r).run_id == 1);
  CHECK_THROWS_AS(median_front(ScenarioResult{}), EmptyDataError);
}

TEST_CASE("hv indicators use the union front of all runs") {
  std::vector<ScenarioResult> results = {result_with_hv({0, 0}), result_with_hv({0, 0})};
  const ComparisonPoints pts = {{{{0.0, 1.0}, {1.0, 0.0}}, {{0.5, 0.5}}}, {{{0.5, 0.9}}, {{0.0, 1.0}, {0.4, 0.4}, {1.0, 0.0}}}};
  const auto gamma = assign_hv_indicators(results, pts, 1.1);
  CHECK(gamma.size() == 3);
  CHECK(results[1].hv_per_run[1] == doctest::Approx(1.0));
  for (const auto& r : results) {
    for (double v : r.hv_per_run) {
      CHECK(v > 0);
      CHECK(v <= 1.0 + 1e-12);
    }
  }
  const auto m = hv_matrix(results);
  CHECK(m.size() == 2);
  CHECK(m[0].size() == 2);
}

TEST_CASE("emit_report writes the three table analogues") {
  const fs::path dir = fs::temp_directory_path() / "coevo_emit_report_test";
  fs::remove_all(dir);
  const std::vector<std::string> ids = {"LF+NSGA2", "LS+EAGD"};
  const HvMatrix m = {{0.1, 0.9}, {0.2, 0.8}, {0.3, 0.7}};
  ReportInputs in;
  in.header_json = "{\"tool\":\"coevo\"}";
  in.stats = compare_scenarios(ids, m);
  in.scenario_ids = ids;
  in.median_fronts = {{{0.4, 0.3}, {0.2, 0.5}}, {{0.1, 0.2}}};
  in.objective_names = {"E_hold", "C"};
  SelectionRow row;
  row.scenario = "LS+EAGD";
  row.member.architecture.features = {1, 2, 3};
  row.member.architecture.layers = {{96, Activation::Tansig}, {0, Activation::Tansig}};
  row.member.genome = Genome(86);
  row.complexity = 0.42;
  row.holdout.cycles = 2;
  in.selections = {row};
  emit_report(dir, in);

  const auto summary = read_lines(dir / "summary.csv");
  REQUIRE(summary.size() == 4);
  CHECK(summary[0].rfind("# ", 0) == 0);
  CHECK(summary[1] == "scenario,hv_mean,hv_sd,p_value,apv,reject");
  CHECK(summary[3].find("control") != std::string::npos);
  const auto front = read_lines(dir / "median_front_LF_NSGA2.csv");
  REQUIRE(front.size() == 4);
  CHECK(front[1] == "E_hold,C");
  const auto sel = read_lines(dir / "selected_architecture.csv");
  REQUIRE(sel.size() == 3);
  CHECK(sel[2].find("\"(96,tansig)\"") != std::string::npos);
  fs::remove_all(dir);
}
