#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "coevo/errors.hpp"
#include "coevo/moea_core.hpp"
#include "coevo/oracles.hpp"

using namespace coevo;

namespace {

ApproxParetoSet aps_of(const std::vector<ObjectiveVector>& pts, std::size_t genome_offset) {
  ApproxParetoSet s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Genome g(86);
    const std::size_t id = genome_offset + i;
    for (std::size_t b = 0; b < 20; ++b) g.set(b, ((id >> b) & 1u) != 0);
    s.members.push_back({g, {}, pts[i]});
  }
  return s;
}

double binomial(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("dominance") {
  const std::vector<double> a = {0.2, 0.3}, b = {0.4, 0.3}, c = {0.1, 0.9}, d = {0.9, 0.1};
  CHECK(dominates(a, b));
  CHECK_FALSE(dominates(a, a));
  CHECK_FALSE(dominates(c, d));
  CHECK_FALSE(dominates(d, c));
  CHECK_THROWS_AS(dominates(a, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST_CASE("nondominated_sort small cases") {
  CHECK(nondominated_sort(std::vector<ObjectiveVector>{{1, 1}}) == std::vector<std::vector<std::size_t>>{{0}});
  const std::vector<ObjectiveVector> pts = {{0, 1}, {1, 0}, {1, 1}};
  const auto fronts = nondominated_sort(pts);
  CHECK(fronts == std::vector<std::vector<std::size_t>>{{0, 1}, {2}});
  CHECK(fronts == oracle::brute_force_fronts(pts));
}

TEST_CASE("nondominated_sort equals brute force on random points") {
  Rng rng(77);
  for (int t = 0; t < 30; ++t) {
    std::vector<ObjectiveVector> pts(50, ObjectiveVector(3));
    for (auto& p : pts) {
      for (auto& v : p) v = std::floor(uniform01(rng) * 8);
    }
    const auto fronts = nondominated_sort(pts);
    CHECK(fronts == oracle::brute_force_fronts(pts));
    std::set<std::size_t> seen;
    for (const auto& f : fronts) {
      for (auto i : f) CHECK(seen.insert(i).second);
    }
    CHECK(seen.size() == pts.size());
  }
}

TEST_CASE("crowding distance") {
  const auto two = crowding_distance(std::vector<ObjectiveVector>{{0, 1}, {1, 0}});
  CHECK(std::isinf(two[0]));
  CHECK(std::isinf(two[1]));
  const auto three = crowding_distance(std::vector<ObjectiveVector>{{0, 1}, {0.5, 0.5}, {1, 0}});
  CHECK(std::isinf(three[0]));
  CHECK(std::isinf(three[2]));
  CHECK(three[1] == doctest::Approx(2.0));
  const auto same = crowding_distance(std::vector<ObjectiveVector>{{1, 1}, {1, 1}, {1, 1}, {1, 1}});
  int finite = 0;
  for (double v : same) {
    if (!std::isinf(v)) {
      CHECK(v == 0.0);
      ++finite;
    }
  }
  CHECK(finite == 2);
}

TEST_CASE("Das-Dennis lattice") {
  const auto w = das_dennis_weights(2, 4);
  REQUIRE(w.size() == 5);
  const std::vector<ObjectiveVector> expected = {{0, 1}, {0.25, 0.75}, {0.5, 0.5}, {0.75, 0.25}, {1, 0}};
  std::set<ObjectiveVector> got(w.begin(), w.end()), want(expected.begin(), expected.end());
  CHECK(got == want);
  CHECK(das_dennis_weights(3, 2).size() == 6);
  const auto w12 = das_dennis_weights(3, 12);
  CHECK(w12.size() == 91);
  for (const auto& v : w12) CHECK(std::abs(v[0] + v[1] + v[2] - 1) < 1e-12);
  for (int m = 2; m <= 4; ++m) {
    for (int h = 1; h <= 20; ++h) CHECK(das_dennis_weights(m, h).size() == static_cast<std::size_t>(binomial(h + m - 1, m - 1)));
  }
}

TEST_CASE("Tchebycheff scalarization") {
  const std::vector<double> ideal = {0, 0};
  CHECK(tchebycheff(ideal, std::vector<double>{0.5, 0.5}, ideal) == 0.0);
  CHECK(tchebycheff(std::vector<double>{0.3, 9}, std::vector<double>{1, 0}, ideal) == doctest::Approx(0.3));
  CHECK(tchebycheff(std::vector<double>{0.2, 0.6}, std::vector<double>{0.5, 0.5}, ideal) == doctest::Approx(0.3));
}

TEST_CASE("hypervolume examples") {
  const std::vector<double> ref = {1, 1};
  CHECK(hypervolume(std::vector<ObjectiveVector>{{0, 0}}, ref) == 1.0);
  const std::vector<ObjectiveVector> f = {{0.2, 0.8}, {0.5, 0.5}, {0.8, 0.2}};
  CHECK(hypervolume(f, ref) == doctest::Approx(0.37).epsilon(1e-12));
  const auto mc = oracle::monte_carlo_hypervolume(f, ref, 1000000, 1);
  CHECK(std::abs(mc.value - 0.37) < 0.002);
  CHECK(hypervolume(std::vector<ObjectiveVector>{}, ref) == 0.0);
  CHECK(hypervolume(std::vector<ObjectiveVector>{{1.0, 0.5}}, ref) == 0.0);
  const std::vector<ObjectiveVector> cube = {{0, 0, 0}};
  CHECK(hypervolume(cube, std::vector<double>{2, 3, 0.5}) == doctest::Approx(3.0));
}

TEST_CASE("hypervolume in 3-D agrees with Monte-Carlo and is monotone") {
  Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    std::vector<ObjectiveVector> pts;
    for (int i = 0; i < 30; ++i) pts.push_back({uniform01(rng), uniform01(rng), uniform01(rng)});
    const std::vector<double> ref = {1.1, 1.1, 1.1};
    const double hv = hypervolume(pts, ref);
    const auto mc = oracle::monte_carlo_hypervolume(pts, ref, 400000, 100 + static_cast<std::uint64_t>(t));
    CHECK(std::abs(hv - mc.value) < 4 * mc.standard_error + 1e-12);
    auto more = pts;
    more.push_back({uniform01(rng), uniform01(rng), uniform01(rng)});
    CHECK(hypervolume(more, ref) >= hv);
  }
}

TEST_CASE("estimate_true_pareto") {
  const auto a = aps_of({{0.1, 0.9}, {0.5, 0.5}, {0.9, 0.1}}, 0);
  CHECK(estimate_true_pareto(std::vector<ApproxParetoSet>{a}).size() == 3);
  const auto b = aps_of({{0.2, 0.95}, {0.6, 0.6}}, 100);
  const auto g = estimate_true_pareto(std::vector<ApproxParetoSet>{a, b});
  REQUIRE(g.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(g[i].objectives == a.members[i].objectives);

  Rng rng(21);
  std::vector<ApproxParetoSet> sets;
  oracle::Points all;
  for (int s = 0; s < 4; ++s) {
    std::vector<ObjectiveVector> pts;
    for (int i = 0; i < 40; ++i) pts.push_back({uniform01(rng), uniform01(rng), uniform01(rng)});
    sets.push_back(aps_of(pts, static_cast<std::size_t>(s) * 1000));
    all.insert(all.end(), pts.begin(), pts.end());
  }
  std::set<ObjectiveVector> want;
  for (auto i : oracle::brute_force_nondominated(all)) want.insert(all[i]);
  std::set<ObjectiveVector> got;
  for (const auto& m : estimate_true_pareto(sets)) got.insert(m.objectives);
  CHECK(got == want);
}

TEST_CASE("hv_indicator") {
  const std::vector<ObjectiveVector> gamma = {{0, 1}, {0.4, 0.4}, {1, 0}};
  CHECK(hv_indicator(gamma, gamma) == doctest::Approx(1.0));
  const double corner = hv_indicator(std::vector<ObjectiveVector>{{1, 1}}, gamma);
  const auto b = NormalizationBounds::of(gamma);
  std::vector<ObjectiveVector> norm;
  for (const auto& p : gamma) norm.push_back(b.normalize(p));
  const double hv_gamma = hypervolume(norm, std::vector<double>{1.1, 1.1});
  CHECK(corner == doctest::Approx(0.01 / hv_gamma).epsilon(1e-12));
  CHECK(corner > 0);
  CHECK(hv_indicator(std::vector<ObjectiveVector>{{0.1, 1}, {0.5, 0.5}}, gamma) < 1.0);
  const std::vector<ObjectiveVector> flat = {{0.3, 0.5}, {0.3, 0.5}};
  CHECK(hv_indicator(flat, flat) == doctest::Approx(1.0));
}
