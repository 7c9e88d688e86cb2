#include <doctest.h>

#include <atomic>
#include <set>

#include "coevo/errors.hpp"
#include "coevo/oracles.hpp"
#include "coevo/search_algorithms.hpp"

using namespace coevo;

namespace {

FunctionEvaluator ones_zeros(std::size_t n, std::atomic<std::size_t>* calls = nullptr) {
  return FunctionEvaluator(2, n, [n, calls](const Genome& g) {
    if (calls) ++*calls;
    const double ones = static_cast<double>(g.count_ones()) / static_cast<double>(n);
    return ObjectiveVector{ones, 1.0 - ones};
  });
}

/// Two conflicting objectives with a dominated interior: leading ones vs trailing zeros.
FunctionEvaluator lotz_like(std::size_t n) {
  return FunctionEvaluator(2, n, [n](const Genome& g) {
    std::size_t lo = 0, tz = 0;
    while (lo < n && g[lo]) ++lo;
    while (tz < n && !g[n - 1 - tz]) ++tz;
    return ObjectiveVector{1.0 - static_cast<double>(lo) / n, 1.0 - static_cast<double>(tz) / n};
  });
}

bool mutually_nondominated(const ApproxParetoSet& aps) {
  oracle::Points pts;
  for (const auto& m : aps.members) pts.push_back(m.objectives);
  return oracle::brute_force_nondominated(pts).size() == pts.size();
}

bool same_aps(const ApproxParetoSet& a, const ApproxParetoSet& b) {
  if (a.members.size() != b.members.size()) return false;
  for (std::size_t i = 0; i < a.members.size(); ++i) {
    if (!(a.members[i].genome == b.members[i].genome) || a.members[i].objectives != b.members[i].objectives) return false;
  }
  return true;
}

double hv_of(const ApproxParetoSet& aps) {
  return hypervolume(aps.objective_vectors(), std::vector<double>{1.1, 1.1});
}

}  // namespace

TEST_CASE("non-geometric crossover edge cases") {
  Rng rng(1);
  const auto p = random_genome(86, rng);
  auto [c1, c2] = nongeometric_crossover(p, p, 0.0, rng);
  CHECK(c1 == p);
  CHECK(c2 == p);
  const Genome zeros(86);
  auto [d1, d2] = nongeometric_crossover(zeros, zeros, 1.0, rng);
  CHECK(d1.count_ones() == 86);
  CHECK(d2.count_ones() == 86);
  CHECK_THROWS_AS(nongeometric_crossover(zeros, Genome(85), 0.1, rng), ShapeError);
}

TEST_CASE("non-geometric crossover leaves the Hamming segment") {
  Rng rng(2);
  auto hamming = [](const Genome& a, const Genome& b) {
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
  };
  int outside = 0;
  for (int t = 0; t < 10000; ++t) {
    const auto a = random_genome(86, rng), b = random_genome(86, rng);
    const auto [c1, c2] = nongeometric_crossover(a, b, 1.0 / 86, rng);
    const std::size_t d = hamming(a, b);
    for (const auto* c : {&c1, &c2}) {
      if (hamming(*c, a) + hamming(*c, b) > d) {
        ++outside;
        break;
      }
    }
  }
  CHECK(outside > 0);
}

TEST_CASE("uniform crossover stays inside the segment") {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const auto a = random_genome(40, rng), b = random_genome(40, rng);
    const auto [c1, c2] = uniform_crossover(a, b, rng);
    for (std::size_t i = 0; i < 40; ++i) {
      if (a[i] == b[i]) {
        CHECK(c1[i] == a[i]);
        CHECK(c2[i] == a[i]);
      } else {
        CHECK(c1[i] != c2[i]);
      }
    }
  }
}

TEST_CASE("decomposition weights") {
  CHECK(decomposition_weights(2, 5) == das_dennis_weights(2, 4));
  const auto w3 = decomposition_weights(3, 16);
  CHECK(w3.size() == 16);
  std::set<ObjectiveVector> unique(w3.begin(), w3.end());
  CHECK(unique.size() == 16);
  for (const auto& corner : std::vector<ObjectiveVector>{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}) CHECK(unique.count(corner) == 1);
}

TEST_CASE("NSGA-II tiny run returns a non-dominated set") {
  MoeaConfig cfg = MoeaConfig::defaults(MoeaKind::Nsga2);
  cfg.population_size = 4;
  cfg.iterations = 1;
  const auto ev = lotz_like(20);
  const auto r = nsga2_run(cfg, ev);
  CHECK_FALSE(r.aps.members.empty());
  CHECK(mutually_nondominated(r.aps));
}

TEST_CASE("NSGA-II is deterministic, counts its budget and keeps elites") {
  MoeaConfig cfg = MoeaConfig::defaults(MoeaKind::Nsga2);
  cfg.population_size = 12;
  cfg.iterations = 15;
  cfg.seed = 9;
  std::atomic<std::size_t> calls{0};
  const auto ev = ones_zeros(30, &calls);
  std::vector<ObjectiveVector> best_per_gen;
  const auto r1 = nsga2_run(cfg, ev, [&](int, std::span<const Genome>, std::span<const ObjectiveVector> objs) {
    ObjectiveVector best(2, 1e9);
    for (const auto& o : objs) {
      for (int k = 0; k < 2; ++k) best[static_cast<std::size_t>(k)] = std::min(best[static_cast<std::size_t>(k)], o[static_cast<std::size_t>(k)]);
    }
    best_per_gen.push_back(best);
  });
  CHECK(calls.load() == 12u * 16u);
  CHECK(r1.evaluations == 12u * 16u);
  const auto r2 = nsga2_run(cfg, ev);
  CHECK(same_aps(r1.aps, r2.aps));
  for (std::size_t g = 1; g < best_per_gen.size(); ++g) {
    CHECK(best_per_gen[g][0] <= best_per_gen[g - 1][0]);
    CHECK(best_per_gen[g][1] <= best_per_gen[g - 1][1]);
  }
  cfg.seed = 10;
  CHECK_FALSE(same_aps(r1.aps, nsga2_run(cfg, ev).aps));
}

TEST_CASE("NSGA-II spreads over the ones/zeros front") {
  MoeaConfig cfg = MoeaConfig::defaults(MoeaKind::Nsga2);
  const std::size_t n = 30;
  const auto ev = ones_zeros(n);
  const auto r = nsga2_run(cfg, ev);
  std::set<std::size_t> tradeoffs;
  for (const auto& m : r.aps.members) {
    CHECK(m.objectives[0] + m.objectives[1] == doctest::Approx(1.0));
    tradeoffs.insert(m.genome.count_ones());
  }
  CHECK(tradeoffs.size() >= 10);
}

TEST_CASE("EAGD archive is non-dominated, deterministic and within budget") {
  MoeaConfig cfg = MoeaConfig::defaults(MoeaKind::Eagd);
  cfg.population_size = 10;
  cfg.iterations = 12;
  cfg.seed = 4;
  std::atomic<std::size_t> calls{0};
  const auto ev = ones_zeros(24, &calls);
  const auto r = eagd_run(cfg, ev);
  CHECK(mutually_nondominated(r.aps));
  const std::size_t budget = 10u * 13u;
  CHECK(calls.load() + 10 >= budget);
  CHECK(calls.load() <= budget + 10);
  CHECK(same_aps(r.aps, eagd_run(cfg, ev).aps));
  CHECK(r.aps.members.size() <= 20);
}

TEST_CASE("EAGD reaches the NSGA-II hypervolume on the toy problems") {
  for (int which = 0; which < 2; ++which) {
    const auto ev = which == 0 ? ones_zeros(30) : lotz_like(30);
    auto n_cfg = MoeaConfig::defaults(MoeaKind::Nsga2);
    auto e_cfg = MoeaConfig::defaults(MoeaKind::Eagd);
    n_cfg.iterations = e_cfg.iterations = 100;
    const double hn = hv_of(nsga2_run(n_cfg, ev).aps);
    const double he = hv_of(eagd_run(e_cfg, ev).aps);
    CHECK(he >= 0.95 * hn);
  }
}

TEST_CASE("evaluator failures abort the run with the genome named") {
  MoeaConfig cfg = MoeaConfig::defaults(MoeaKind::Nsga2);
  cfg.population_size = 4;
  cfg.iterations = 2;
  FunctionEvaluator bad(2, 10, [](const Genome& g) -> ObjectiveVector {
    if (g.count_ones() > 3) throw std::runtime_error("boom");
    return {0, 0};
  });
  try {
    nsga2_run(cfg, bad);
    FAIL("expected RunError");
  } catch (const RunError& e) {
    CHECK(std::string(e.what()).find("boom") != std::string::npos);
    CHECK(std::string(e.what()).find("genome") != std::string::npos);
  }
  FunctionEvaluator wrong_arity(2, 10, [](const Genome&) { return ObjectiveVector{0}; });
  CHECK_THROWS_AS(eagd_run(cfg, wrong_arity), RunError);
}

TEST_CASE("config validation") {
  auto cfg = MoeaConfig::defaults(MoeaKind::Nsga2);
  CHECK(cfg.population_size == 50);
  CHECK(cfg.iterations == 300);
  CHECK(cfg.crossover_rate == 0.9);
  CHECK(cfg.nongeometric_probability == 0.8);
  CHECK(cfg.resolved_bitflip(86) == doctest::Approx(1.0 / 86));
  const auto e = MoeaConfig::defaults(MoeaKind::Eagd);
  CHECK(e.learning_generations == 8);
  CHECK(e.neighborhood_fraction == 0.10);
  cfg.crossover_rate = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = MoeaConfig::defaults(MoeaKind::Nsga2);
  cfg.population_size = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(moea_kind_from_string("NSGA-II") == MoeaKind::Nsga2);
  CHECK(moea_kind_from_string("EAGD") == MoeaKind::Eagd);
}
