#include "coevo/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "coevo/moea_core.hpp"
#include "coevo/neural_model.hpp"
#include "coevo/oracles.hpp"
#include "coevo/seeding.hpp"

namespace coevo {

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

/// Points on the curve sum x_k^q = 1 for a random q: mutually non-dominated.
std::vector<ObjectiveVector> random_front(std::size_t m, std::size_t n, Rng& rng) {
  const double q = 0.5 + 1.5 * uniform01(rng);
  std::vector<ObjectiveVector> front;
  for (std::size_t i = 0; i < n; ++i) {
    ObjectiveVector p(m);
    double norm = 0;
    for (auto& v : p) {
      v = std::abs(standard_normal(rng)) + 1e-9;
      norm += std::pow(v, q);
    }
    for (auto& v : p) v /= std::pow(norm, 1.0 / q);
    front.push_back(p);
  }
  return front;
}

Genome index_genome(std::size_t i) {
  Genome g(86);
  for (std::size_t b = 0; b < 32; ++b) g.set(b, ((i >> b) & 1u) != 0);
  return g;
}

}  // namespace

CheckResult check_hypervolume(int fronts, std::size_t samples, double tolerance_se, std::uint64_t seed,
                              double perturbation) {
  Stopwatch sw;
  CheckResult r{"hypervolume vs Monte-Carlo", true, "", 0};
  Rng rng(mix_seed(seed, 0x4801));
  double worst_z = 0;
  int failures = 0;
  for (int f = 0; f < fronts; ++f) {
    const std::size_t m = 2 + static_cast<std::size_t>(f % 2);
    const std::size_t n = 1 + uniform_index(rng, 50);
    const auto front = random_front(m, n, rng);
    const std::vector<double> ref(m, 1.1);
    const double exact = hypervolume(front, ref) * (1.0 + perturbation);
    const auto mc = oracle::monte_carlo_hypervolume(front, ref, samples, mix_seed(seed, 0x4802 + f));
    const double z = std::abs(exact - mc.value) / std::max(mc.standard_error, 1e-12);
    worst_z = std::max(worst_z, z);
    if (z > tolerance_se) ++failures;
  }
  r.passed = failures == 0;
  r.detail = std::to_string(fronts) + " fronts, " + std::to_string(samples) + " samples each; worst |z| = " +
             fmt(worst_z) + " (limit " + fmt(tolerance_se) + "), " + std::to_string(failures) + " outside";
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_dominance(int instances, std::size_t max_points, std::uint64_t seed) {
  Stopwatch sw;
  CheckResult r{"dominance vs brute force", true, "", 0};
  Rng rng(mix_seed(seed, 0xd0d0));
  int sort_mismatch = 0, gamma_mismatch = 0;
  for (int t = 0; t < instances; ++t) {
    const std::size_t m = 2 + uniform_index(rng, 2);
    const std::size_t n = 1 + uniform_index(rng, max_points);
    const double grid = 3.0 + static_cast<double>(uniform_index(rng, 20));
    std::vector<ObjectiveVector> pts(n, ObjectiveVector(m));
    for (auto& p : pts) {
      for (auto& v : p) v = std::floor(uniform01(rng) * grid);
    }
    if (nondominated_sort(pts) != oracle::brute_force_fronts(pts)) ++sort_mismatch;

    std::vector<ApproxParetoSet> sets(3);
    std::vector<ObjectiveVector> union_pts;
    std::vector<std::size_t> union_owner;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t copies = 1 + (uniform01(rng) < 0.2 ? 1 : 0);
      for (std::size_t c = 0; c < copies; ++c) {
        sets[uniform_index(rng, 3)].members.push_back({index_genome(i), {}, pts[i]});
        union_pts.push_back(pts[i]);
        union_owner.push_back(i);
      }
    }
    std::set<std::size_t> expected;
    for (auto k : oracle::brute_force_nondominated(union_pts)) expected.insert(union_owner[k]);
    std::set<Genome> got;
    std::size_t got_count = 0;
    for (const auto& mbr : estimate_true_pareto(sets)) {
      got.insert(mbr.genome);
      ++got_count;
    }
    std::set<Genome> want;
    for (auto i : expected) want.insert(index_genome(i));
    if (got != want || got_count != want.size()) ++gamma_mismatch;
  }
  r.passed = sort_mismatch == 0 && gamma_mismatch == 0;
  r.detail = std::to_string(instances) + " instances (<= " + std::to_string(max_points) +
             " points); sorting mismatches " + std::to_string(sort_mismatch) + ", true-front mismatches " +
             std::to_string(gamma_mismatch);
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_gradients(int architectures, double tolerance, std::uint64_t seed) {
  Stopwatch sw;
  CheckResult r{"backprop vs finite differences", true, "", 0};
  Rng rng(mix_seed(seed, 0x96ad));
  double worst = 0, worst_loss = 0;
  for (int a = 0; a < architectures; ++a) {
    DecodedArchitecture arch;
    const int f = 1 + static_cast<int>(uniform_index(rng, 5));
    for (int i = 0; i < f; ++i) arch.features.push_back(i);
    arch.layers.resize(2);
    arch.layers[0] = {1 + static_cast<int>(uniform_index(rng, 6)), bernoulli(rng, 0.5) ? Activation::Logsig : Activation::Tansig};
    arch.layers[1] = {static_cast<int>(uniform_index(rng, 6)), bernoulli(rng, 0.5) ? Activation::Logsig : Activation::Tansig};
    const Eigen::Index n = 12;
    Eigen::MatrixXd x(n, f);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < f; ++j) x(i, j) = standard_normal(rng);
      y(i) = i < 2 ? static_cast<double>(i) : (bernoulli(rng, 0.4) ? 1.0 : 0.0);
    }
    WeightSet w = init_weights(arch, rng());
    for (auto& b : w.biases) {
      for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = 0.5 * standard_normal(rng);
    }
    const auto cw = class_weights(y);
    const auto lg = loss_and_gradient(arch, w, x, y, cw);
    const double loss_ref = oracle::network_loss(arch, w, x, y, cw);
    worst_loss = std::max(worst_loss, std::abs(lg.loss - loss_ref) / std::max(std::abs(loss_ref), 1e-12));
    const auto fd = oracle::finite_difference_gradient(arch, w, x, y, cw);
    worst = std::max(worst, oracle::max_relative_error(lg.gradient, fd));
  }
  r.passed = worst < tolerance && worst_loss < 1e-10;
  r.detail = std::to_string(architectures) + " architectures; worst gradient relative error " + fmt(worst) +
             " (limit " + fmt(tolerance) + "), worst loss relative error " + fmt(worst_loss);
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_friedman(const FriedmanCheckSpec& spec, std::uint64_t seed) {
  Stopwatch sw;
  CheckResult r{"Friedman vs permutation", true, "", 0};
  Rng rng(mix_seed(seed, 0xf21e));
  double worst = 0, worst_stat = 0;
  std::ostringstream cases;
  for (int t = 0; t < spec.matrices; ++t) {
    const std::size_t k = spec.min_treatments + static_cast<std::size_t>(t) % (spec.max_treatments - spec.min_treatments + 1);
    const std::size_t n = spec.min_blocks + uniform_index(rng, spec.max_blocks - spec.min_blocks + 1);
    std::vector<double> effect(k);
    for (auto& e : effect) e = 1.2 * uniform01(rng);
    HvMatrix m(n, std::vector<double>(k));
    for (auto& row : m) {
      for (std::size_t j = 0; j < k; ++j) {
        row[j] = standard_normal(rng) + effect[j];
        if (spec.tie_grid > 0) row[j] = std::round(spec.tie_grid * row[j]) / spec.tie_grid;
      }
    }
    const auto f = friedman_test(m);
    const double ref_stat = oracle::friedman_statistic(m);
    worst_stat = std::max(worst_stat, std::abs(f.statistic - ref_stat) / std::max(1.0, std::abs(ref_stat)));
    const double p_perm = oracle::permutation_friedman_p(m, spec.permutations, mix_seed(seed, 0xf21f + t));
    const double diff = std::abs(f.p_value - p_perm);
    worst = std::max(worst, diff);
    cases << (t ? "; " : "") << "k=" << k << " n=" << n << " chi2 " << fmt(f.p_value, 3) << " perm " << fmt(p_perm, 3);
  }
  r.passed = worst <= spec.tolerance && worst_stat < 1e-12;
  r.detail = std::to_string(spec.matrices) + " matrices, " + std::to_string(spec.permutations) +
             " permutations; statistic error " + fmt(worst_stat) + "; worst |dp| = " + fmt(worst, 3) + " (limit " +
             fmt(spec.tolerance, 3) + ") [" + cases.str() + "]";
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_hommel(std::uint64_t seed) {
  Stopwatch sw;
  CheckResult r{"Hommel adjusted p-values", true, "", 0};
  struct Case {
    std::vector<double> raw, apv;
  };
  const std::vector<Case> worked = {
      {{0.01, 0.02, 0.04}, {0.03, 0.04, 0.04}},
      {{0.01, 0.04, 0.05}, {0.03, 0.05, 0.05}},
      {{0.02, 0.03, 0.5}, {0.045, 0.06, 0.5}},
      {{0.5, 0.02, 0.03}, {0.5, 0.045, 0.06}},
  };
  double worst = 0;
  for (const auto& c : worked) {
    const auto got = hommel_apv(c.raw);
    for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - c.apv[i]));
  }
  Rng rng(mix_seed(seed, 0x4011));
  double worst_closed = 0;
  bool bounds_ok = true;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + uniform_index(rng, 6);
    std::vector<double> p(n);
    for (auto& v : p) v = std::pow(uniform01(rng), 2.0);
    const auto got = hommel_apv(p);
    const auto ref = oracle::closed_testing_hommel(p);
    for (std::size_t i = 0; i < n; ++i) {
      worst_closed = std::max(worst_closed, std::abs(got[i] - ref[i]));
      bounds_ok = bounds_ok && got[i] >= p[i] - 1e-15 && got[i] <= std::min(1.0, static_cast<double>(n) * p[i]) + 1e-15;
    }
  }
  r.passed = worst < 1e-12 && worst_closed < 1e-12 && bounds_ok;
  r.detail = "hand-worked cases max error " + fmt(worst) + "; 200 random cases vs closed testing max error " +
             fmt(worst_closed) + "; raw <= APV <= Bonferroni " + (bounds_ok ? "holds" : "violated");
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_metric_identities() {
  Stopwatch sw;
  CheckResult r{"metric identities", true, "", 0};
  const std::vector<int> truth = {1, 0, 0, 1, 0, 0, 0, 1, 0, 0};
  const std::vector<int> mixed = {1, 1, 0, 0, 0, 1, 0, 1, 0, 0};
  const std::vector<int> majority(truth.size(), 0);
  const auto a = score_predictions(truth, mixed);
  const auto b = score_predictions(truth, majority);
  const auto c = score_predictions(truth, truth);
  const bool sum_ok = a.balanced_error + a.balanced_accuracy == 1.0 && b.balanced_error + b.balanced_accuracy == 1.0 &&
                      c.balanced_error + c.balanced_accuracy == 1.0;
  r.passed = sum_ok && b.mcc == 0.0 && c.mcc == 1.0;
  r.detail = std::string("BE + BA = 1 ") + (sum_ok ? "exact" : "broken") + "; MCC majority-bias = " + fmt(b.mcc) +
             "; MCC perfect = " + fmt(c.mcc);
  r.seconds = sw.seconds();
  return r;
}

bool SelftestReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string format_check(const CheckResult& r) {
  std::ostringstream os;
  os << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << std::fixed << std::setprecision(2) << r.seconds
     << " s): " << r.detail;
  return os.str();
}

SelftestReport run_selftest(const SelftestOptions& opts) {
  SelftestReport rep;
  auto add = [&](CheckResult c) {
    if (opts.out) *opts.out << format_check(c) << '\n' << std::flush;
    rep.checks.push_back(std::move(c));
  };
  add(check_hypervolume(60, 200000, 4.0, opts.seed, opts.hv_perturbation));
  add(check_dominance(100, 200, opts.seed));
  add(check_gradients(20, 1e-4, opts.seed));
  add(check_friedman(FriedmanCheckSpec{}, opts.seed));
  add(check_hommel(opts.seed));
  add(check_metric_identities());
  return rep;
}

}  // namespace coevo
