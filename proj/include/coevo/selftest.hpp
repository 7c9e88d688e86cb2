#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "coevo/stats_report.hpp"

namespace coevo {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

/// Sweep hypervolume vs Monte-Carlo on random mutually non-dominated fronts
/// (m in {2, 3}, up to 50 points). `perturbation` scales every computed HV by
/// (1 + perturbation) to prove the check can fail.
CheckResult check_hypervolume(int fronts, std::size_t samples, double tolerance_se, std::uint64_t seed,
                              double perturbation = 0);

/// Non-dominated sorting and true-front estimation vs brute force.
CheckResult check_dominance(int instances, std::size_t max_points, std::uint64_t seed);

/// Backprop vs central differences on random small networks.
CheckResult check_gradients(int architectures, double tolerance, std::uint64_t seed);

struct FriedmanCheckSpec {
  int matrices = 6;
  std::size_t min_blocks = 40, max_blocks = 40;
  std::size_t min_treatments = 3, max_treatments = 4;
  std::size_t permutations = 40000;
  double tolerance = 0.01;
  double tie_grid = 0;  // > 0 rounds entries to multiples of 1/tie_grid
};

/// Friedman statistic vs the textbook formula (exact), and the chi-square p
/// vs a within-block permutation p (within `tolerance`), on random matrices
/// with a planted treatment effect.
CheckResult check_friedman(const FriedmanCheckSpec& spec, std::uint64_t seed);

/// Hommel APVs vs hand-worked three-hypothesis values and closed testing.
CheckResult check_hommel(std::uint64_t seed);

/// Exact identities between balanced error/accuracy and MCC.
CheckResult check_metric_identities();

struct SelftestOptions {
  double hv_perturbation = 0;
  std::uint64_t seed = 2024;
  std::ostream* out = nullptr;  // one line per check
};

struct SelftestReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

/// Oracle suite behind `coevo selftest`.
SelftestReport run_selftest(const SelftestOptions& opts);

/// "PASS name (1.23 s): detail"
std::string format_check(const CheckResult& r);

}  // namespace coevo
