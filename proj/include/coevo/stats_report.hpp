#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "coevo/experiment.hpp"
#include "coevo/moea_core.hpp"

namespace coevo {

/// rows = runs (blocks), columns = scenarios (treatments).
using HvMatrix = std::vector<std::vector<double>>;

struct FriedmanResult {
  double statistic = 0;
  double p_value = 1;
  std::vector<double> avg_ranks;  // rank 1 = highest HV
  std::size_t blocks = 0;
  std::size_t treatments = 0;
};

/// Average within-block ranks of each row (higher value -> rank 1, ties averaged).
std::vector<double> rank_block(std::span<const double> row);

/// Tie-corrected Friedman statistic with a chi-square(k-1) upper tail.
/// Throws std::invalid_argument for fewer than 2 rows/columns or ragged rows.
FriedmanResult friedman_test(const HvMatrix& m);

/// One-sided p of z = (R_j - R_control) / sqrt(k(k+1)/(6n)) for every
/// treatment; the control's own entry is 1.
std::vector<double> friedman_posthoc_p(const FriedmanResult& f, std::size_t control);

/// Hommel adjusted p-values, in the input order.
std::vector<double> hommel_apv(std::span<const double> raw_p);

struct ScenarioStat {
  std::string scenario;
  MeanSd hv;
  double avg_rank = 0;
  bool control = false;
  double p_value = 1;  // raw post-hoc p (1 for the control)
  double apv = 1;
  bool reject = false;
};

struct StatReport {
  FriedmanResult friedman;
  std::size_t control = 0;
  double alpha = 0.05;
  std::vector<ScenarioStat> scenarios;
};

/// Friedman omnibus test, control = best average rank (ties: smaller id),
/// then Hommel-adjusted one-sided comparisons against the control.
StatReport compare_scenarios(std::span<const std::string> ids, const HvMatrix& m, double alpha = 0.05);

/// Normalizes every run's points by the ideal/nadir of their union's
/// non-dominated set and fills ScenarioResult::hv_per_run. Returns Gamma*.
std::vector<ObjectiveVector> assign_hv_indicators(std::span<ScenarioResult> results, const ComparisonPoints& points,
                                                  double ref_coordinate = 1.1);

/// Blocks = runs where every scenario succeeded; throws when fewer than 2 remain.
HvMatrix hv_matrix(std::span<const ScenarioResult> results);

/// Index of the lower-median HV (ties by run order).
std::size_t median_index(std::span<const double> hv);
/// APS of the run with the lower-median HV. Throws EmptyDataError when no runs.
const ApproxParetoSet& median_front(const ScenarioResult& result);

struct SelectionRow {
  std::string scenario;
  ParetoMember member;
  double complexity = 0;
  HoldoutSummary holdout;
};

struct ReportInputs {
  std::string header_json;  // resolved config + seeds, embedded in every file
  StatReport stats;
  std::vector<std::string> scenario_ids;
  std::vector<std::vector<ObjectiveVector>> median_fronts;  // per scenario
  std::vector<std::string> objective_names;                // of the median-front points
  std::vector<SelectionRow> selections;
};

/// Writes summary.csv, median_front_<scenario>.csv and
/// selected_architecture.csv into `dir`; throws std::runtime_error when the
/// directory cannot be written.
void emit_report(const std::filesystem::path& dir, const ReportInputs& in);

}  // namespace coevo
