#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "coevo/architecture.hpp"
#include "coevo/market_data.hpp"
#include "coevo/moea_core.hpp"
#include "coevo/neural_model.hpp"
#include "coevo/search_algorithms.hpp"

namespace coevo {

enum class EnvironmentKind { Full, Split };

/// FULL trains on D_pr + D_cr and scores (E_test, C); SPLIT trains on D_cr
/// and scores (E_test, C, E_pr).
struct LearningEnvironment {
  EnvironmentKind kind = EnvironmentKind::Full;

  int objective_count() const { return kind == EnvironmentKind::Full ? 2 : 3; }
  std::string_view short_name() const { return kind == EnvironmentKind::Full ? "LF" : "LS"; }
  std::vector<std::string> objective_names() const;
  /// Rows used for weight estimation (never includes D_hold).
  FeatureDataset training_set(const DatasetSplit& split) const;

  static LearningEnvironment full() { return {EnvironmentKind::Full}; }
  static LearningEnvironment split() { return {EnvironmentKind::Split}; }
  static LearningEnvironment from_string(std::string_view s);
};

struct EvaluatorOptions {
  TrainConfig train;
  SearchSpace space;
  ComplexityMode complexity_mode = ComplexityMode::Literal;
  std::uint64_t eval_seed = 1;
};

/// Trains one network per distinct architecture and scores it. Results are
/// memoized by canonical genome, so every genome decoding to the same
/// architecture shares one training seed and one objective vector.
class ArchitectureEvaluator : public ObjectiveEvaluator {
 public:
  /// Throws EnvironmentError when the training partition lacks a class.
  ArchitectureEvaluator(LearningEnvironment env, const DatasetSplit& split, EvaluatorOptions opts);

  int objective_count() const override { return env_.objective_count(); }
  std::size_t genome_length() const override { return static_cast<std::size_t>(opts_.space.genome_length()); }
  ObjectiveVector evaluate(const Genome& genome) const override;
  DecodedArchitecture describe(const Genome& genome) const override { return decode(genome, opts_.space); }

  const LearningEnvironment& environment() const { return env_; }
  const EvaluatorOptions& options() const { return opts_; }
  std::size_t training_rows() const { return train_.rows(); }
  std::uint64_t training_seed(const Genome& genome) const;
  const StandardizationParams& standardization() const { return standardization_; }

  /// Network trained exactly as during search for this genome.
  WeightSet trained_weights(const Genome& genome) const;
  /// (E_hold, C) of the search-time network. Reads D_hold; report stage only.
  ObjectiveVector holdout_objectives(const Genome& genome) const;

  std::size_t trainings() const;
  std::size_t cache_size() const;

 private:
  LearningEnvironment env_;
  const DatasetSplit* split_;
  EvaluatorOptions opts_;
  StandardizationParams standardization_;
  LabeledMatrix train_, test_, pre_;
  mutable std::unique_ptr<LabeledMatrix> hold_;
  mutable std::mutex mutex_;
  mutable std::map<Genome, ObjectiveVector> cache_;
  mutable std::map<Genome, ObjectiveVector> hold_cache_;
  mutable std::size_t trainings_ = 0;
};

std::shared_ptr<ArchitectureEvaluator> make_evaluator(LearningEnvironment env, const DatasetSplit& split,
                                                      const EvaluatorOptions& opts);

struct ScenarioSpec {
  std::string timeline_id;
  LearningEnvironment environment;
  MoeaKind moea = MoeaKind::Nsga2;
  int n_runs = 40;
  MoeaConfig moea_config;  // seed field is ignored; runs use base_seed + run
  std::uint64_t base_seed = 1;

  /// "LF+NSGA2", "LS+EAGD", ...
  std::string id() const;
  static std::pair<LearningEnvironment, MoeaKind> parse_id(std::string_view id);
};

/// LF+NSGA2, LF+EAGD, LS+NSGA2, LS+EAGD for one timeline.
std::vector<ScenarioSpec> enumerate_scenarios(const std::string& timeline_id, int n_runs,
                                              const MoeaConfig& nsga2, const MoeaConfig& eagd,
                                              std::uint64_t base_seed);

struct RunRecord {
  int run = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::size_t evaluations = 0;
  double seconds = 0;
  std::vector<GenerationStats> log;
};

struct ScenarioResult {
  ScenarioSpec spec;
  std::vector<ApproxParetoSet> aps_per_run;  // one per run; failed runs hold an empty set
  std::vector<double> hv_per_run;
  std::vector<RunRecord> runs;
  double wall_seconds = 0;

  bool complete() const;
};

using RunCallback = std::function<void(const ScenarioSpec&, const RunRecord&, const ApproxParetoSet&)>;

/// Runs spec.n_runs independent MOEA runs (seed base_seed + run) on up to
/// `parallel` worker threads. A failing run is recorded and the rest go on.
/// Throws std::invalid_argument when the evaluator arity does not match.
ScenarioResult run_scenario(const ScenarioSpec& spec, const ObjectiveEvaluator& evaluator, int parallel = 1,
                            const RunCallback& on_run = {});

/// Knee of the union's non-dominated set: minimal distance to the origin
/// after normalizing by that set's ideal and nadir. Ties go to the lower
/// complexity (objective 1), then the smaller genome.
ParetoMember posteriori_select(std::span<const ApproxParetoSet> collection);
ParetoMember posteriori_select(std::span<const ParetoMember> members);

struct MeanSd {
  double mean = 0;
  double sd = 0;  // sample s.d.; 0 for a single value
};
MeanSd mean_sd(std::span<const double> xs);

struct HoldoutSummary {
  int cycles = 0;
  MeanSd overall_accuracy, balanced_accuracy, balanced_error, mcc;
  std::vector<EvalReport> reports;
};

/// Trains `cycles` networks (seeds derived from `seed`) on the environment's
/// training rows, standardized on those rows, and scores each on D_hold.
HoldoutSummary holdout_evaluate(const DecodedArchitecture& arch, const DatasetSplit& split, LearningEnvironment env,
                                const TrainConfig& train, int cycles, std::uint64_t seed);

/// Member objectives re-expressed as (E_hold, C) so both environments are
/// compared in one space. Indexed [scenario][run][member].
using ComparisonPoints = std::vector<std::vector<std::vector<ObjectiveVector>>>;
ComparisonPoints holdout_points(std::span<const ScenarioResult> results,
                                const std::function<const ArchitectureEvaluator&(EnvironmentKind)>& evaluator_for);

/// Regime-shift benchmark: the autocorrelation of daily returns changes sign
/// at the boundary along with drift and volatility.
struct SyntheticBenchmark {
  RegimeParams pre{0.001, 0.010, 0.4};
  RegimeParams post{-0.001, 0.015, -0.4};
  RegimeLengths lengths{300, 400};
  double train_fraction = 0.5;  // of the post-shift days, then test and hold-out share the rest
  double test_fraction = 0.25;

  OhlcvSeries series(std::uint64_t seed) const;
  /// D_pr = pre-shift days; the post-shift days are cut into D_cr, D_test, D_hold in order.
  TimelineSpec timeline(const OhlcvSeries& series) const;
};

}  // namespace coevo
