#include "coevo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "coevo/errors.hpp"

namespace coevo {

std::vector<std::string> LearningEnvironment::objective_names() const {
  if (kind == EnvironmentKind::Full) return {"E_test", "C"};
  return {"E_test", "C", "E_pr"};
}

FeatureDataset LearningEnvironment::training_set(const DatasetSplit& split) const {
  if (kind == EnvironmentKind::Full) return FeatureDataset::concat(split.pre_crisis(), split.crisis_train());
  return split.crisis_train();
}

LearningEnvironment LearningEnvironment::from_string(std::string_view s) {
  std::string up(s);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "LF" || up == "FULL") return full();
  if (up == "LS" || up == "SPLIT") return split();
  throw std::invalid_argument("unknown learning environment '" + std::string(s) + "'");
}

namespace {

void require_both_classes(const FeatureDataset& ds, const std::string& what) {
  if (ds.empty() || ds.count_label(0) == 0 || ds.count_label(1) == 0) {
    throw EnvironmentError(what + " must contain both classes (rows: " + std::to_string(ds.rows()) + ")");
  }
}

}  // namespace

ArchitectureEvaluator::ArchitectureEvaluator(LearningEnvironment env, const DatasetSplit& split, EvaluatorOptions opts)
    : env_(env), split_(&split), opts_(std::move(opts)) {
  if (static_cast<int>(split.crisis_train().feature_count()) != opts_.space.feature_count) {
    throw ShapeError("dataset has " + std::to_string(split.crisis_train().feature_count()) +
                     " features but the search space expects " + std::to_string(opts_.space.feature_count));
  }
  const FeatureDataset train_rows = env_.training_set(split);
  require_both_classes(train_rows, std::string(env_.short_name()) + " training partition");
  if (split.crisis_test().empty()) throw EnvironmentError("crisis test partition is empty");
  standardization_ = fit_standardization(train_rows);
  train_ = to_matrix(apply_standardization(standardization_, train_rows));
  test_ = to_matrix(apply_standardization(standardization_, split.crisis_test()));
  if (env_.kind == EnvironmentKind::Split) pre_ = to_matrix(apply_standardization(standardization_, split.pre_crisis()));
}

std::uint64_t ArchitectureEvaluator::training_seed(const Genome& genome) const {
  return mix_seed(opts_.eval_seed, canonical(genome, opts_.space).hash());
}

WeightSet ArchitectureEvaluator::trained_weights(const Genome& genome) const {
  const Genome key = canonical(genome, opts_.space);
  const DecodedArchitecture arch = decode(key, opts_.space);
  TrainConfig cfg = opts_.train;
  cfg.seed = mix_seed(opts_.eval_seed, key.hash());
  WeightSet w = train(arch, init_weights(arch, cfg.seed), project(train_, arch.features), cfg);
  std::lock_guard lock(mutex_);
  ++trainings_;
  return w;
}

ObjectiveVector ArchitectureEvaluator::evaluate(const Genome& genome) const {
  if (genome.size() != genome_length()) throw EncodingError("genome has wrong length");
  const Genome key = canonical(genome, opts_.space);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  const DecodedArchitecture arch = decode(key, opts_.space);
  const WeightSet w = trained_weights(key);
  ObjectiveVector f{coevo::evaluate(arch, w, project(test_, arch.features)).balanced_error,
                    complexity(arch, opts_.space, opts_.complexity_mode)};
  if (env_.kind == EnvironmentKind::Split) f.push_back(coevo::evaluate(arch, w, project(pre_, arch.features)).balanced_error);
  std::lock_guard lock(mutex_);
  cache_.emplace(key, f);
  return f;
}

ObjectiveVector ArchitectureEvaluator::holdout_objectives(const Genome& genome) const {
  const Genome key = canonical(genome, opts_.space);
  {
    std::lock_guard lock(mutex_);
    if (auto it = hold_cache_.find(key); it != hold_cache_.end()) return it->second;
    if (!hold_) hold_ = std::make_unique<LabeledMatrix>(to_matrix(apply_standardization(standardization_, split_->hold_out())));
  }
  const DecodedArchitecture arch = decode(key, opts_.space);
  const WeightSet w = trained_weights(key);
  ObjectiveVector f{coevo::evaluate(arch, w, project(*hold_, arch.features)).balanced_error,
                    complexity(arch, opts_.space, opts_.complexity_mode)};
  std::lock_guard lock(mutex_);
  hold_cache_.emplace(key, f);
  return f;
}

std::size_t ArchitectureEvaluator::trainings() const {
  std::lock_guard lock(mutex_);
  return trainings_;
}

std::size_t ArchitectureEvaluator::cache_size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

std::shared_ptr<ArchitectureEvaluator> make_evaluator(LearningEnvironment env, const DatasetSplit& split,
                                                      const EvaluatorOptions& opts) {
  return std::make_shared<ArchitectureEvaluator>(env, split, opts);
}

std::string ScenarioSpec::id() const {
  return std::string(environment.short_name()) + "+" + std::string(to_string(moea));
}

std::pair<LearningEnvironment, MoeaKind> ScenarioSpec::parse_id(std::string_view id) {
  const auto plus = id.find('+');
  if (plus == std::string_view::npos) throw std::invalid_argument("scenario id must look like LS+EAGD");
  return {LearningEnvironment::from_string(id.substr(0, plus)), moea_kind_from_string(id.substr(plus + 1))};
}

std::vector<ScenarioSpec> enumerate_scenarios(const std::string& timeline_id, int n_runs, const MoeaConfig& nsga2,
                                              const MoeaConfig& eagd, std::uint64_t base_seed) {
  std::vector<ScenarioSpec> out;
  for (auto env : {LearningEnvironment::full(), LearningEnvironment::split()}) {
    out.push_back({timeline_id, env, MoeaKind::Nsga2, n_runs, nsga2, base_seed});
    out.push_back({timeline_id, env, MoeaKind::Eagd, n_runs, eagd, base_seed});
  }
  return out;
}

bool ScenarioResult::complete() const {
  return std::all_of(runs.begin(), runs.end(), [](const RunRecord& r) { return r.ok; }) &&
         static_cast<int>(runs.size()) == spec.n_runs;
}

ScenarioResult run_scenario(const ScenarioSpec& spec, const ObjectiveEvaluator& evaluator, int parallel,
                            const RunCallback& on_run) {
  if (evaluator.objective_count() != spec.environment.objective_count()) {
    throw std::invalid_argument("scenario " + spec.id() + " expects " +
                                std::to_string(spec.environment.objective_count()) + " objectives, evaluator emits " +
                                std::to_string(evaluator.objective_count()));
  }
  if (spec.n_runs < 1) throw std::invalid_argument("n_runs must be at least 1");
  spec.moea_config.validate();

  ScenarioResult result;
  result.spec = spec;
  result.aps_per_run.resize(spec.n_runs);
  result.runs.resize(spec.n_runs);
  const auto t0 = std::chrono::steady_clock::now();
  std::atomic<int> next{0};
  std::mutex callback_mutex;

  auto worker = [&] {
    for (int r = next++; r < spec.n_runs; r = next++) {
      RunRecord rec;
      rec.run = r;
      rec.seed = spec.base_seed + static_cast<std::uint64_t>(r);
      MoeaConfig cfg = spec.moea_config;
      cfg.seed = rec.seed;
      ApproxParetoSet aps;
      const auto start = std::chrono::steady_clock::now();
      try {
        MoeaResult res = run_moea(spec.moea, cfg, evaluator);
        aps = std::move(res.aps);
        rec.evaluations = res.evaluations;
        rec.log = std::move(res.log);
        rec.ok = true;
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      aps.scenario_id = spec.id();
      aps.run_id = r;
      aps.seed = rec.seed;
      if (on_run) {
        std::lock_guard lock(callback_mutex);
        on_run(spec, rec, aps);
      }
      result.aps_per_run[r] = std::move(aps);
      result.runs[r] = std::move(rec);
    }
  };

  const int threads = std::clamp(parallel, 1, spec.n_runs);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

ParetoMember posteriori_select(std::span<const ParetoMember> members) {
  if (members.empty()) throw std::invalid_argument("posteriori_select needs at least one member");
  const auto front = nondominated_members(members);
  std::vector<ObjectiveVector> pts;
  for (const auto& m : front) pts.push_back(m.objectives);
  const auto bounds = NormalizationBounds::of(pts);
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < front.size(); ++i) {
    const auto p = bounds.normalize(pts[i]);
    double d = 0;
    for (double v : p) d += v * v;
    d = std::sqrt(d);
    bool better = d < best_d - 1e-12;
    if (!better && std::abs(d - best_d) <= 1e-12) {
      const double ci = front[i].objectives.size() > 1 ? front[i].objectives[1] : 0.0;
      const double cb = front[best].objectives.size() > 1 ? front[best].objectives[1] : 0.0;
      better = ci < cb || (ci == cb && front[i].genome < front[best].genome);
    }
    if (better) {
      best = i;
      best_d = std::min(best_d, d);
    }
  }
  return front[best];
}

ParetoMember posteriori_select(std::span<const ApproxParetoSet> collection) {
  std::vector<ParetoMember> all;
  for (const auto& aps : collection) all.insert(all.end(), aps.members.begin(), aps.members.end());
  return posteriori_select(std::span<const ParetoMember>(all));
}

MeanSd mean_sd(std::span<const double> xs) {
  MeanSd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return r;
}

HoldoutSummary holdout_evaluate(const DecodedArchitecture& arch, const DatasetSplit& split, LearningEnvironment env,
                                const TrainConfig& train_cfg, int cycles, std::uint64_t seed) {
  if (cycles < 1) throw std::invalid_argument("cycles must be at least 1");
  const FeatureDataset rows = env.training_set(split);
  require_both_classes(rows, std::string(env.short_name()) + " training partition");
  const auto params = fit_standardization(rows);
  const LabeledMatrix train_m = project(apply_standardization(params, rows), arch.features);
  const LabeledMatrix hold_m = project(apply_standardization(params, split.hold_out()), arch.features);

  HoldoutSummary s;
  s.cycles = cycles;
  std::vector<double> oa, ba, be, mcc;
  for (int c = 0; c < cycles; ++c) {
    TrainConfig cfg = train_cfg;
    cfg.seed = mix_seed(seed, static_cast<std::uint64_t>(c));
    const WeightSet w = train(arch, init_weights(arch, cfg.seed), train_m, cfg);
    const EvalReport r = evaluate(arch, w, hold_m);
    s.reports.push_back(r);
    oa.push_back(r.overall_accuracy);
    ba.push_back(r.balanced_accuracy);
    be.push_back(r.balanced_error);
    mcc.push_back(r.mcc);
  }
  s.overall_accuracy = mean_sd(oa);
  s.balanced_accuracy = mean_sd(ba);
  s.balanced_error = mean_sd(be);
  s.mcc = mean_sd(mcc);
  return s;
}

ComparisonPoints holdout_points(std::span<const ScenarioResult> results,
                                const std::function<const ArchitectureEvaluator&(EnvironmentKind)>& evaluator_for) {
  ComparisonPoints out;
  for (const auto& sr : results) {
    const ArchitectureEvaluator& ev = evaluator_for(sr.spec.environment.kind);
    auto& per_run = out.emplace_back();
    for (const auto& aps : sr.aps_per_run) {
      auto& pts = per_run.emplace_back();
      for (const auto& m : aps.members) pts.push_back(ev.holdout_objectives(m.genome));
    }
  }
  return out;
}

OhlcvSeries SyntheticBenchmark::series(std::uint64_t seed) const { return synth_regime_series(pre, post, lengths, seed); }

TimelineSpec SyntheticBenchmark::timeline(const OhlcvSeries& s) const {
  if (s.size() != lengths.pre + lengths.post) throw std::invalid_argument("series does not match benchmark lengths");
  const std::size_t cr0 = lengths.pre;
  const std::size_t test0 = cr0 + static_cast<std::size_t>(std::llround(train_fraction * lengths.post));
  const std::size_t hold0 = test0 + static_cast<std::size_t>(std::llround(test_fraction * lengths.post));
  if (!(cr0 < test0 && test0 < hold0 && hold0 < s.size())) throw std::invalid_argument("benchmark fractions leave an empty partition");
  TimelineSpec spec;
  spec.id = "synthetic";
  spec.pre_crisis = {s[0].date, s[cr0 - 1].date};
  spec.crisis_train = {s[cr0].date, s[test0 - 1].date};
  spec.crisis_test = {s[test0].date, s[hold0 - 1].date};
  spec.hold_out = {s[hold0].date, s[s.size() - 1].date};
  return spec;
}

}  // namespace coevo
