#include "coevo/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <regex>

#include "coevo/artifacts.hpp"
#include "coevo/errors.hpp"
#include "coevo/indicators.hpp"
#include "coevo/stats_report.hpp"

namespace coevo {

using nlohmann::json;
namespace fs = std::filesystem;

CommandContext CommandContext::build(const std::optional<fs::path>& config_file, bool desk,
                                     const std::vector<std::string>& overrides, const fs::path& out) {
  CommandContext ctx;
  ctx.resolved = default_config_json();
  if (config_file) merge_config(ctx.resolved, load_json_file(*config_file));
  if (desk) merge_config(ctx.resolved, desk_patch());
  for (const auto& o : overrides) apply_override(ctx.resolved, o);
  if (const char* env = std::getenv("COEVO_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
      ctx.resolved["seed"] = v;
    } catch (const std::exception&) {
      throw UsageError(std::string("COEVO_SEED must be a non-negative integer, got '") + env + "'");
    }
  }
  ctx.config = parse_config(ctx.resolved);
  ctx.out = out;
  return ctx;
}

json CommandContext::provenance() const {
  return {{"tool", "coevo"},
          {"config", resolved},
          {"seeds",
           {{"base", config.seed}, {"eval", config.eval_seed()}, {"synthetic", config.synthetic_seed}}}};
}

void CommandContext::say(const std::string& msg) const {
  if (log && verbosity > 0) *log << msg << std::endl;
}

std::string scenario_dir_name(const std::string& scenario_id) {
  std::string s = scenario_id;
  std::replace(s.begin(), s.end(), '+', '_');
  return s;
}

namespace {

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

void write_json(const fs::path& p, const json& j) {
  auto out = open_out(p);
  out << j.dump(2) << '\n';
}

json range_json(const DateRange& r) { return json::array({r.first.iso(), r.last.iso()}); }

json timeline_json(const TimelineSpec& t) {
  return {{"id", t.id},
          {"pre_crisis", range_json(t.pre_crisis)},
          {"crisis_train", range_json(t.crisis_train)},
          {"crisis_test", range_json(t.crisis_test)},
          {"hold_out", range_json(t.hold_out)}};
}

TimelineSpec timeline_from_json(const json& j) {
  auto r = [&](const char* k) { return DateRange{Date::parse(j.at(k)[0].get<std::string>()), Date::parse(j.at(k)[1].get<std::string>())}; };
  return {j.at("id").get<std::string>(), r("pre_crisis"), r("crisis_train"), r("crisis_test"), r("hold_out")};
}

TimelineSpec configured_timeline(const ExperimentConfig& c) {
  if (c.custom_timeline) return *c.custom_timeline;
  if (c.timeline == "timeline1") return TimelineSpec::timeline1();
  if (c.timeline == "timeline2") return TimelineSpec::timeline2();
  throw UsageError("timeline 'synthetic' needs synthetic data (--synthetic or data.synthetic.enabled=true)");
}

}  // namespace

IngestResult cmd_ingest(const CommandContext& ctx, const std::optional<fs::path>& input) {
  const auto& c = ctx.config;
  OhlcvSeries series;
  TimelineSpec timeline;
  if (c.synthetic) {
    ctx.say("generating synthetic regime-shift series (seed " + std::to_string(c.synthetic_seed) + ")");
    series = c.benchmark.series(c.synthetic_seed);
    timeline = c.custom_timeline ? *c.custom_timeline : c.benchmark.timeline(series);
    auto out = open_out(ctx.out / "ohlcv.csv");
    write_ohlcv_csv(out, series);
  } else {
    fs::path path = input ? *input : fs::path(c.ohlcv_path);
    if (path.empty()) throw UsageError("ingest needs --input, data.ohlcv or --synthetic");
    series = load_ohlcv(path);
    timeline = configured_timeline(c);
  }
  const FeatureDataset ds = compute_features(series);
  const DatasetSplit split = segment_timeline(ds, timeline);

  IngestResult res;
  res.features_csv = ctx.out / "features.csv";
  res.manifest = ctx.out / "ingest_manifest.json";
  {
    auto out = open_out(res.features_csv);
    out << "# " << ctx.provenance().dump() << '\n';
    ds.write_csv(out);
  }
  res.rows[0] = split.pre_crisis().rows();
  res.rows[1] = split.crisis_train().rows();
  res.rows[2] = split.crisis_test().rows();
  res.rows[3] = split.hold_out_size();
  write_json(res.manifest, {{"provenance", ctx.provenance()},
                            {"source", c.synthetic ? "synthetic" : (input ? input->string() : c.ohlcv_path)},
                            {"bars", series.size()},
                            {"feature_rows", ds.rows()},
                            {"feature_count", ds.feature_count()},
                            {"timeline", timeline_json(timeline)},
                            {"partitions",
                             {{"pre_crisis", res.rows[0]},
                              {"crisis_train", res.rows[1]},
                              {"crisis_test", res.rows[2]},
                              {"hold_out", res.rows[3]}}}});
  ctx.say("ingested " + std::to_string(ds.rows()) + " rows: pre_crisis " + std::to_string(res.rows[0]) +
          ", crisis_train " + std::to_string(res.rows[1]) + ", crisis_test " + std::to_string(res.rows[2]) +
          ", hold_out " + std::to_string(res.rows[3]));
  return res;
}

fs::path cmd_features(const CommandContext& ctx, const std::optional<fs::path>& input) {
  const auto& reg = IndicatorRegistry::default_registry();
  if (!input) {
    const fs::path p = ctx.out / "feature_registry.csv";
    auto out = open_out(p);
    out << "# " << ctx.provenance().dump() << '\n';
    out << "index,name,family,window,lookback\n";
    for (std::size_t i = 0; i < reg.size(); ++i) {
      const auto& f = reg.features()[i];
      out << i << ',' << f.name << ',' << f.family << ',' << f.window << ',' << f.lookback << '\n';
    }
    return p;
  }
  const FeatureDataset ds = compute_features(load_ohlcv(*input), reg);
  const fs::path p = ctx.out / "features.csv";
  auto out = open_out(p);
  out << "# " << ctx.provenance().dump() << '\n';
  ds.write_csv(out);
  ctx.say("wrote " + std::to_string(ds.rows()) + " rows x " + std::to_string(ds.feature_count()) + " features");
  return p;
}

DatasetSplit load_ingested_split(const fs::path& out) {
  const fs::path manifest = out / "ingest_manifest.json";
  const fs::path features = out / "features.csv";
  if (!fs::exists(manifest) || !fs::exists(features)) {
    throw EmptyDataError("no ingested data in " + out.string() + " (run `coevo ingest` first)");
  }
  std::ifstream in(features);
  const FeatureDataset ds = FeatureDataset::read_csv(in, features.string());
  json m;
  try {
    std::ifstream min(manifest);
    m = json::parse(min);
    return segment_timeline(ds, timeline_from_json(m.at("timeline")));
  } catch (const json::exception& e) {
    throw FormatError(manifest.string() + ": " + e.what());
  }
}

namespace {

struct Evaluators {
  const DatasetSplit& split;
  EvaluatorOptions opts;
  std::map<EnvironmentKind, std::shared_ptr<ArchitectureEvaluator>> by_env;

  const ArchitectureEvaluator& get(EnvironmentKind k) {
    auto& slot = by_env[k];
    if (!slot) slot = make_evaluator(LearningEnvironment{k}, split, opts);
    return *slot;
  }
};

fs::path aps_path(const fs::path& out, const std::string& id, int run) {
  std::ostringstream name;
  name << "run_" << std::setw(3) << std::setfill('0') << run << ".jsonl";
  return out / "aps" / scenario_dir_name(id) / name.str();
}

fs::path log_path(const fs::path& out, const std::string& id, int run) {
  std::ostringstream name;
  name << "run_" << std::setw(3) << std::setfill('0') << run << ".csv";
  return out / "logs" / scenario_dir_name(id) / name.str();
}

}  // namespace

SearchSummary cmd_search(const CommandContext& ctx) {
  const auto& c = ctx.config;
  const DatasetSplit split = load_ingested_split(ctx.out);
  Evaluators evs{split, c.evaluator_options(), {}};
  SearchSummary summary;
  json scenarios = json::array();
  json timing = json::object();
  const json prov = ctx.provenance();

  for (const auto& id : c.scenario_ids()) {
    const auto [env, moea] = ScenarioSpec::parse_id(id);
    ScenarioSpec spec{split.timeline_id(), env, moea, c.runs, moea == MoeaKind::Nsga2 ? c.nsga2 : c.eagd, c.seed};
    const ArchitectureEvaluator& ev = evs.get(env.kind);
    ApsHeader header{prov, env.objective_names(), c.complexity_mode, ev.options().space};
    ctx.say("scenario " + spec.id() + ": " + std::to_string(spec.n_runs) + " runs, population " +
            std::to_string(spec.moea_config.population_size) + ", " + std::to_string(spec.moea_config.iterations) +
            " iterations");
    auto on_run = [&](const ScenarioSpec& s, const RunRecord& rec, const ApproxParetoSet& aps) {
      if (!rec.ok) {
        ctx.say("  run " + std::to_string(rec.run) + " failed: " + rec.error);
        return;
      }
      const fs::path p = aps_path(ctx.out, s.id(), rec.run);
      write_aps_file(p, aps, header);
      auto log = open_out(log_path(ctx.out, s.id(), rec.run));
      write_run_log(log, rec.log, env.objective_names(), prov.dump());
      ctx.say("  run " + std::to_string(rec.run) + ": " + std::to_string(aps.members.size()) + " members, " +
              std::to_string(rec.evaluations) + " evaluations");
    };
    ScenarioResult res = run_scenario(spec, ev, c.parallel, on_run);

    json runs = json::array();
    for (const auto& r : res.runs) {
      runs.push_back({{"run", r.run}, {"seed", r.seed}, {"ok", r.ok}, {"evaluations", r.evaluations},
                      {"members", res.aps_per_run[r.run].members.size()}, {"error", r.error}});
      if (r.ok) {
        summary.aps_files.push_back(aps_path(ctx.out, id, r.run));
      } else {
        ++summary.failed_runs;
      }
      timing[id].push_back(r.seconds);
    }
    scenarios.push_back({{"id", spec.id()},
                         {"timeline", spec.timeline_id},
                         {"environment", std::string(env.short_name())},
                         {"moea", std::string(to_string(moea))},
                         {"objective_count", env.objective_count()},
                         {"objective_names", env.objective_names()},
                         {"evaluator_objective_count", ev.objective_count()},
                         {"training_rows", ev.training_rows()},
                         {"n_runs", spec.n_runs},
                         {"complete", res.complete()},
                         {"runs", runs}});
  }
  summary.hold_out_reads = split.hold_out_reads();
  write_json(ctx.out / "search_manifest.json",
             {{"provenance", prov},
              {"partitions",
               {{"pre_crisis", split.pre_crisis().rows()},
                {"crisis_train", split.crisis_train().rows()},
                {"crisis_test", split.crisis_test().rows()},
                {"hold_out", split.hold_out_size()}}},
              {"hold_out_reads", summary.hold_out_reads},
              {"scenarios", scenarios}});
  write_json(ctx.out / "timing.json", timing);
  return summary;
}

namespace {

struct LoadedScenario {
  std::string id;
  std::vector<ApsFile> files;
};

std::vector<LoadedScenario> load_all_aps(const fs::path& out) {
  std::vector<LoadedScenario> found;
  const fs::path root = out / "aps";
  if (!fs::exists(root)) return found;
  static const std::regex run_re(R"(run_(\d+)\.jsonl)");
  for (const auto& id : {"LF+NSGA2", "LF+EAGD", "LS+NSGA2", "LS+EAGD"}) {
    const fs::path dir = root / scenario_dir_name(id);
    if (!fs::is_directory(dir)) continue;
    std::vector<fs::path> paths;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (std::regex_match(e.path().filename().string(), run_re)) paths.push_back(e.path());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) continue;
    LoadedScenario s{id, {}};
    const LearningEnvironment env = ScenarioSpec::parse_id(id).first;
    for (const auto& p : paths) {
      s.files.push_back(read_aps_file(p));
      const auto& h = s.files.back().header;
      if (static_cast<int>(h.objective_names.size()) != env.objective_count()) {
        throw ValueError(p.string() + ": " + id + " requires " + std::to_string(env.objective_count()) +
                         " objectives, file declares " + std::to_string(h.objective_names.size()));
      }
      if (s.files.back().aps.scenario_id != id) throw ValueError(p.string() + ": scenario id mismatch");
    }
    found.push_back(std::move(s));
  }
  return found;
}

ScenarioResult to_result(const LoadedScenario& s, const ExperimentConfig& c, const std::string& timeline) {
  ScenarioResult r;
  const auto [env, moea] = ScenarioSpec::parse_id(s.id);
  r.spec = {timeline, env, moea, static_cast<int>(s.files.size()), moea == MoeaKind::Nsga2 ? c.nsga2 : c.eagd, c.seed};
  for (const auto& f : s.files) {
    r.aps_per_run.push_back(f.aps);
    RunRecord rec;
    rec.run = f.aps.run_id;
    rec.seed = f.aps.seed;
    rec.ok = true;
    r.runs.push_back(rec);
  }
  return r;
}

// Configuration the APS files were searched with, so hold-out retraining matches.
ExperimentConfig search_config(const std::vector<LoadedScenario>& loaded) {
  const json& cfg = loaded.front().files.front().header.config;
  if (!cfg.contains("config")) throw FormatError("APS header lacks the search configuration");
  for (const auto& s : loaded) {
    for (const auto& f : s.files) {
      if (f.header.config.at("config") != cfg.at("config")) {
        throw ValueError("APS files come from different configurations (scenario " + s.id + ")");
      }
    }
  }
  return parse_config(cfg.at("config"));
}

json holdout_json(const HoldoutSummary& h) {
  auto ms = [](const MeanSd& m) { return json{{"mean", m.mean}, {"sd", m.sd}}; };
  return {{"cycles", h.cycles},
          {"overall_accuracy", ms(h.overall_accuracy)},
          {"balanced_accuracy", ms(h.balanced_accuracy)},
          {"balanced_error", ms(h.balanced_error)},
          {"mcc", ms(h.mcc)}};
}

json member_json(const ParetoMember& m, const SearchSpace& space, ComplexityMode mode) {
  return {{"genome_hex", m.genome.to_hex()},
          {"objectives", m.objectives},
          {"architecture", json::parse(architecture_json(m.architecture, space, mode))}};
}

}  // namespace

json cmd_evaluate(const CommandContext& ctx, const std::optional<std::string>& genome_hex, const std::string& scenario) {
  const auto& c = ctx.config;
  const DatasetSplit split = load_ingested_split(ctx.out);
  const auto [env, moea] = ScenarioSpec::parse_id(scenario);
  const SearchSpace space;
  ParetoMember chosen;
  ExperimentConfig used = c;
  if (genome_hex) {
    try {
      chosen.genome = Genome::from_hex(*genome_hex, static_cast<std::size_t>(space.genome_length()));
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--genome: ") + e.what());
    }
    chosen.architecture = decode(chosen.genome, space);
  } else {
    auto loaded = load_all_aps(ctx.out);
    auto it = std::find_if(loaded.begin(), loaded.end(), [&](const LoadedScenario& s) { return s.id == scenario; });
    if (it == loaded.end()) throw EmptyDataError("no APS files for scenario " + scenario + " under " + (ctx.out / "aps").string());
    used = search_config(loaded);
    std::vector<ApproxParetoSet> sets;
    for (const auto& f : it->files) sets.push_back(f.aps);
    chosen = posteriori_select(sets);
  }
  const HoldoutSummary h = holdout_evaluate(chosen.architecture, split, env, used.train, c.holdout_cycles,
                                            mix_seed(c.seed, 0x401d));
  json result = {{"provenance", ctx.provenance()},
                 {"scenario", scenario},
                 {"environment", std::string(env.short_name())},
                 {"selected", member_json(chosen, space, used.complexity_mode)},
                 {"holdout", holdout_json(h)}};
  write_json(ctx.out / "evaluation.json", result);
  ctx.say("hold-out accuracy " + std::to_string(h.overall_accuracy.mean) + " +- " +
          std::to_string(h.overall_accuracy.sd) + ", MCC " + std::to_string(h.mcc.mean));
  return result;
}

json cmd_report(const CommandContext& ctx) {
  const auto loaded = load_all_aps(ctx.out);
  if (loaded.size() < 2) {
    throw EmptyDataError("need >= 2 scenarios with APS files under " + (ctx.out / "aps").string() + ", found " +
                         std::to_string(loaded.size()));
  }
  const ExperimentConfig used = search_config(loaded);
  const DatasetSplit split = load_ingested_split(ctx.out);
  Evaluators evs{split, used.evaluator_options(), {}};

  std::vector<ScenarioResult> results;
  std::vector<std::string> ids;
  for (const auto& s : loaded) {
    results.push_back(to_result(s, used, split.timeline_id()));
    ids.push_back(s.id);
  }
  ctx.say("re-scoring APS members on the hold-out partition");
  const ComparisonPoints pts =
      holdout_points(results, [&](EnvironmentKind k) -> const ArchitectureEvaluator& { return evs.get(k); });
  const auto gamma = assign_hv_indicators(results, pts, ctx.config.hv_reference);
  const HvMatrix m = hv_matrix(results);
  const StatReport stats = compare_scenarios(ids, m, ctx.config.alpha);

  ReportInputs in;
  in.header_json = ctx.provenance().dump();
  in.stats = stats;
  in.scenario_ids = ids;
  in.objective_names = {"E_hold", "C"};
  for (std::size_t s = 0; s < results.size(); ++s) {
    const auto& med = median_front(results[s]);
    std::size_t run_idx = 0;
    for (std::size_t r = 0; r < results[s].aps_per_run.size(); ++r) {
      if (&results[s].aps_per_run[r] == &med) run_idx = r;
    }
    std::vector<ObjectiveVector> front;
    for (auto i : nondominated_indices(pts[s][run_idx])) front.push_back(pts[s][run_idx][i]);
    in.median_fronts.push_back(front);
  }

  const auto& ctrl = results[stats.control];
  const ParetoMember chosen = posteriori_select(ctrl.aps_per_run);
  ctx.say("hold-out evaluation of the selected " + ctrl.spec.id() + " architecture");
  SelectionRow row{ctrl.spec.id(), chosen, complexity(chosen.architecture, {}, used.complexity_mode),
                   holdout_evaluate(chosen.architecture, split, ctrl.spec.environment, used.train,
                                    ctx.config.holdout_cycles, mix_seed(ctx.config.seed, 0x401d))};
  in.selections.push_back(row);
  emit_report(ctx.out / "report", in);

  json scen = json::array();
  for (std::size_t s = 0; s < results.size(); ++s) {
    const auto& st = stats.scenarios[s];
    scen.push_back({{"id", st.scenario},
                    {"hv_mean", st.hv.mean},
                    {"hv_sd", st.hv.sd},
                    {"avg_rank", st.avg_rank},
                    {"control", st.control},
                    {"p_value", st.p_value},
                    {"apv", st.apv},
                    {"reject", st.reject},
                    {"hv_per_run", results[s].hv_per_run}});
  }
  json report = {{"provenance", ctx.provenance()},
                 {"friedman", {{"statistic", stats.friedman.statistic}, {"p_value", stats.friedman.p_value},
                               {"blocks", stats.friedman.blocks}}},
                 {"control", ids[stats.control]},
                 {"gamma_star_size", gamma.size()},
                 {"scenarios", scen},
                 {"selected",
                  {{"scenario", row.scenario},
                   {"member", member_json(chosen, {}, used.complexity_mode)},
                   {"holdout", holdout_json(row.holdout)}}}};
  write_json(ctx.out / "report" / "report.json", report);
  ctx.say("Friedman p = " + std::to_string(stats.friedman.p_value) + ", control " + ids[stats.control]);
  return report;
}

}  // namespace coevo
