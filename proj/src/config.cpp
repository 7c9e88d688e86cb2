#include "coevo/config.hpp"

#include <fstream>

#include "coevo/errors.hpp"

namespace coevo {

using nlohmann::json;

std::vector<std::string> ExperimentConfig::scenario_ids() const {
  if (!scenarios.empty()) return scenarios;
  return {"LF+NSGA2", "LF+EAGD", "LS+NSGA2", "LS+EAGD"};
}

EvaluatorOptions ExperimentConfig::evaluator_options() const {
  EvaluatorOptions o;
  o.train = train;
  o.complexity_mode = complexity_mode;
  o.eval_seed = eval_seed();
  return o;
}

namespace {

json regime_json(const RegimeParams& r) {
  return {{"drift", r.drift}, {"volatility", r.volatility}, {"autocorrelation", r.autocorrelation}};
}

}  // namespace

json default_config_json() {
  const TrainConfig t;
  const MoeaConfig n = MoeaConfig::defaults(MoeaKind::Nsga2);
  const MoeaConfig e = MoeaConfig::defaults(MoeaKind::Eagd);
  const SyntheticBenchmark b;
  return {
      {"seed", 1},
      {"data",
       {{"ohlcv", ""},
        {"synthetic",
         {{"enabled", false},
          {"seed", 7},
          {"pre", regime_json(b.pre)},
          {"post", regime_json(b.post)},
          {"pre_days", b.lengths.pre},
          {"post_days", b.lengths.post},
          {"train_fraction", b.train_fraction},
          {"test_fraction", b.test_fraction}}}}},
      {"timeline", "timeline2"},
      {"search",
       {{"runs", 40},
        {"population_size", n.population_size},
        {"iterations", n.iterations},
        {"parallel", 1},
        {"scenarios", json::array()}}},
      {"nsga2",
       {{"crossover_rate", n.crossover_rate},
        {"nongeometric_probability", n.nongeometric_probability},
        {"bitflip_probability", nullptr},
        {"mutation_rate", nullptr}}},
      {"eagd",
       {{"crossover_rate", e.crossover_rate},
        {"mutation_rate", nullptr},
        {"learning_generations", e.learning_generations},
        {"neighborhood_fraction", e.neighborhood_fraction},
        {"archive_factor", e.archive_factor}}},
      {"train",
       {{"max_epochs", t.max_epochs},
        {"batch_size", t.batch_size},
        {"learning_rate", t.learning_rate},
        {"momentum", t.momentum},
        {"patience", t.patience},
        {"min_improvement", t.min_improvement}}},
      {"complexity_mode", "literal"},
      {"evaluation", {{"holdout_cycles", 50}, {"hv_reference", 1.1}, {"alpha", 0.05}}},
  };
}

namespace {

void merge_into(json& base, const json& patch, const std::string& path) {
  if (!patch.is_object()) throw UsageError("configuration " + (path.empty() ? "root" : path) + " must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw UsageError("unknown configuration key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object() && key != "timeline") {
      merge_into(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

}  // namespace

void merge_config(json& base, const json& patch) { merge_into(base, patch, ""); }

void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("override must look like key=value: '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    parts.push_back(key.substr(start, dot == std::string::npos ? std::string::npos : dot - start));
    if (parts.back().empty()) throw UsageError("empty key segment in '" + key + "'");
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  json patch = value;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, patch}};
  merge_config(cfg, patch);
}

json desk_patch() {
  return {{"search", {{"population_size", 16}, {"iterations", 30}, {"runs", 5}}},
          {"train", {{"max_epochs", 10}}},
          {"evaluation", {{"holdout_cycles", 10}}}};
}

namespace {

template <typename T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError("configuration " + where + "." + key + ": " + e.what());
  }
}

std::optional<double> get_rate(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get<double>(j, key, where);
}

RegimeParams regime_from(const json& j, const std::string& where) {
  return {get<double>(j, "drift", where), get<double>(j, "volatility", where),
          get<double>(j, "autocorrelation", where)};
}

DateRange range_from(const json& j, const char* key) {
  try {
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 2) throw UsageError(std::string("timeline.") + key + " must be [first, last]");
    return {Date::parse(a[0].get<std::string>()), Date::parse(a[1].get<std::string>())};
  } catch (const json::exception& e) {
    throw UsageError(std::string("timeline.") + key + ": " + e.what());
  } catch (const DataError& e) {
    throw UsageError(std::string("timeline.") + key + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  c.seed = get<std::uint64_t>(j, "seed", "");
  const auto& data = j.at("data");
  c.ohlcv_path = get<std::string>(data, "ohlcv", "data");
  const auto& syn = data.at("synthetic");
  c.synthetic = get<bool>(syn, "enabled", "data.synthetic");
  c.synthetic_seed = get<std::uint64_t>(syn, "seed", "data.synthetic");
  c.benchmark.pre = regime_from(syn.at("pre"), "data.synthetic.pre");
  c.benchmark.post = regime_from(syn.at("post"), "data.synthetic.post");
  c.benchmark.lengths = {get<std::size_t>(syn, "pre_days", "data.synthetic"),
                         get<std::size_t>(syn, "post_days", "data.synthetic")};
  c.benchmark.train_fraction = get<double>(syn, "train_fraction", "data.synthetic");
  c.benchmark.test_fraction = get<double>(syn, "test_fraction", "data.synthetic");

  const auto& tl = j.at("timeline");
  if (tl.is_string()) {
    c.timeline = tl.get<std::string>();
    if (c.timeline != "timeline1" && c.timeline != "timeline2" && c.timeline != "synthetic") {
      throw UsageError("timeline must be timeline1, timeline2, synthetic or an object with four ranges");
    }
  } else if (tl.is_object()) {
    TimelineSpec spec;
    spec.id = tl.contains("id") ? get<std::string>(tl, "id", "timeline") : "custom";
    spec.pre_crisis = range_from(tl, "pre_crisis");
    spec.crisis_train = range_from(tl, "crisis_train");
    spec.crisis_test = range_from(tl, "crisis_test");
    spec.hold_out = range_from(tl, "hold_out");
    c.timeline = "custom";
    c.custom_timeline = spec;
  } else {
    throw UsageError("timeline must be a name or an object");
  }
  if (c.synthetic && c.timeline != "synthetic" && !c.custom_timeline) c.timeline = "synthetic";

  const auto& s = j.at("search");
  c.runs = get<int>(s, "runs", "search");
  c.parallel = get<int>(s, "parallel", "search");
  c.scenarios = get<std::vector<std::string>>(s, "scenarios", "search");
  const int pop = get<int>(s, "population_size", "search");
  const int iters = get<int>(s, "iterations", "search");
  if (c.runs < 1) throw UsageError("search.runs must be at least 1");
  if (c.parallel < 1) throw UsageError("search.parallel must be at least 1");
  for (const auto& id : c.scenarios) {
    try {
      ScenarioSpec::parse_id(id);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("search.scenarios: ") + e.what());
    }
  }

  const auto& n = j.at("nsga2");
  c.nsga2.population_size = pop;
  c.nsga2.iterations = iters;
  c.nsga2.crossover_rate = get<double>(n, "crossover_rate", "nsga2");
  c.nsga2.nongeometric_probability = get<double>(n, "nongeometric_probability", "nsga2");
  c.nsga2.bitflip_probability = get_rate(n, "bitflip_probability", "nsga2");
  c.nsga2.mutation_rate = get_rate(n, "mutation_rate", "nsga2");
  const auto& e = j.at("eagd");
  c.eagd.population_size = pop;
  c.eagd.iterations = iters;
  c.eagd.crossover_rate = get<double>(e, "crossover_rate", "eagd");
  c.eagd.mutation_rate = get_rate(e, "mutation_rate", "eagd");
  c.eagd.learning_generations = get<int>(e, "learning_generations", "eagd");
  c.eagd.neighborhood_fraction = get<double>(e, "neighborhood_fraction", "eagd");
  c.eagd.archive_factor = get<int>(e, "archive_factor", "eagd");
  try {
    c.nsga2.validate();
    c.eagd.validate();
  } catch (const std::invalid_argument& ex) {
    throw UsageError(std::string("configuration: ") + ex.what());
  }

  const auto& t = j.at("train");
  c.train.max_epochs = get<int>(t, "max_epochs", "train");
  c.train.batch_size = get<int>(t, "batch_size", "train");
  c.train.learning_rate = get<double>(t, "learning_rate", "train");
  c.train.momentum = get<double>(t, "momentum", "train");
  c.train.patience = get<int>(t, "patience", "train");
  c.train.min_improvement = get<double>(t, "min_improvement", "train");
  if (c.train.max_epochs < 0 || c.train.batch_size < 1 || !(c.train.learning_rate > 0) || c.train.patience < 1 ||
      !(c.train.momentum >= 0 && c.train.momentum < 1)) {
    throw UsageError("train: epochs >= 0, batch_size >= 1, learning_rate > 0, momentum in [0, 1), patience >= 1");
  }

  try {
    c.complexity_mode = complexity_mode_from_string(get<std::string>(j, "complexity_mode", ""));
  } catch (const std::invalid_argument& ex) {
    throw UsageError(ex.what());
  }
  const auto& ev = j.at("evaluation");
  c.holdout_cycles = get<int>(ev, "holdout_cycles", "evaluation");
  c.hv_reference = get<double>(ev, "hv_reference", "evaluation");
  c.alpha = get<double>(ev, "alpha", "evaluation");
  if (c.holdout_cycles < 1) throw UsageError("evaluation.holdout_cycles must be at least 1");
  if (!(c.hv_reference > 1.0)) throw UsageError("evaluation.hv_reference must exceed 1");
  if (!(c.alpha > 0 && c.alpha < 1)) throw UsageError("evaluation.alpha must lie in (0, 1)");
  return c;
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
}

}  // namespace coevo
