#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "coevo/architecture.hpp"
#include "coevo/experiment.hpp"
#include "coevo/neural_model.hpp"
#include "coevo/search_algorithms.hpp"

namespace coevo {

/// Bad configuration or command-line usage (CLI exit code 1).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string ohlcv_path;
  bool synthetic = false;
  std::uint64_t synthetic_seed = 7;
  SyntheticBenchmark benchmark;
  std::string timeline = "timeline2";  // timeline1 | timeline2 | synthetic | custom
  std::optional<TimelineSpec> custom_timeline;

  int runs = 40;
  int parallel = 1;
  std::vector<std::string> scenarios;  // empty = all four
  MoeaConfig nsga2 = MoeaConfig::defaults(MoeaKind::Nsga2);
  MoeaConfig eagd = MoeaConfig::defaults(MoeaKind::Eagd);
  TrainConfig train;
  ComplexityMode complexity_mode = ComplexityMode::Literal;
  int holdout_cycles = 50;
  double hv_reference = 1.1;
  double alpha = 0.05;

  std::uint64_t eval_seed() const { return mix_seed(seed, 0xe7a1); }
  std::vector<std::string> scenario_ids() const;
  EvaluatorOptions evaluator_options() const;
};

/// Every key and its default; the schema for files and overrides.
nlohmann::json default_config_json();

/// Deep-merges `patch` into `base`; rejects keys absent from the defaults.
void merge_config(nlohmann::json& base, const nlohmann::json& patch);
/// "a.b.c=value": value parsed as JSON when possible, else taken as a string.
void apply_override(nlohmann::json& cfg, const std::string& assignment);

/// Desk-scale budget: population 16, 30 iterations, 5 runs, short training.
nlohmann::json desk_patch();

/// Validates and converts; throws UsageError on bad values.
ExperimentConfig parse_config(const nlohmann::json& j);

nlohmann::json load_json_file(const std::filesystem::path& path);

}  // namespace coevo
