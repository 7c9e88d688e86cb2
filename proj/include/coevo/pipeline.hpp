#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coevo/config.hpp"
#include "coevo/market_data.hpp"

namespace coevo {

struct CommandContext {
  nlohmann::json resolved;  // full configuration after file, flags and overrides
  ExperimentConfig config;
  std::filesystem::path out = ".";
  int verbosity = 1;
  std::ostream* log = nullptr;  // progress messages; null = silent

  /// Builds defaults <- file <- desk <- overrides <- COEVO_SEED.
  static CommandContext build(const std::optional<std::filesystem::path>& config_file, bool desk,
                              const std::vector<std::string>& overrides, const std::filesystem::path& out);
  /// {"tool": "coevo", "config": ..., "seeds": ...} embedded in every artifact.
  nlohmann::json provenance() const;
  void say(const std::string& msg) const;
};

struct IngestResult {
  std::filesystem::path features_csv;
  std::filesystem::path manifest;
  std::size_t rows[4] = {0, 0, 0, 0};  // pre_crisis, crisis_train, crisis_test, hold_out
};

/// OHLCV (file or synthetic) -> features.csv + ingest_manifest.json under ctx.out.
IngestResult cmd_ingest(const CommandContext& ctx, const std::optional<std::filesystem::path>& input);

/// Feature CSV for `input`, or the indicator registry listing when no input is given.
std::filesystem::path cmd_features(const CommandContext& ctx, const std::optional<std::filesystem::path>& input);

struct SearchSummary {
  std::vector<std::filesystem::path> aps_files;
  std::size_t failed_runs = 0;
  std::uint64_t hold_out_reads = 0;
};

/// Runs the configured scenarios on the ingested data. Writes
/// aps/<scenario>/run_NNN.jsonl, logs/<scenario>/run_NNN.csv and search_manifest.json.
SearchSummary cmd_search(const CommandContext& ctx);

/// Hold-out evaluation of one architecture (`genome_hex`) or, when absent, of
/// the a-posteriori selection from `scenario`'s APS files. Writes evaluation.json.
nlohmann::json cmd_evaluate(const CommandContext& ctx, const std::optional<std::string>& genome_hex,
                            const std::string& scenario);

/// Statistics, median fronts and selection over every scenario found under
/// ctx.out/aps; writes report/summary.csv and friends.
nlohmann::json cmd_report(const CommandContext& ctx);

/// Loads ctx.out/features.csv and applies the timeline in ingest_manifest.json.
DatasetSplit load_ingested_split(const std::filesystem::path& out);

std::string scenario_dir_name(const std::string& scenario_id);

}  // namespace coevo
