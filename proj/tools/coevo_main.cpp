#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "coevo/errors.hpp"
#include "coevo/pipeline.hpp"
#include "coevo/selftest.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kRun = 3 };

std::string synthetic_seed(const std::string& spec) {
  const std::string v = spec.rfind("seed=", 0) == 0 ? spec.substr(5) : spec;
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw coevo::UsageError("--synthetic expects seed=<non-negative integer>, got '" + spec + "'");
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-evolutionary architecture search for stock movement forecasting"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::optional<std::string> config_file;
  std::vector<std::string> overrides;
  std::string out = ".";
  bool desk = false;
  int verbose = 0;
  bool quiet = false;
  app.add_option("--config", config_file, "JSON configuration file");
  app.add_option("--set", overrides, "Override a configuration key, e.g. --set search.runs=10")->allow_extra_args(false);
  app.add_option("--out", out, "Directory for every input and output artifact");
  app.add_flag("--desk", desk, "Desk-scale budgets (population 16, 30 iterations, 5 runs)");
  app.add_flag("-v,--verbose", verbose, "More progress output");
  app.add_flag("-q,--quiet", quiet, "No progress output");

  std::optional<std::string> input;
  std::optional<std::string> synthetic;
  auto* ingest = app.add_subcommand("ingest", "Read OHLCV (or generate a synthetic series) and compute features");
  ingest->add_option("--input", input, "OHLCV CSV file");
  ingest->add_option("--synthetic", synthetic, "Generate the regime-shift benchmark, e.g. seed=7");

  auto* features = app.add_subcommand("features", "List the indicator registry or compute features for a CSV");
  features->add_option("--input", input, "OHLCV CSV file");

  std::vector<std::string> scenarios;
  std::optional<int> runs, iterations, pop, parallel;
  auto* search = app.add_subcommand("search", "Run the MOEA scenarios on the ingested data");
  search->add_option("--scenario", scenarios, "Scenario id such as LS+EAGD (repeatable)")->allow_extra_args(false);
  search->add_option("--runs", runs, "Independent runs per scenario");
  search->add_option("--iterations", iterations, "Generations per run");
  search->add_option("--pop", pop, "Population size");
  search->add_option("--parallel", parallel, "Maximum concurrent runs");

  std::optional<std::string> genome;
  std::string eval_scenario = "LS+EAGD";
  auto* evaluate = app.add_subcommand("evaluate", "Hold-out evaluation of one architecture");
  evaluate->add_option("--genome", genome, "Genome as hex; default: a-posteriori selection of --scenario");
  evaluate->add_option("--scenario", eval_scenario, "Scenario whose APS files supply the selection");

  auto* report = app.add_subcommand("report", "Statistics, median fronts and selected architecture");
  report->add_option("--parallel", parallel, "Unused; accepted for symmetry")->group("");

  double perturbation = 0;
  auto* selftest = app.add_subcommand("selftest", "Run the oracle suite");
  selftest->add_option("--inject-hv-perturbation", perturbation, "Scale computed hypervolumes (test hook)")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (selftest->parsed()) {
      coevo::SelftestOptions opts;
      opts.hv_perturbation = perturbation;
      opts.out = &std::cout;
      const auto rep = coevo::run_selftest(opts);
      std::cout << (rep.all_passed() ? "selftest: all checks passed" : "selftest: FAILED") << std::endl;
      return rep.all_passed() ? kOk : kRun;
    }

    std::vector<std::string> all = overrides;
    if (synthetic) {
      all.push_back("data.synthetic.enabled=true");
      all.push_back("data.synthetic.seed=" + synthetic_seed(*synthetic));
    }
    if (runs) all.push_back("search.runs=" + std::to_string(*runs));
    if (iterations) all.push_back("search.iterations=" + std::to_string(*iterations));
    if (pop) all.push_back("search.population_size=" + std::to_string(*pop));
    if (parallel) all.push_back("search.parallel=" + std::to_string(*parallel));
    if (!scenarios.empty()) {
      std::string list = "search.scenarios=[";
      for (std::size_t i = 0; i < scenarios.size(); ++i) list += (i ? ",\"" : "\"") + scenarios[i] + "\"";
      all.push_back(list + "]");
    }
    std::optional<fs::path> cfg_path;
    if (config_file) cfg_path = *config_file;
    auto ctx = coevo::CommandContext::build(cfg_path, desk, all, out);
    ctx.verbosity = quiet ? 0 : 1 + verbose;
    ctx.log = &std::cerr;
    std::optional<fs::path> in_path;
    if (input) in_path = *input;

    if (ingest->parsed()) {
      const auto r = coevo::cmd_ingest(ctx, in_path);
      ctx.say("wrote " + r.features_csv.string() + " and " + r.manifest.string());
    } else if (features->parsed()) {
      ctx.say("wrote " + coevo::cmd_features(ctx, in_path).string());
    } else if (search->parsed()) {
      const auto r = coevo::cmd_search(ctx);
      ctx.say("wrote " + std::to_string(r.aps_files.size()) + " APS files");
      if (r.failed_runs > 0) {
        std::cerr << "error: " << r.failed_runs << " run(s) failed; see the run logs" << std::endl;
        return kRun;
      }
    } else if (evaluate->parsed()) {
      std::cout << coevo::cmd_evaluate(ctx, genome, eval_scenario).dump(2) << std::endl;
    } else if (report->parsed()) {
      coevo::cmd_report(ctx);
      ctx.say("wrote " + (ctx.out / "report").string());
    }
    return kOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << std::endl;
    return kUsage;
  } catch (const coevo::DataError& e) {
    std::cerr << "data error: " << e.what() << std::endl;
    return kData;
  } catch (const coevo::RunError& e) {
    std::cerr << "run failure: " << e.what() << std::endl;
    return kRun;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kData;
  }
}
