#include <doctest.h>

#include <sstream>

#include "coevo/artifacts.hpp"
#include "coevo/config.hpp"
#include "coevo/errors.hpp"

using namespace coevo;
using nlohmann::json;

TEST_CASE("defaults echo the published search parameters") {
  const auto c = parse_config(default_config_json());
  CHECK(c.nsga2.population_size == 50);
  CHECK(c.nsga2.iterations == 300);
  CHECK(c.runs == 40);
  CHECK(c.nsga2.crossover_rate == 0.9);
  CHECK(c.nsga2.nongeometric_probability == 0.8);
  CHECK(c.eagd.learning_generations == 8);
  CHECK(c.eagd.neighborhood_fraction == 0.10);
  CHECK(c.holdout_cycles == 50);
  CHECK(c.complexity_mode == ComplexityMode::Literal);
  CHECK(c.scenario_ids().size() == 4);
}

TEST_CASE("desk patch and dotted overrides") {
  auto j = default_config_json();
  merge_config(j, desk_patch());
  apply_override(j, "search.runs=10");
  apply_override(j, "eagd.learning_generations=4");
  apply_override(j, "complexity_mode=normalized");
  const auto c = parse_config(j);
  CHECK(c.nsga2.population_size == 16);
  CHECK(c.eagd.iterations == 30);
  CHECK(c.runs == 10);
  CHECK(c.eagd.learning_generations == 4);
  CHECK(c.complexity_mode == ComplexityMode::Normalized);
}

TEST_CASE("configuration errors are usage errors") {
  auto j = default_config_json();
  CHECK_THROWS_AS(apply_override(j, "search.nope=1"), UsageError);
  CHECK_THROWS_AS(apply_override(j, "novalue"), UsageError);
  auto bad = default_config_json();
  apply_override(bad, "search.runs=0");
  CHECK_THROWS_AS(parse_config(bad), UsageError);
  auto bad_rate = default_config_json();
  apply_override(bad_rate, "nsga2.crossover_rate=2");
  CHECK_THROWS_AS(parse_config(bad_rate), UsageError);
  auto bad_scenario = default_config_json();
  apply_override(bad_scenario, "search.scenarios=[\"LQ+NSGA2\"]");
  CHECK_THROWS_AS(parse_config(bad_scenario), UsageError);
}

TEST_CASE("custom timeline objects replace the named timeline") {
  auto j = default_config_json();
  merge_config(j, json{{"timeline",
                        {{"pre_crisis", {"2001-01-01", "2001-12-31"}},
                         {"crisis_train", {"2002-01-01", "2002-12-31"}},
                         {"crisis_test", {"2003-01-01", "2003-06-30"}},
                         {"hold_out", {"2003-07-01", "2003-12-31"}}}}});
  const auto c = parse_config(j);
  REQUIRE(c.custom_timeline.has_value());
  CHECK(c.custom_timeline->hold_out.first == Date(2003, 7, 1));
}

TEST_CASE("APS records round-trip and complexity is re-verified") {
  ApproxParetoSet aps;
  aps.scenario_id = "LS+EAGD";
  aps.run_id = 3;
  aps.seed = 104;
  Rng rng(1);
  for (int i = 0; i < 4; ++i) {
    const auto g = random_genome(86, rng);
    const auto a = decode(g);
    aps.members.push_back({g, a, {0.1 * i, complexity(a), 0.5}});
  }
  ApsHeader h;
  h.config = {{"tool", "coevo"}};
  h.objective_names = {"E_test", "C", "E_pr"};
  std::stringstream ss;
  write_aps(ss, aps, h);
  const std::string text = ss.str();
  const auto back = read_aps(ss);
  CHECK(back.aps.scenario_id == "LS+EAGD");
  CHECK(back.aps.run_id == 3);
  CHECK(back.aps.seed == 104);
  REQUIRE(back.aps.members.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(back.aps.members[i].genome == aps.members[i].genome);
    CHECK(back.aps.members[i].objectives == aps.members[i].objectives);
    CHECK(back.aps.members[i].architecture == aps.members[i].architecture);
  }
  CHECK(back.header.objective_names == h.objective_names);

  std::istringstream first_line(text);
  std::string header_line, member_line;
  std::getline(first_line, header_line);
  std::getline(first_line, member_line);
  const auto rec = json::parse(member_line);
  for (const char* key : {"scenario", "run", "seed", "genome_hex", "objectives", "complexity_mode"}) CHECK(rec.contains(key));

  auto tampered = rec;
  tampered["objectives"][1] = 0.999;
  std::istringstream bad(header_line + "\n" + tampered.dump() + "\n");
  CHECK_THROWS_AS(read_aps(bad), ValueError);
  std::istringstream garbage(header_line + "\nnot json\n");
  CHECK_THROWS_AS(read_aps(garbage), FormatError);
}
