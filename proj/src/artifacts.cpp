#include "coevo/artifacts.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>

#include "coevo/errors.hpp"

namespace coevo {

using nlohmann::json;

void write_aps(std::ostream& out, const ApproxParetoSet& aps, const ApsHeader& header) {
  json h = {{"record", "header"},
            {"scenario", aps.scenario_id},
            {"run", aps.run_id},
            {"seed", aps.seed},
            {"objective_names", header.objective_names},
            {"complexity_mode", std::string(to_string(header.complexity_mode))},
            {"genome_length", header.space.genome_length()},
            {"search_space",
             {{"feature_count", header.space.feature_count},
              {"max_layers", header.space.max_layers},
              {"max_layer_size", header.space.max_layer_size}}},
            {"members", aps.members.size()},
            {"config", header.config}};
  out << h.dump() << '\n';
  for (const auto& m : aps.members) {
    json r = {{"scenario", aps.scenario_id},
              {"run", aps.run_id},
              {"seed", aps.seed},
              {"genome_hex", m.genome.to_hex()},
              {"objectives", m.objectives},
              {"complexity_mode", std::string(to_string(header.complexity_mode))}};
    out << r.dump() << '\n';
  }
}

void write_aps_file(const std::filesystem::path& path, const ApproxParetoSet& aps, const ApsHeader& header) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_aps(out, aps, header);
}

ApsFile read_aps(std::istream& in, const std::string& source) {
  ApsFile f;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  auto fail = [&](const std::string& what) { return FormatError(source + ":" + std::to_string(line_no) + ": " + what); };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw fail(std::string("invalid JSON: ") + e.what());
    }
    try {
      if (!have_header) {
        if (j.value("record", "") != "header") throw fail("first record must be the header");
        f.header.config = j.at("config");
        f.header.objective_names = j.at("objective_names").get<std::vector<std::string>>();
        f.header.complexity_mode = complexity_mode_from_string(j.at("complexity_mode").get<std::string>());
        const auto& sp = j.at("search_space");
        f.header.space = {sp.at("feature_count").get<int>(), sp.at("max_layers").get<int>(),
                          sp.at("max_layer_size").get<int>()};
        f.aps.scenario_id = j.at("scenario").get<std::string>();
        f.aps.run_id = j.at("run").get<int>();
        f.aps.seed = j.at("seed").get<std::uint64_t>();
        have_header = true;
        continue;
      }
      ParetoMember m;
      const auto len = static_cast<std::size_t>(f.header.space.genome_length());
      m.genome = Genome::from_hex(j.at("genome_hex").get<std::string>(), len);
      m.objectives = j.at("objectives").get<ObjectiveVector>();
      m.architecture = decode(m.genome, f.header.space);
      if (m.objectives.size() != f.header.objective_names.size()) throw fail("objective count differs from header");
      const double c = complexity(m.architecture, f.header.space, f.header.complexity_mode);
      if (m.objectives.size() > 1 && std::abs(m.objectives[1] - c) > 1e-12) {
        throw ValueError(source + ":" + std::to_string(line_no) + ": stored complexity " +
                         std::to_string(m.objectives[1]) + " differs from recomputed " + std::to_string(c));
      }
      f.aps.members.push_back(std::move(m));
    } catch (const json::exception& e) {
      throw fail(std::string("bad record: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw fail(std::string("bad record: ") + e.what());
    }
  }
  if (!have_header) throw FormatError(source + ": no header record");
  return f;
}

ApsFile read_aps_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_aps(in, path.string());
}

void write_run_log(std::ostream& out, const std::vector<GenerationStats>& log,
                   const std::vector<std::string>& objective_names, const std::string& header_json) {
  out << "# " << header_json << '\n';
  out << "generation,evaluations";
  for (const auto& n : objective_names) out << ",best_" << n;
  for (const auto& n : objective_names) out << ",mean_" << n;
  out << ",hv_proxy\n";
  out << std::setprecision(10);
  for (const auto& g : log) {
    out << g.generation << ',' << g.evaluations;
    for (double v : g.best) out << ',' << v;
    for (double v : g.mean) out << ',' << v;
    out << ',' << g.hv_proxy << '\n';
  }
}

}  // namespace coevo
