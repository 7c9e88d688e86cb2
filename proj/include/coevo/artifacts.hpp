#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "coevo/architecture.hpp"
#include "coevo/moea_core.hpp"
#include "coevo/search_algorithms.hpp"

namespace coevo {

/// Header record of an APS file.
struct ApsHeader {
  nlohmann::json config;  // resolved configuration + seeds
  std::vector<std::string> objective_names;
  ComplexityMode complexity_mode = ComplexityMode::Literal;
  SearchSpace space;
};

/// JSON lines: one header record, then one record per member with fields
/// scenario, run, seed, genome_hex, objectives, complexity_mode.
void write_aps(std::ostream& out, const ApproxParetoSet& aps, const ApsHeader& header);
void write_aps_file(const std::filesystem::path& path, const ApproxParetoSet& aps, const ApsHeader& header);

struct ApsFile {
  ApsHeader header;
  ApproxParetoSet aps;
};

/// Parses an APS file, decoding each genome. Throws FormatError for malformed
/// records and ValueError when a stored complexity disagrees with the genome.
ApsFile read_aps(std::istream& in, const std::string& source = "<stream>");
ApsFile read_aps_file(const std::filesystem::path& path);

/// generation, evaluations, best_<obj>..., mean_<obj>..., hv_proxy
void write_run_log(std::ostream& out, const std::vector<GenerationStats>& log,
                   const std::vector<std::string>& objective_names, const std::string& header_json);

}  // namespace coevo
