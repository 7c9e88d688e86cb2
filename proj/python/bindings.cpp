#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "coevo/architecture.hpp"
#include "coevo/moea_core.hpp"
#include "coevo/pipeline.hpp"
#include "coevo/selftest.hpp"
#include "coevo/stats_report.hpp"

namespace py = pybind11;
using namespace coevo;

namespace {

CommandContext context(const std::string& out, bool desk, const std::vector<std::string>& overrides) {
  auto ctx = CommandContext::build(std::nullopt, desk, overrides, out);
  ctx.verbosity = 0;
  return ctx;
}

py::dict architecture_dict(const DecodedArchitecture& a) {
  py::list layers;
  for (const auto& l : a.active_layers()) layers.append(py::make_tuple(l.size, std::string(to_string(l.activation))));
  py::dict d;
  d["features"] = a.features;
  d["layers"] = layers;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Co-evolutionary architecture search core";

  m.def(
      "complexity",
      [](const std::vector<int>& features, const std::vector<int>& layer_sizes, const std::string& mode) {
        DecodedArchitecture a;
        a.features = features;
        SearchSpace space;
        a.layers.assign(static_cast<std::size_t>(space.max_layers), HiddenLayer{});
        for (std::size_t i = 0; i < layer_sizes.size() && i < a.layers.size(); ++i) a.layers[i].size = layer_sizes[i];
        return complexity(a, space, complexity_mode_from_string(mode));
      },
      py::arg("features"), py::arg("layer_sizes"), py::arg("mode") = "literal");

  m.def(
      "decode",
      [](const std::string& hex) { return architecture_dict(decode(Genome::from_hex(hex, 86))); },
      py::arg("genome_hex"));

  m.def(
      "hypervolume",
      [](const std::vector<std::vector<double>>& front, const std::vector<double>& ref) {
        return hypervolume(front, ref);
      },
      py::arg("front"), py::arg("ref"));

  m.def(
      "nondominated_sort",
      [](const std::vector<std::vector<double>>& points) { return nondominated_sort(points); }, py::arg("points"));

  m.def(
      "friedman",
      [](const std::vector<std::vector<double>>& matrix) {
        const auto f = friedman_test(matrix);
        py::dict d;
        d["statistic"] = f.statistic;
        d["p_value"] = f.p_value;
        d["avg_ranks"] = f.avg_ranks;
        return d;
      },
      py::arg("matrix"));

  m.def(
      "hommel", [](const std::vector<double>& p) { return hommel_apv(p); }, py::arg("raw_p"));

  m.def(
      "selftest",
      [](std::uint64_t seed) {
        SelftestOptions o;
        o.seed = seed;
        py::list out;
        for (const auto& c : run_selftest(o).checks) out.append(py::make_tuple(c.name, c.passed, c.detail));
        return out;
      },
      py::arg("seed") = 2024);

  m.def(
      "ingest_synthetic",
      [](const std::string& out, std::uint64_t seed, const std::vector<std::string>& overrides) {
        auto o = overrides;
        o.push_back("data.synthetic.enabled=true");
        o.push_back("data.synthetic.seed=" + std::to_string(seed));
        const auto r = cmd_ingest(context(out, false, o), std::nullopt);
        return std::vector<std::size_t>(r.rows, r.rows + 4);
      },
      py::arg("out"), py::arg("seed") = 7, py::arg("overrides") = std::vector<std::string>{});

  m.def(
      "search",
      [](const std::string& out, bool desk, const std::vector<std::string>& overrides) {
        py::gil_scoped_release release;
        const auto s = cmd_search(context(out, desk, overrides));
        std::vector<std::string> files;
        for (const auto& p : s.aps_files) files.push_back(p.string());
        return files;
      },
      py::arg("out"), py::arg("desk") = true, py::arg("overrides") = std::vector<std::string>{});

  m.def(
      "report",
      [](const std::string& out, bool desk, const std::vector<std::string>& overrides) {
        return cmd_report(context(out, desk, overrides)).dump();
      },
      py::arg("out"), py::arg("desk") = true, py::arg("overrides") = std::vector<std::string>{});
}
