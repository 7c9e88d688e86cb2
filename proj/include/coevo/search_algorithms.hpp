#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coevo/architecture.hpp"
#include "coevo/moea_core.hpp"

namespace coevo {

enum class MoeaKind { Nsga2, Eagd };

std::string_view to_string(MoeaKind k);
MoeaKind moea_kind_from_string(std::string_view s);

struct MoeaConfig {
  int population_size = 50;
  int iterations = 300;  // generations
  double crossover_rate = 0.9;
  double nongeometric_probability = 0.8;
  std::optional<double> bitflip_probability;  // unset: 1/n
  std::optional<double> mutation_rate;        // unset: 1/n
  int learning_generations = 8;
  double neighborhood_fraction = 0.10;
  int archive_factor = 2;  // EAGD archive capacity = archive_factor * population_size
  std::uint64_t seed = 1;

  /// Library defaults for each algorithm (EAGD recombines every mating).
  static MoeaConfig defaults(MoeaKind kind);
  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
  double resolved_bitflip(std::size_t n) const { return bitflip_probability.value_or(1.0 / static_cast<double>(n)); }
  double resolved_mutation(std::size_t n) const { return mutation_rate.value_or(1.0 / static_cast<double>(n)); }
};

/// Maps a genome to minimized objectives. Implementations must be
/// deterministic per genome; evaluate may be called from several threads.
class ObjectiveEvaluator {
 public:
  virtual ~ObjectiveEvaluator() = default;
  virtual int objective_count() const = 0;
  virtual std::size_t genome_length() const = 0;
  virtual ObjectiveVector evaluate(const Genome& genome) const = 0;
  /// Architecture stored alongside APS members; empty for non-architecture problems.
  virtual DecodedArchitecture describe(const Genome&) const { return {}; }
};

/// Wraps a plain function; handy for toy problems and tests.
class FunctionEvaluator : public ObjectiveEvaluator {
 public:
  using Fn = std::function<ObjectiveVector(const Genome&)>;
  FunctionEvaluator(int objectives, std::size_t length, Fn fn)
      : objectives_(objectives), length_(length), fn_(std::move(fn)) {}
  int objective_count() const override { return objectives_; }
  std::size_t genome_length() const override { return length_; }
  ObjectiveVector evaluate(const Genome& g) const override { return fn_(g); }

 private:
  int objectives_;
  std::size_t length_;
  Fn fn_;
};

/// Disagreeing bits are exchanged uniformly; each child's agreeing bits are
/// flipped independently with `bitflip_probability`, so children can leave
/// the Hamming segment between the parents.
std::pair<Genome, Genome> nongeometric_crossover(const Genome& p1, const Genome& p2, double bitflip_probability,
                                                 Rng& rng);
std::pair<Genome, Genome> uniform_crossover(const Genome& p1, const Genome& p2, Rng& rng);

/// Weight vectors for `count` subproblems. Two objectives: Das-Dennis with
/// H = count - 1. More objectives: the smallest lattice with at least
/// `count` points, thinned by farthest-point sampling seeded at the corners.
std::vector<ObjectiveVector> decomposition_weights(int objectives, int count);

struct GenerationStats {
  int generation = 0;
  std::size_t evaluations = 0;
  ObjectiveVector best;
  ObjectiveVector mean;
  double hv_proxy = 0;  // HV of the current first front against (1.5, ..., 1.5)
};

struct MoeaResult {
  ApproxParetoSet aps;
  std::vector<GenerationStats> log;
  std::size_t evaluations = 0;
};

using GenerationObserver = std::function<void(int generation, std::span<const Genome>, std::span<const ObjectiveVector>)>;

inline constexpr double kHvProxyReference = 1.5;

/// Generational NSGA-II. Throws RunError naming the genome when the
/// evaluator fails or returns a malformed vector.
MoeaResult nsga2_run(const MoeaConfig& cfg, const ObjectiveEvaluator& evaluator, const GenerationObserver& observer = {});

/// Tchebycheff decomposition with neighbourhood mating and a dominance-based
/// external archive that periodically re-seeds the subproblems.
MoeaResult eagd_run(const MoeaConfig& cfg, const ObjectiveEvaluator& evaluator, const GenerationObserver& observer = {});

MoeaResult run_moea(MoeaKind kind, const MoeaConfig& cfg, const ObjectiveEvaluator& evaluator,
                    const GenerationObserver& observer = {});

}  // namespace coevo
