#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "coevo/architecture.hpp"

namespace coevo {

/// Objective values, all minimized.
using ObjectiveVector = std::vector<double>;

/// True iff `a` is no worse than `b` everywhere and strictly better somewhere.
/// Throws ShapeError on length mismatch.
bool dominates(std::span<const double> a, std::span<const double> b);

/// Fronts of mutually non-dominated indices; front 0 is the non-dominated set.
/// Indices inside a front are ascending.
std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const ObjectiveVector> points);

/// Indices of the non-dominated points (front 0 only).
std::vector<std::size_t> nondominated_indices(std::span<const ObjectiveVector> points);

/// NSGA-II crowding distance of each point within one front. Boundary points
/// per objective get +inf; interior points sum (next - prev) / range.
std::vector<double> crowding_distance(std::span<const ObjectiveVector> front);

/// Simplex-lattice weights with components in multiples of 1/H; the count is
/// C(H + m - 1, m - 1). Ordered lexicographically by component.
std::vector<ObjectiveVector> das_dennis_weights(int objectives, int divisions);

/// max_k w_k |f_k - z_k| with zero weights replaced by 1e-6.
double tchebycheff(std::span<const double> objectives, std::span<const double> weight,
                   std::span<const double> ideal);

/// Exact measure of the region dominated by `front` and bounded by `ref`
/// (minimization). Points not strictly below `ref` in every objective are
/// ignored. Supports 1, 2 and 3 objectives.
double hypervolume(std::span<const ObjectiveVector> front, std::span<const double> ref);

struct ParetoMember {
  Genome genome;
  DecodedArchitecture architecture;
  ObjectiveVector objectives;
};

/// Non-dominated members returned by one MOEA run.
struct ApproxParetoSet {
  std::string scenario_id;
  int run_id = 0;
  std::uint64_t seed = 0;
  std::vector<ParetoMember> members;

  std::vector<ObjectiveVector> objective_vectors() const;
};

/// Non-dominated subset of the union of every member of every set, with
/// duplicate genomes removed (first occurrence kept).
std::vector<ParetoMember> estimate_true_pareto(std::span<const ApproxParetoSet> all_aps);
std::vector<ParetoMember> nondominated_members(std::span<const ParetoMember> members);

struct NormalizationBounds {
  ObjectiveVector ideal;
  ObjectiveVector nadir;

  /// Ideal and nadir of a point set.
  static NormalizationBounds of(std::span<const ObjectiveVector> points);
  ObjectiveVector normalize(std::span<const double> p) const;  // zero range -> range 1
};

/// HV(aps) / HV(gamma_star) after normalizing both by `bounds` with the
/// reference point at (ref_coordinate, ..., ref_coordinate). Duplicate
/// vectors are collapsed first.
double hv_indicator(std::span<const ObjectiveVector> aps, std::span<const ObjectiveVector> gamma_star,
                    const NormalizationBounds& bounds, double ref_coordinate = 1.1);
/// Uses gamma_star's own ideal/nadir as bounds.
double hv_indicator(std::span<const ObjectiveVector> aps, std::span<const ObjectiveVector> gamma_star,
                    double ref_coordinate = 1.1);

}  // namespace coevo
