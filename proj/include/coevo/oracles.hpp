#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "coevo/architecture.hpp"
#include "coevo/neural_model.hpp"

// Deliberately naive reference computations used to cross-check the fast
// implementations. None of them call the code they check.
namespace coevo::oracle {

using Points = std::vector<std::vector<double>>;

/// Peels non-dominated layers with an O(n^2 m) pairwise scan per layer.
std::vector<std::vector<std::size_t>> brute_force_fronts(const Points& pts);
/// Indices of points no other point dominates.
std::vector<std::size_t> brute_force_nondominated(const Points& pts);

struct Estimate {
  double value = 0;
  double standard_error = 0;
};

/// Uniform sampling of the box [min(front), ref]; counts samples dominated
/// by at least one point.
Estimate monte_carlo_hypervolume(const Points& front, const std::vector<double>& ref, std::size_t samples,
                                 std::uint64_t seed);

/// Mean class-weighted cross-entropy by explicit loops over units.
double network_loss(const DecodedArchitecture& arch, const WeightSet& w, const Eigen::MatrixXd& x,
                    const Eigen::VectorXd& y, std::pair<double, double> class_weights);

/// Central differences of network_loss for every parameter.
WeightSet finite_difference_gradient(const DecodedArchitecture& arch, const WeightSet& w, const Eigen::MatrixXd& x,
                                     const Eigen::VectorXd& y, std::pair<double, double> class_weights,
                                     double step = 1e-5);

/// Largest |a - b| / max(|a| + |b|, floor) over all parameters.
double max_relative_error(const WeightSet& a, const WeightSet& b, double floor = 1e-8);

/// Within-block permutation test of equal treatment effects using the
/// rank-sum spread as statistic; p = share of permutations at least as extreme.
double permutation_friedman_p(const std::vector<std::vector<double>>& m, std::size_t permutations,
                              std::uint64_t seed);

/// Textbook form 12/(nk(k+1)) sum R_j^2 - 3n(k+1), divided by the tie
/// correction 1 - sum(t^3 - t)/(n(k^3 - k)); rank 1 = largest value.
double friedman_statistic(const std::vector<std::vector<double>>& m);

/// Closed testing with Simes' local tests over every subset (exponential; <= 12 hypotheses).
std::vector<double> closed_testing_hommel(const std::vector<double>& raw_p);

/// Full-batch logistic regression, then balanced error on the same data.
double logistic_regression_balanced_error(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int iterations = 3000,
                                          double learning_rate = 0.5);

}  // namespace coevo::oracle
