#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "coevo/architecture.hpp"
#include "coevo/market_data.hpp"

namespace coevo {

/// One weight matrix (fan_in x fan_out) and bias per active hidden layer, then
/// the single-unit sigmoid output layer.
struct WeightSet {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  std::size_t parameter_count() const;
  bool all_finite() const;
  friend bool operator==(const WeightSet& a, const WeightSet& b);
};

struct TrainConfig {
  int max_epochs = 200;
  int batch_size = 32;
  double learning_rate = 0.01;
  double momentum = 0.9;
  int patience = 10;
  double min_improvement = 1e-5;
  std::uint64_t seed = 1;
};

struct EvalReport {
  double overall_accuracy = 0;
  double balanced_accuracy = 0;
  double balanced_error = 0;
  double mcc = 0;
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
};

/// Design matrix restricted to an architecture's inputs plus 0/1 targets.
struct LabeledMatrix {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::size_t rows() const { return static_cast<std::size_t>(x.rows()); }
};

/// Projects `ds` onto the selected feature columns.
LabeledMatrix project(const FeatureDataset& ds, std::span<const int> features);
LabeledMatrix project(const LabeledMatrix& full, std::span<const int> features);
LabeledMatrix to_matrix(const FeatureDataset& ds);

/// Uniform in +-sqrt(6 / (fan_in + fan_out)); biases start at zero.
WeightSet init_weights(const DecodedArchitecture& arch, std::uint64_t seed);

/// Output probability for one input already restricted to arch.features.
double forward(const DecodedArchitecture& arch, const WeightSet& weights, std::span<const double> x);
/// Pre-sigmoid output for every row.
Eigen::VectorXd forward_logits(const DecodedArchitecture& arch, const WeightSet& weights, const Eigen::MatrixXd& x);

struct LossGradient {
  double loss = 0;
  WeightSet gradient;
};

/// Inverse-frequency class weights n / (2 n_c). Throws DegenerateDataError
/// when either class is missing.
std::pair<double, double> class_weights(const Eigen::VectorXd& y);

/// Mean class-weighted binary cross-entropy and its gradient.
LossGradient loss_and_gradient(const DecodedArchitecture& arch, const WeightSet& weights, const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y, std::pair<double, double> weights_by_class);

/// Mini-batch gradient descent with momentum. Stops after max_epochs or once
/// the epoch loss has failed to improve by min_improvement `patience` times
/// in a row.
WeightSet train(const DecodedArchitecture& arch, const WeightSet& weights0, const LabeledMatrix& data,
                const TrainConfig& cfg);
WeightSet train(const DecodedArchitecture& arch, const WeightSet& weights0, const FeatureDataset& train_set,
                const TrainConfig& cfg);

EvalReport evaluate(const DecodedArchitecture& arch, const WeightSet& weights, const LabeledMatrix& data);
EvalReport evaluate(const DecodedArchitecture& arch, const WeightSet& weights, const FeatureDataset& ds);
/// Metrics from label/prediction pairs. Classes absent from `truth` are left
/// out of the balanced accuracy average; MCC is 0 when its denominator is.
EvalReport score_predictions(std::span<const int> truth, std::span<const int> predicted);

}  // namespace coevo
