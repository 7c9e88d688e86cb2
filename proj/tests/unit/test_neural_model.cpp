#include <doctest.h>

#include <cmath>
#include <numeric>

#include "coevo/errors.hpp"
#include "coevo/neural_model.hpp"
#include "coevo/oracles.hpp"

using namespace coevo;

namespace {

DecodedArchitecture arch_of(int features, std::vector<HiddenLayer> layers) {
  DecodedArchitecture a;
  a.features.resize(static_cast<std::size_t>(features));
  std::iota(a.features.begin(), a.features.end(), 0);
  layers.resize(2);
  a.layers = layers;
  return a;
}

LabeledMatrix blobs(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  LabeledMatrix m{Eigen::MatrixXd(static_cast<Eigen::Index>(n), 2), Eigen::VectorXd(static_cast<Eigen::Index>(n))};
  for (Eigen::Index i = 0; i < m.x.rows(); ++i) {
    const bool pos = i % 2 == 0;
    m.y(i) = pos ? 1.0 : 0.0;
    m.x(i, 0) = (pos ? 2.0 : -2.0) + 0.5 * standard_normal(rng);
    m.x(i, 1) = (pos ? 1.5 : -1.5) + 0.5 * standard_normal(rng);
  }
  return m;
}

}  // namespace

TEST_CASE("init_weights is deterministic with Glorot shapes") {
  const auto a = arch_of(5, {{32, Activation::Tansig}});
  const auto w1 = init_weights(a, 7);
  CHECK(w1 == init_weights(a, 7));
  CHECK_FALSE(w1 == init_weights(a, 8));
  REQUIRE(w1.weights.size() == 2);
  CHECK(w1.weights[0].rows() == 5);
  CHECK(w1.weights[0].cols() == 32);
  CHECK(w1.biases[0].size() == 32);
  CHECK(w1.weights[1].rows() == 32);
  CHECK(w1.weights[1].cols() == 1);
  CHECK(w1.biases[1].size() == 1);
  const double r = std::sqrt(6.0 / 37.0);
  CHECK(w1.weights[0].cwiseAbs().maxCoeff() <= r);
}

TEST_CASE("zero-size layers are skipped") {
  const auto a = arch_of(3, {{0, Activation::Tansig}, {4, Activation::Logsig}});
  const auto w = init_weights(a, 1);
  REQUIRE(w.weights.size() == 2);
  CHECK(w.weights[0].rows() == 3);
  CHECK(w.weights[0].cols() == 4);
}

TEST_CASE("forward: zero weights give 0.5, shapes are checked") {
  const auto a = arch_of(3, {{4, Activation::Tansig}});
  auto w = init_weights(a, 1);
  for (auto& m : w.weights) m.setZero();
  for (auto& b : w.biases) b.setZero();
  const double x[3] = {1, -2, 3};
  CHECK(forward(a, w, x) == 0.5);
  const double bad[2] = {1, 2};
  CHECK_THROWS_AS(forward(a, w, bad), ShapeError);
}

TEST_CASE("forward: tansig saturates and a logsig unit composes by hand") {
  auto a = arch_of(1, {{1, Activation::Tansig}});
  WeightSet w;
  w.weights = {Eigen::MatrixXd::Constant(1, 1, 100.0), Eigen::MatrixXd::Constant(1, 1, 1.0)};
  w.biases = {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)};
  const double x1 = 1.0;
  const double p = forward(a, w, std::span<const double>(&x1, 1));
  CHECK(std::abs(p - 1.0 / (1.0 + std::exp(-1.0))) < 1e-6);

  a = arch_of(1, {{1, Activation::Logsig}});
  const double w_out = 1.7, b_out = -0.3;
  w.weights = {Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::MatrixXd::Constant(1, 1, w_out)};
  w.biases = {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, b_out)};
  const double x0 = 0.0;
  const double expected = 1.0 / (1.0 + std::exp(-(w_out * 0.5 + b_out)));
  CHECK(forward(a, w, std::span<const double>(&x0, 1)) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("forward is invariant to feature order with permuted weight rows") {
  const auto a = arch_of(3, {{5, Activation::Tansig}, {3, Activation::Logsig}});
  const auto w = init_weights(a, 4);
  auto w2 = w;
  const int perm[3] = {2, 0, 1};
  for (int i = 0; i < 3; ++i) w2.weights[0].row(i) = w.weights[0].row(perm[i]);
  const double x[3] = {0.3, -1.2, 0.8};
  const double xp[3] = {x[perm[0]], x[perm[1]], x[perm[2]]};
  CHECK(forward(a, w, x) == doctest::Approx(forward(a, w2, xp)).epsilon(1e-14));
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const int f = 1 + static_cast<int>(uniform_index(rng, 4));
    const auto a = arch_of(f, {{1 + static_cast<int>(uniform_index(rng, 10)), trial % 2 ? Activation::Logsig : Activation::Tansig},
                               {static_cast<int>(uniform_index(rng, 11)), trial % 3 ? Activation::Tansig : Activation::Logsig}});
    Eigen::MatrixXd x(9, f);
    Eigen::VectorXd y(9);
    for (int i = 0; i < 9; ++i) {
      for (int j = 0; j < f; ++j) x(i, j) = standard_normal(rng);
      y(i) = i % 3 == 0 ? 1.0 : 0.0;
    }
    const auto w = init_weights(a, rng());
    const auto cw = class_weights(y);
    const auto lg = loss_and_gradient(a, w, x, y, cw);
    CHECK(lg.loss == doctest::Approx(oracle::network_loss(a, w, x, y, cw)).epsilon(1e-12));
    CHECK(oracle::max_relative_error(lg.gradient, oracle::finite_difference_gradient(a, w, x, y, cw)) < 1e-4);
  }
}

TEST_CASE("class weights are inverse frequency; single class is degenerate") {
  Eigen::VectorXd y(4);
  y << 1, 0, 0, 0;
  const auto cw = class_weights(y);
  CHECK(cw.first == doctest::Approx(4.0 / 6.0));
  CHECK(cw.second == doctest::Approx(2.0));
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(4);
  CHECK_THROWS_AS(class_weights(ones), DegenerateDataError);
}

TEST_CASE("train: zero epochs is a no-op; training is deterministic") {
  const auto a = arch_of(2, {{8, Activation::Tansig}});
  const auto data = blobs(60, 1);
  const auto w0 = init_weights(a, 3);
  TrainConfig cfg;
  cfg.max_epochs = 0;
  CHECK(train(a, w0, data, cfg) == w0);
  cfg.max_epochs = 20;
  CHECK(train(a, w0, data, cfg) == train(a, w0, data, cfg));
}

TEST_CASE("train: single-class data is rejected") {
  const auto a = arch_of(2, {{3, Activation::Tansig}});
  auto data = blobs(20, 1);
  data.y.setZero();
  CHECK_THROWS_AS(train(a, init_weights(a, 1), data, TrainConfig{}), DegenerateDataError);
}

TEST_CASE("train separates blobs as well as logistic regression") {
  const auto data = blobs(200, 17);
  const double oracle_error = oracle::logistic_regression_balanced_error(data.x, data.y);
  REQUIRE(oracle_error < 0.05);
  const auto a = arch_of(2, {{8, Activation::Tansig}});
  TrainConfig cfg;
  const auto w = train(a, init_weights(a, 5), data, cfg);
  CHECK(evaluate(a, w, data).balanced_error < 0.05);
}

TEST_CASE("metrics from confusion counts") {
  std::vector<int> truth, pred;
  auto push = [&](int t, int p, int n) {
    for (int i = 0; i < n; ++i) {
      truth.push_back(t);
      pred.push_back(p);
    }
  };
  push(1, 1, 40);
  push(0, 0, 30);
  push(0, 1, 20);
  push(1, 0, 10);
  const auto r = score_predictions(truth, pred);
  CHECK(r.tp == 40);
  CHECK(r.tn == 30);
  CHECK(r.fp == 20);
  CHECK(r.fn == 10);
  CHECK(r.overall_accuracy == doctest::Approx(0.70));
  CHECK(r.balanced_accuracy == doctest::Approx(0.70));
  const double mcc = (40.0 * 30 - 20.0 * 10) / std::sqrt(60.0 * 50 * 50 * 40);
  CHECK(r.mcc == doctest::Approx(mcc).epsilon(1e-12));
  CHECK(r.mcc == doctest::Approx(0.4082).epsilon(1e-3));
  CHECK(r.balanced_error + r.balanced_accuracy == 1.0);
}

TEST_CASE("metrics: perfect, majority-bias and label symmetry") {
  const std::vector<int> truth = {1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
  const auto perfect = score_predictions(truth, truth);
  CHECK(perfect.balanced_error == 0.0);
  CHECK(perfect.mcc == 1.0);
  const std::vector<int> all_one(truth.size(), 1);
  const auto biased = score_predictions(truth, all_one);
  CHECK(biased.balanced_accuracy == 0.5);
  CHECK(biased.mcc == 0.0);

  const std::vector<int> pred = {1, 0, 1, 1, 0, 0, 1, 0, 0, 0};
  std::vector<int> t2, p2;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    t2.push_back(1 - truth[i]);
    p2.push_back(1 - pred[i]);
  }
  CHECK(std::abs(score_predictions(truth, pred).mcc) == doctest::Approx(std::abs(score_predictions(t2, p2).mcc)));
  CHECK_THROWS_AS(score_predictions(std::vector<int>{}, std::vector<int>{}), EmptyDataError);
}

TEST_CASE("balanced accuracy skips a class absent from the data") {
  const std::vector<int> truth = {0, 0, 0};
  const std::vector<int> pred = {0, 1, 0};
  const auto r = score_predictions(truth, pred);
  CHECK(r.balanced_accuracy == doctest::Approx(2.0 / 3.0));
}
