#include "coevo/neural_model.hpp"

#include <cmath>
#include <numeric>

#include "coevo/errors.hpp"
#include "coevo/seeding.hpp"

namespace coevo {

namespace {

struct Layout {
  std::vector<int> widths;  // input, hidden..., 1
  std::vector<Activation> acts;  // one per hidden layer
};

Layout layout_of(const DecodedArchitecture& arch) {
  Layout l;
  l.widths.push_back(static_cast<int>(arch.features.size()));
  for (const auto& h : arch.active_layers()) {
    l.widths.push_back(h.size);
    l.acts.push_back(h.activation);
  }
  l.widths.push_back(1);
  return l;
}

void check_shapes(const Layout& l, const WeightSet& w) {
  const std::size_t n = l.widths.size() - 1;
  if (w.weights.size() != n || w.biases.size() != n) throw ShapeError("weight set does not match architecture");
  for (std::size_t i = 0; i < n; ++i) {
    if (w.weights[i].rows() != l.widths[i] || w.weights[i].cols() != l.widths[i + 1] ||
        w.biases[i].size() != l.widths[i + 1]) {
      throw ShapeError("weight set does not match architecture");
    }
  }
}

void activate(Eigen::MatrixXd& z, Activation act) {
  if (act == Activation::Tansig) {
    z = z.array().tanh();
  } else {
    z = (1.0 + (-z.array()).exp()).inverse();
  }
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(1 + e^{-|z|}) + max(z, 0) - z*y: cross-entropy from a logit, stable for large |z|.
double bce_from_logit(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

/// Forward pass keeping every layer's activation; acts[0] is the input.
struct Trace {
  std::vector<Eigen::MatrixXd> acts;
  Eigen::VectorXd logits;
};

void forward_trace(const Layout& l, const WeightSet& w, const Eigen::MatrixXd& x, Trace& t) {
  const std::size_t hidden = l.acts.size();
  t.acts.resize(hidden + 1);
  t.acts[0] = x;
  for (std::size_t k = 0; k < hidden; ++k) {
    t.acts[k + 1].noalias() = t.acts[k] * w.weights[k];
    t.acts[k + 1].rowwise() += w.biases[k].transpose();
    activate(t.acts[k + 1], l.acts[k]);
  }
  t.logits.noalias() = t.acts[hidden] * w.weights[hidden].col(0);
  t.logits.array() += w.biases[hidden](0);
}

/// Gradient of the mean weighted loss; fills `grad` (same shapes as w).
double backward(const Layout& l, const WeightSet& w, const Trace& t, const Eigen::VectorXd& y,
                std::pair<double, double> cw, WeightSet& grad) {
  const auto n = static_cast<double>(y.size());
  const std::size_t hidden = l.acts.size();
  Eigen::VectorXd dz(y.size());
  double loss = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double c = y(i) > 0.5 ? cw.second : cw.first;
    loss += c * bce_from_logit(t.logits(i), y(i));
    dz(i) = c * (logistic(t.logits(i)) - y(i)) / n;
  }
  grad.weights.resize(hidden + 1);
  grad.biases.resize(hidden + 1);
  grad.weights[hidden].noalias() = t.acts[hidden].transpose() * dz;
  grad.biases[hidden] = Eigen::VectorXd::Constant(1, dz.sum());

  Eigen::MatrixXd delta;
  if (hidden > 0) delta.noalias() = dz * w.weights[hidden].transpose();
  for (std::size_t k = hidden; k-- > 0;) {
    const auto& a = t.acts[k + 1];
    if (l.acts[k] == Activation::Tansig) {
      delta.array() *= 1.0 - a.array().square();
    } else {
      delta.array() *= a.array() * (1.0 - a.array());
    }
    grad.weights[k].noalias() = t.acts[k].transpose() * delta;
    grad.biases[k] = delta.colwise().sum().transpose();
    if (k > 0) {
      Eigen::MatrixXd next;
      next.noalias() = delta * w.weights[k].transpose();
      delta.swap(next);
    }
  }
  return loss / n;
}

}  // namespace

std::size_t WeightSet::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) n += weights[i].size() + biases[i].size();
  return n;
}

bool WeightSet::all_finite() const {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!weights[i].allFinite() || !biases[i].allFinite()) return false;
  }
  return true;
}

bool operator==(const WeightSet& a, const WeightSet& b) {
  if (a.weights.size() != b.weights.size() || a.biases.size() != b.biases.size()) return false;
  for (std::size_t i = 0; i < a.weights.size(); ++i) {
    if (a.weights[i].rows() != b.weights[i].rows() || a.weights[i].cols() != b.weights[i].cols()) return false;
    if (a.weights[i] != b.weights[i] || a.biases[i] != b.biases[i]) return false;
  }
  return true;
}

LabeledMatrix to_matrix(const FeatureDataset& ds) {
  LabeledMatrix m;
  const auto rows = static_cast<Eigen::Index>(ds.rows());
  const auto cols = static_cast<Eigen::Index>(ds.feature_count());
  m.x.resize(rows, cols);
  m.y.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m.x(r, c) = ds.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    m.y(r) = ds.label(static_cast<std::size_t>(r));
  }
  return m;
}

LabeledMatrix project(const LabeledMatrix& full, std::span<const int> features) {
  LabeledMatrix m;
  m.x.resize(full.x.rows(), static_cast<Eigen::Index>(features.size()));
  for (std::size_t j = 0; j < features.size(); ++j) {
    if (features[j] < 0 || features[j] >= full.x.cols()) throw ShapeError("feature index outside dataset");
    m.x.col(static_cast<Eigen::Index>(j)) = full.x.col(features[j]);
  }
  m.y = full.y;
  return m;
}

LabeledMatrix project(const FeatureDataset& ds, std::span<const int> features) {
  return project(to_matrix(ds), features);
}

WeightSet init_weights(const DecodedArchitecture& arch, std::uint64_t seed) {
  const Layout l = layout_of(arch);
  Rng rng(mix_seed(seed, 0x1417));
  WeightSet w;
  for (std::size_t i = 0; i + 1 < l.widths.size(); ++i) {
    const int in = l.widths[i], out = l.widths[i + 1];
    const double r = std::sqrt(6.0 / (in + out));
    Eigen::MatrixXd m(in, out);
    for (Eigen::Index c = 0; c < out; ++c) {
      for (Eigen::Index rr = 0; rr < in; ++rr) m(rr, c) = r * (2.0 * uniform01(rng) - 1.0);
    }
    w.weights.push_back(std::move(m));
    w.biases.push_back(Eigen::VectorXd::Zero(out));
  }
  return w;
}

Eigen::VectorXd forward_logits(const DecodedArchitecture& arch, const WeightSet& weights, const Eigen::MatrixXd& x) {
  const Layout l = layout_of(arch);
  check_shapes(l, weights);
  if (x.cols() != l.widths.front()) {
    throw ShapeError("input has " + std::to_string(x.cols()) + " columns, architecture expects " +
                     std::to_string(l.widths.front()));
  }
  Trace t;
  forward_trace(l, weights, x, t);
  return t.logits;
}

double forward(const DecodedArchitecture& arch, const WeightSet& weights, std::span<const double> x) {
  Eigen::MatrixXd row(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) row(0, static_cast<Eigen::Index>(j)) = x[j];
  return logistic(forward_logits(arch, weights, row)(0));
}

std::pair<double, double> class_weights(const Eigen::VectorXd& y) {
  const double n = static_cast<double>(y.size());
  const double pos = (y.array() > 0.5).count();
  const double neg = n - pos;
  if (pos == 0 || neg == 0) throw DegenerateDataError("training data must contain both classes");
  return {n / (2.0 * neg), n / (2.0 * pos)};
}

LossGradient loss_and_gradient(const DecodedArchitecture& arch, const WeightSet& weights, const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y, std::pair<double, double> weights_by_class) {
  const Layout l = layout_of(arch);
  check_shapes(l, weights);
  if (x.cols() != l.widths.front() || x.rows() != y.size()) throw ShapeError("data does not match architecture");
  Trace t;
  forward_trace(l, weights, x, t);
  LossGradient out;
  out.loss = backward(l, weights, t, y, weights_by_class, out.gradient);
  return out;
}

WeightSet train(const DecodedArchitecture& arch, const WeightSet& weights0, const LabeledMatrix& data,
                const TrainConfig& cfg) {
  const Layout l = layout_of(arch);
  check_shapes(l, weights0);
  if (data.x.cols() != l.widths.front()) throw ShapeError("training data does not match architecture inputs");
  if (cfg.batch_size <= 0 || cfg.learning_rate <= 0 || cfg.max_epochs < 0 || cfg.patience <= 0) {
    throw std::invalid_argument("invalid training configuration");
  }
  const auto cw = class_weights(data.y);
  WeightSet w = weights0;
  if (cfg.max_epochs == 0) return w;

  WeightSet velocity = w;
  for (std::size_t i = 0; i < velocity.weights.size(); ++i) {
    velocity.weights[i].setZero();
    velocity.biases[i].setZero();
  }
  const std::size_t n = data.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(cfg.seed, 0x7a11));

  Eigen::MatrixXd xb;
  Eigen::VectorXd yb;
  Trace trace;
  WeightSet grad;
  double best = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    double epoch_loss = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t b = std::min(static_cast<std::size_t>(cfg.batch_size), n - start);
      xb.resize(static_cast<Eigen::Index>(b), data.x.cols());
      yb.resize(static_cast<Eigen::Index>(b));
      for (std::size_t r = 0; r < b; ++r) {
        xb.row(static_cast<Eigen::Index>(r)) = data.x.row(static_cast<Eigen::Index>(order[start + r]));
        yb(static_cast<Eigen::Index>(r)) = data.y(static_cast<Eigen::Index>(order[start + r]));
      }
      forward_trace(l, w, xb, trace);
      epoch_loss += backward(l, w, trace, yb, cw, grad) * static_cast<double>(b);
      for (std::size_t k = 0; k < w.weights.size(); ++k) {
        velocity.weights[k] = cfg.momentum * velocity.weights[k] - cfg.learning_rate * grad.weights[k];
        velocity.biases[k] = cfg.momentum * velocity.biases[k] - cfg.learning_rate * grad.biases[k];
        w.weights[k] += velocity.weights[k];
        w.biases[k] += velocity.biases[k];
      }
    }
    epoch_loss /= static_cast<double>(n);
    if (epoch_loss < best - cfg.min_improvement) {
      best = epoch_loss;
      stalled = 0;
    } else if (++stalled >= cfg.patience) {
      break;
    }
  }
  return w;
}

WeightSet train(const DecodedArchitecture& arch, const WeightSet& weights0, const FeatureDataset& train_set,
                const TrainConfig& cfg) {
  return train(arch, weights0, project(train_set, arch.features), cfg);
}

EvalReport score_predictions(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.empty()) throw EmptyDataError("cannot evaluate on an empty dataset");
  if (truth.size() != predicted.size()) throw ShapeError("truth and prediction lengths differ");
  EvalReport r;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 1) (predicted[i] == 1 ? r.tp : r.fn)++;
    else (predicted[i] == 1 ? r.fp : r.tn)++;
  }
  const double tp = static_cast<double>(r.tp), tn = static_cast<double>(r.tn);
  const double fp = static_cast<double>(r.fp), fn = static_cast<double>(r.fn);
  r.overall_accuracy = (tp + tn) / static_cast<double>(truth.size());
  double recall_sum = 0;
  int present = 0;
  if (tp + fn > 0) {
    recall_sum += tp / (tp + fn);
    ++present;
  }
  if (tn + fp > 0) {
    recall_sum += tn / (tn + fp);
    ++present;
  }
  r.balanced_accuracy = recall_sum / present;
  r.balanced_error = 1.0 - r.balanced_accuracy;
  const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  r.mcc = den == 0 ? 0.0 : (tp * tn - fp * fn) / std::sqrt(den);
  return r;
}

EvalReport evaluate(const DecodedArchitecture& arch, const WeightSet& weights, const LabeledMatrix& data) {
  if (data.rows() == 0) throw EmptyDataError("cannot evaluate on an empty dataset");
  const Eigen::VectorXd z = forward_logits(arch, weights, data.x);
  std::vector<int> truth(data.rows()), pred(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    truth[i] = data.y(static_cast<Eigen::Index>(i)) > 0.5 ? 1 : 0;
    pred[i] = z(static_cast<Eigen::Index>(i)) > 0.0 ? 1 : 0;
  }
  return score_predictions(truth, pred);
}

EvalReport evaluate(const DecodedArchitecture& arch, const WeightSet& weights, const FeatureDataset& ds) {
  if (ds.empty()) throw EmptyDataError("cannot evaluate on an empty dataset");
  return evaluate(arch, weights, project(ds, arch.features));
}

}  // namespace coevo
