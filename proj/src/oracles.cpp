#include "coevo/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "coevo/seeding.hpp"

namespace coevo::oracle {

namespace {

bool better_or_equal_everywhere_and_strictly_somewhere(const std::vector<double>& a, const std::vector<double>& b) {
  std::size_t le = 0, lt = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    le += a[k] <= b[k];
    lt += a[k] < b[k];
  }
  return le == a.size() && lt > 0;
}

}  // namespace

std::vector<std::size_t> brute_force_nondominated(const Points& pts) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::size_t dominators = 0;
    for (std::size_t j = 0; j < pts.size(); ++j) dominators += better_or_equal_everywhere_and_strictly_somewhere(pts[j], pts[i]);
    if (dominators == 0) out.push_back(i);
  }
  return out;
}

std::vector<std::vector<std::size_t>> brute_force_fronts(const Points& pts) {
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> remaining(pts.size());
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  while (!remaining.empty()) {
    Points sub;
    for (auto i : remaining) sub.push_back(pts[i]);
    std::vector<std::size_t> layer, rest;
    std::vector<char> in_layer(sub.size(), 0);
    for (auto k : brute_force_nondominated(sub)) in_layer[k] = 1;
    for (std::size_t k = 0; k < sub.size(); ++k) (in_layer[k] ? layer : rest).push_back(remaining[k]);
    fronts.push_back(layer);
    remaining = rest;
  }
  return fronts;
}

Estimate monte_carlo_hypervolume(const Points& front, const std::vector<double>& ref, std::size_t samples,
                                 std::uint64_t seed) {
  const std::size_t m = ref.size();
  Points inside;
  for (const auto& p : front) {
    bool ok = true;
    for (std::size_t k = 0; k < m; ++k) ok = ok && p[k] < ref[k];
    if (ok) inside.push_back(p);
  }
  if (inside.empty() || samples == 0) return {};
  std::sort(inside.begin(), inside.end());
  std::vector<double> lo(ref);
  for (const auto& p : inside) {
    for (std::size_t k = 0; k < m; ++k) lo[k] = std::min(lo[k], p[k]);
  }
  double box = 1;
  for (std::size_t k = 0; k < m; ++k) box *= ref[k] - lo[k];
  Rng rng(seed);
  std::vector<double> s(m);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < samples; ++t) {
    for (std::size_t k = 0; k < m; ++k) s[k] = lo[k] + uniform01(rng) * (ref[k] - lo[k]);
    for (const auto& p : inside) {
      if (p[0] > s[0]) break;
      bool dom = true;
      for (std::size_t k = 0; k < m && dom; ++k) dom = p[k] <= s[k];
      if (dom) {
        ++hits;
        break;
      }
    }
  }
  const double frac = static_cast<double>(hits) / static_cast<double>(samples);
  return {frac * box, box * std::sqrt(frac * (1 - frac) / static_cast<double>(samples))};
}

double network_loss(const DecodedArchitecture& arch, const WeightSet& w, const Eigen::MatrixXd& x,
                    const Eigen::VectorXd& y, std::pair<double, double> class_weights) {
  std::vector<Activation> acts;
  for (const auto& l : arch.layers) {
    if (l.size > 0) acts.push_back(l.activation);
  }
  if (w.weights.size() != acts.size() + 1) throw std::invalid_argument("weights do not match architecture");
  double total = 0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    std::vector<double> a(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index c = 0; c < x.cols(); ++c) a[static_cast<std::size_t>(c)] = x(r, c);
    for (std::size_t layer = 0; layer < w.weights.size(); ++layer) {
      const auto& W = w.weights[layer];
      std::vector<double> z(static_cast<std::size_t>(W.cols()));
      for (Eigen::Index j = 0; j < W.cols(); ++j) {
        double s = w.biases[layer](j);
        for (Eigen::Index i = 0; i < W.rows(); ++i) s += a[static_cast<std::size_t>(i)] * W(i, j);
        z[static_cast<std::size_t>(j)] = s;
      }
      if (layer < acts.size()) {
        for (auto& v : z) v = acts[layer] == Activation::Tansig ? std::tanh(v) : 1.0 / (1.0 + std::exp(-v));
      }
      a = z;
    }
    const double p = 1.0 / (1.0 + std::exp(-a[0]));
    const bool pos = y(r) > 0.5;
    total += (pos ? class_weights.second : class_weights.first) * -(pos ? std::log(p) : std::log(1 - p));
  }
  return total / static_cast<double>(x.rows());
}

WeightSet finite_difference_gradient(const DecodedArchitecture& arch, const WeightSet& w, const Eigen::MatrixXd& x,
                                     const Eigen::VectorXd& y, std::pair<double, double> cw, double step) {
  WeightSet g = w;
  WeightSet probe = w;
  for (std::size_t l = 0; l < w.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < w.weights[l].size(); ++i) {
      const double orig = w.weights[l].data()[i];
      probe.weights[l].data()[i] = orig + step;
      const double up = network_loss(arch, probe, x, y, cw);
      probe.weights[l].data()[i] = orig - step;
      const double down = network_loss(arch, probe, x, y, cw);
      probe.weights[l].data()[i] = orig;
      g.weights[l].data()[i] = (up - down) / (2 * step);
    }
    for (Eigen::Index i = 0; i < w.biases[l].size(); ++i) {
      const double orig = w.biases[l](i);
      probe.biases[l](i) = orig + step;
      const double up = network_loss(arch, probe, x, y, cw);
      probe.biases[l](i) = orig - step;
      const double down = network_loss(arch, probe, x, y, cw);
      probe.biases[l](i) = orig;
      g.biases[l](i) = (up - down) / (2 * step);
    }
  }
  return g;
}

double max_relative_error(const WeightSet& a, const WeightSet& b, double floor) {
  if (a.weights.size() != b.weights.size()) throw std::invalid_argument("weight sets differ in depth");
  double worst = 0;
  auto cmp = [&](double u, double v) { worst = std::max(worst, std::abs(u - v) / std::max(std::abs(u) + std::abs(v), floor)); };
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < a.weights[l].size(); ++i) cmp(a.weights[l].data()[i], b.weights[l].data()[i]);
    for (Eigen::Index i = 0; i < a.biases[l].size(); ++i) cmp(a.biases[l](i), b.biases[l](i));
  }
  return worst;
}

namespace {

std::vector<double> ranks_descending(const std::vector<double>& row) {
  std::vector<double> r(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) {
    double greater = 0, equal = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      greater += row[j] > row[i];
      equal += row[j] == row[i];
    }
    r[i] = greater + (equal + 1) / 2.0;
  }
  return r;
}

double spread(const std::vector<std::vector<double>>& ranks) {
  const std::size_t k = ranks[0].size();
  std::vector<double> sums(k, 0.0);
  for (const auto& r : ranks) {
    for (std::size_t j = 0; j < k; ++j) sums[j] += r[j];
  }
  const double centre = static_cast<double>(ranks.size()) * (static_cast<double>(k) + 1) / 2;
  double s = 0;
  for (double v : sums) s += (v - centre) * (v - centre);
  return s;
}

}  // namespace

double permutation_friedman_p(const std::vector<std::vector<double>>& m, std::size_t permutations, std::uint64_t seed) {
  std::vector<std::vector<double>> ranks;
  for (const auto& row : m) ranks.push_back(ranks_descending(row));
  const double observed = spread(ranks);
  Rng rng(seed);
  std::size_t extreme = 0;
  auto shuffled = ranks;
  for (std::size_t t = 0; t < permutations; ++t) {
    for (auto& r : shuffled) {
      for (std::size_t i = r.size(); i > 1; --i) std::swap(r[i - 1], r[uniform_index(rng, i)]);
    }
    if (spread(shuffled) >= observed - 1e-9) ++extreme;
  }
  return static_cast<double>(extreme) / static_cast<double>(permutations);
}

double friedman_statistic(const std::vector<std::vector<double>>& m) {
  const double n = static_cast<double>(m.size());
  const std::size_t kk = m[0].size();
  const double k = static_cast<double>(kk);
  std::vector<double> sums(kk, 0.0);
  double tie_sum = 0;
  for (const auto& row : m) {
    const auto r = ranks_descending(row);
    for (std::size_t j = 0; j < kk; ++j) sums[j] += r[j];
    for (std::size_t j = 0; j < kk; ++j) {
      bool first = true;
      double t = 0;
      for (std::size_t i = 0; i < kk; ++i) {
        if (row[i] == row[j]) {
          ++t;
          first = first && i >= j;
        }
      }
      if (first) tie_sum += t * t * t - t;
    }
  }
  double sq = 0;
  for (double v : sums) sq += v * v;
  const double q = 12.0 / (n * k * (k + 1)) * sq - 3 * n * (k + 1);
  return q / (1 - tie_sum / (n * (k * k * k - k)));
}

std::vector<double> closed_testing_hommel(const std::vector<double>& raw_p) {
  const std::size_t n = raw_p.size();
  if (n > 12) throw std::invalid_argument("closed testing oracle limited to 12 hypotheses");
  std::vector<double> apv(n, 0.0);
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<double> ps;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) ps.push_back(raw_p[i]);
    }
    std::sort(ps.begin(), ps.end());
    double simes = 1.0;
    for (std::size_t j = 0; j < ps.size(); ++j) {
      simes = std::min(simes, static_cast<double>(ps.size()) * ps[j] / static_cast<double>(j + 1));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) apv[i] = std::max(apv[i], simes);
    }
  }
  return apv;
}

double logistic_regression_balanced_error(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int iterations,
                                          double learning_rate) {
  const Eigen::Index n = x.rows(), d = x.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  double b0 = 0;
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(d);
    double g0 = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = 1.0 / (1.0 + std::exp(-(x.row(i).dot(beta) + b0)));
      grad += (p - y(i)) * x.row(i).transpose();
      g0 += p - y(i);
    }
    beta -= learning_rate * grad / static_cast<double>(n);
    b0 -= learning_rate * g0 / static_cast<double>(n);
  }
  double tp = 0, tn = 0, pos = 0, neg = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool pred = x.row(i).dot(beta) + b0 > 0;
    if (y(i) > 0.5) {
      ++pos;
      tp += pred;
    } else {
      ++neg;
      tn += !pred;
    }
  }
  return 1.0 - 0.5 * (tp / pos + tn / neg);
}

}  // namespace coevo::oracle
