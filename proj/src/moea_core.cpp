#include "coevo/moea_core.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "coevo/errors.hpp"

namespace coevo {

bool dominates(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("objective vectors differ in length");
  bool strict = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] > b[k]) return false;
    if (a[k] < b[k]) strict = true;
  }
  return strict;
}

std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const ObjectiveVector> points) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> dominated_by(n);
  std::vector<std::size_t> count(n, 0);
  std::vector<std::vector<std::size_t>> fronts;
  if (n == 0) return fronts;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dominates(points[i], points[j])) {
        dominated_by[i].push_back(j);
        ++count[j];
      } else if (dominates(points[j], points[i])) {
        dominated_by[j].push_back(i);
        ++count[i];
      }
    }
  }
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i) {
    if (count[i] == 0) current.push_back(i);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (auto i : current) {
      for (auto j : dominated_by[i]) {
        if (--count[j] == 0) next.push_back(j);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

std::vector<std::size_t> nondominated_indices(std::span<const ObjectiveVector> points) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
      dominated = j != i && dominates(points[j], points[i]);
    }
    if (!dominated) out.push_back(i);
  }
  return out;
}

std::vector<double> crowding_distance(std::span<const ObjectiveVector> front) {
  const std::size_t n = front.size();
  std::vector<double> dist(n, 0.0);
  if (n == 0) return dist;
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (n <= 2) {
    std::fill(dist.begin(), dist.end(), inf);
    return dist;
  }
  const std::size_t m = front[0].size();
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < m; ++k) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return front[a][k] < front[b][k]; });
    dist[order.front()] = inf;
    dist[order.back()] = inf;
    const double range = front[order.back()][k] - front[order.front()][k];
    if (range <= 0) continue;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      dist[order[i]] += (front[order[i + 1]][k] - front[order[i - 1]][k]) / range;
    }
  }
  return dist;
}

namespace {

void lattice(int m, int remaining, int divisions, ObjectiveVector& cur, std::vector<ObjectiveVector>& out) {
  if (static_cast<int>(cur.size()) == m - 1) {
    cur.push_back(static_cast<double>(remaining) / divisions);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int i = 0; i <= remaining; ++i) {
    cur.push_back(static_cast<double>(i) / divisions);
    lattice(m, remaining - i, divisions, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<ObjectiveVector> das_dennis_weights(int objectives, int divisions) {
  if (objectives < 2 || divisions < 1) throw std::invalid_argument("das_dennis_weights needs m >= 2 and H >= 1");
  std::vector<ObjectiveVector> out;
  ObjectiveVector cur;
  lattice(objectives, divisions, divisions, cur, out);
  return out;
}

double tchebycheff(std::span<const double> objectives, std::span<const double> weight, std::span<const double> ideal) {
  if (objectives.size() != weight.size() || objectives.size() != ideal.size()) {
    throw ShapeError("tchebycheff arguments differ in length");
  }
  double best = 0.0;
  for (std::size_t k = 0; k < objectives.size(); ++k) {
    const double w = weight[k] == 0.0 ? 1e-6 : weight[k];
    best = std::max(best, w * std::abs(objectives[k] - ideal[k]));
  }
  return best;
}

namespace {

using Point2 = std::pair<double, double>;

// Points must be strictly inside the reference box.
double hv2d(std::vector<Point2> pts, double rx, double ry) {
  std::sort(pts.begin(), pts.end());
  double area = 0, best_y = ry;
  for (const auto& [x, y] : pts) {
    if (y < best_y) {
      area += (rx - x) * (best_y - y);
      best_y = y;
    }
  }
  return area;
}

}  // namespace

double hypervolume(std::span<const ObjectiveVector> front, std::span<const double> ref) {
  const std::size_t m = ref.size();
  if (m < 1 || m > 3) throw ShapeError("hypervolume supports 1 to 3 objectives");
  std::set<ObjectiveVector> unique;
  for (const auto& p : front) {
    if (p.size() != m) throw ShapeError("point and reference differ in dimension");
    bool inside = true;
    for (std::size_t k = 0; k < m; ++k) inside = inside && p[k] < ref[k];
    if (inside) unique.insert(p);
  }
  if (unique.empty()) return 0.0;
  if (m == 1) return ref[0] - unique.begin()->at(0);
  if (m == 2) {
    std::vector<Point2> pts;
    for (const auto& p : unique) pts.emplace_back(p[0], p[1]);
    return hv2d(std::move(pts), ref[0], ref[1]);
  }
  // Sweep along the third objective: the slab [z_i, z_{i+1}) is covered by
  // the 2-D union of every point with z <= z_i.
  std::vector<ObjectiveVector> pts(unique.begin(), unique.end());
  std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a[2] < b[2]; });
  double volume = 0;
  std::vector<Point2> slice;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    slice.emplace_back(pts[i][0], pts[i][1]);
    const double z_next = i + 1 < pts.size() ? pts[i + 1][2] : ref[2];
    const double depth = z_next - pts[i][2];
    if (depth > 0) volume += hv2d(slice, ref[0], ref[1]) * depth;
  }
  return volume;
}

std::vector<ObjectiveVector> ApproxParetoSet::objective_vectors() const {
  std::vector<ObjectiveVector> out;
  out.reserve(members.size());
  for (const auto& m : members) out.push_back(m.objectives);
  return out;
}

std::vector<ParetoMember> nondominated_members(std::span<const ParetoMember> members) {
  std::vector<ParetoMember> unique;
  std::set<Genome> seen;
  for (const auto& m : members) {
    if (seen.insert(m.genome).second) unique.push_back(m);
  }
  std::vector<ObjectiveVector> pts;
  pts.reserve(unique.size());
  for (const auto& m : unique) pts.push_back(m.objectives);
  std::vector<ParetoMember> out;
  for (auto i : nondominated_indices(pts)) out.push_back(unique[i]);
  return out;
}

std::vector<ParetoMember> estimate_true_pareto(std::span<const ApproxParetoSet> all_aps) {
  std::vector<ParetoMember> all;
  for (const auto& aps : all_aps) all.insert(all.end(), aps.members.begin(), aps.members.end());
  return nondominated_members(all);
}

NormalizationBounds NormalizationBounds::of(std::span<const ObjectiveVector> points) {
  if (points.empty()) throw std::invalid_argument("cannot bound an empty point set");
  NormalizationBounds b{points[0], points[0]};
  for (const auto& p : points) {
    if (p.size() != b.ideal.size()) throw ShapeError("points differ in dimension");
    for (std::size_t k = 0; k < p.size(); ++k) {
      b.ideal[k] = std::min(b.ideal[k], p[k]);
      b.nadir[k] = std::max(b.nadir[k], p[k]);
    }
  }
  return b;
}

ObjectiveVector NormalizationBounds::normalize(std::span<const double> p) const {
  if (p.size() != ideal.size()) throw ShapeError("point and bounds differ in dimension");
  ObjectiveVector out(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double range = nadir[k] - ideal[k];
    out[k] = (p[k] - ideal[k]) / (range > 0 ? range : 1.0);
  }
  return out;
}

double hv_indicator(std::span<const ObjectiveVector> aps, std::span<const ObjectiveVector> gamma_star,
                    const NormalizationBounds& bounds, double ref_coordinate) {
  if (gamma_star.empty()) throw std::invalid_argument("hv_indicator needs a non-empty reference set");
  auto normalized = [&](std::span<const ObjectiveVector> pts) {
    std::set<ObjectiveVector> unique;
    for (const auto& p : pts) unique.insert(bounds.normalize(p));
    return std::vector<ObjectiveVector>(unique.begin(), unique.end());
  };
  const ObjectiveVector ref(bounds.ideal.size(), ref_coordinate);
  const double denom = hypervolume(normalized(gamma_star), ref);
  if (denom <= 0) throw std::invalid_argument("reference set has zero hypervolume");
  return hypervolume(normalized(aps), ref) / denom;
}

double hv_indicator(std::span<const ObjectiveVector> aps, std::span<const ObjectiveVector> gamma_star,
                    double ref_coordinate) {
  return hv_indicator(aps, gamma_star, NormalizationBounds::of(gamma_star), ref_coordinate);
}

}  // namespace coevo
