#include "coevo/search_algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "coevo/errors.hpp"

namespace coevo {

std::string_view to_string(MoeaKind k) { return k == MoeaKind::Nsga2 ? "NSGA2" : "EAGD"; }

MoeaKind moea_kind_from_string(std::string_view s) {
  std::string up(s);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "NSGA2" || up == "NSGA-II" || up == "NSGAII") return MoeaKind::Nsga2;
  if (up == "EAGD") return MoeaKind::Eagd;
  throw std::invalid_argument("unknown MOEA '" + std::string(s) + "'");
}

MoeaConfig MoeaConfig::defaults(MoeaKind kind) {
  MoeaConfig c;
  if (kind == MoeaKind::Eagd) c.crossover_rate = 1.0;
  return c;
}

void MoeaConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  };
  if (population_size < 2) throw std::invalid_argument("population_size must be at least 2");
  if (iterations < 1) throw std::invalid_argument("iterations must be at least 1");
  if (learning_generations < 1) throw std::invalid_argument("learning_generations must be at least 1");
  if (archive_factor < 1) throw std::invalid_argument("archive_factor must be at least 1");
  prob(crossover_rate, "crossover_rate");
  prob(nongeometric_probability, "nongeometric_probability");
  prob(neighborhood_fraction, "neighborhood_fraction");
  if (bitflip_probability) prob(*bitflip_probability, "bitflip_probability");
  if (mutation_rate) prob(*mutation_rate, "mutation_rate");
}

std::pair<Genome, Genome> nongeometric_crossover(const Genome& p1, const Genome& p2, double bitflip_probability,
                                                 Rng& rng) {
  if (p1.size() != p2.size()) throw ShapeError("parents differ in length");
  Genome c1 = p1, c2 = p2;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    if (p1[i] != p2[i]) {
      if (bernoulli(rng, 0.5)) {
        c1.set(i, p2[i]);
        c2.set(i, p1[i]);
      }
    } else {
      if (bernoulli(rng, bitflip_probability)) c1.flip(i);
      if (bernoulli(rng, bitflip_probability)) c2.flip(i);
    }
  }
  return {std::move(c1), std::move(c2)};
}

std::pair<Genome, Genome> uniform_crossover(const Genome& p1, const Genome& p2, Rng& rng) {
  return nongeometric_crossover(p1, p2, 0.0, rng);
}

std::vector<ObjectiveVector> decomposition_weights(int objectives, int count) {
  if (count < 1) throw std::invalid_argument("need at least one weight vector");
  if (objectives < 2) throw std::invalid_argument("decomposition needs at least two objectives");
  if (count == 1) return {ObjectiveVector(objectives, 1.0 / objectives)};
  if (objectives == 2) return das_dennis_weights(2, count - 1);
  int h = 1;
  auto lattice_size = [&](int div) {
    double c = 1;
    for (int i = 1; i < objectives; ++i) c = c * (div + i) / i;
    return static_cast<long long>(std::llround(c));
  };
  while (lattice_size(h) < count) ++h;
  auto pool = das_dennis_weights(objectives, h);
  if (static_cast<int>(pool.size()) == count) return pool;

  std::vector<char> taken(pool.size(), 0);
  std::vector<ObjectiveVector> out;
  std::vector<double> nearest(pool.size(), std::numeric_limits<double>::infinity());
  auto take = [&](std::size_t idx) {
    taken[idx] = 1;
    out.push_back(pool[idx]);
    for (std::size_t j = 0; j < pool.size(); ++j) {
      double d = 0;
      for (int k = 0; k < objectives; ++k) d += (pool[j][k] - pool[idx][k]) * (pool[j][k] - pool[idx][k]);
      nearest[j] = std::min(nearest[j], d);
    }
  };
  for (int k = 0; k < objectives && static_cast<int>(out.size()) < count; ++k) {
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (pool[j][k] == 1.0) {
        take(j);
        break;
      }
    }
  }
  while (static_cast<int>(out.size()) < count) {
    std::size_t best = pool.size();
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (!taken[j] && (best == pool.size() || nearest[j] > nearest[best])) best = j;
    }
    take(best);
  }
  return out;
}

namespace {

struct Individual {
  Genome genome;
  ObjectiveVector objectives;
};

class Evaluation {
 public:
  explicit Evaluation(const ObjectiveEvaluator& ev) : ev_(ev) {}

  ObjectiveVector operator()(const Genome& g) {
    ObjectiveVector f;
    try {
      f = ev_.evaluate(g);
    } catch (const std::exception& e) {
      throw RunError("evaluation failed for genome " + g.to_hex() + ": " + e.what());
    }
    ++count_;
    if (static_cast<int>(f.size()) != ev_.objective_count()) {
      throw RunError("evaluator returned " + std::to_string(f.size()) + " objectives for genome " + g.to_hex() +
                     ", expected " + std::to_string(ev_.objective_count()));
    }
    for (double v : f) {
      if (!std::isfinite(v)) throw RunError("non-finite objective for genome " + g.to_hex());
    }
    return f;
  }
  std::size_t count() const { return count_; }

 private:
  const ObjectiveEvaluator& ev_;
  std::size_t count_ = 0;
};

void check_setup(const MoeaConfig& cfg, const ObjectiveEvaluator& ev) {
  cfg.validate();
  if (ev.genome_length() == 0) throw std::invalid_argument("evaluator genome length is zero");
  if (ev.objective_count() < 2 || ev.objective_count() > 3) {
    throw std::invalid_argument("evaluator must have 2 or 3 objectives");
  }
}

std::vector<ObjectiveVector> objectives_of(const std::vector<Individual>& pop) {
  std::vector<ObjectiveVector> out;
  out.reserve(pop.size());
  for (const auto& ind : pop) out.push_back(ind.objectives);
  return out;
}

std::vector<Genome> genomes_of(const std::vector<Individual>& pop) {
  std::vector<Genome> out;
  out.reserve(pop.size());
  for (const auto& ind : pop) out.push_back(ind.genome);
  return out;
}

GenerationStats stats_for(int generation, std::size_t evaluations, const std::vector<Individual>& pop) {
  GenerationStats s;
  s.generation = generation;
  s.evaluations = evaluations;
  const std::size_t m = pop.front().objectives.size();
  s.best.assign(m, std::numeric_limits<double>::infinity());
  s.mean.assign(m, 0.0);
  for (const auto& ind : pop) {
    for (std::size_t k = 0; k < m; ++k) {
      s.best[k] = std::min(s.best[k], ind.objectives[k]);
      s.mean[k] += ind.objectives[k] / static_cast<double>(pop.size());
    }
  }
  auto pts = objectives_of(pop);
  std::vector<ObjectiveVector> front;
  for (auto i : nondominated_indices(pts)) front.push_back(pts[i]);
  s.hv_proxy = hypervolume(front, ObjectiveVector(m, kHvProxyReference));
  return s;
}

void observe(const GenerationObserver& observer, int gen, const std::vector<Individual>& pop) {
  if (!observer) return;
  auto g = genomes_of(pop);
  auto f = objectives_of(pop);
  observer(gen, g, f);
}

ApproxParetoSet to_aps(const std::vector<Individual>& pop, const ObjectiveEvaluator& ev, std::uint64_t seed) {
  ApproxParetoSet aps;
  aps.seed = seed;
  auto pts = objectives_of(pop);
  std::set<Genome> seen;
  for (auto i : nondominated_indices(pts)) {
    if (!seen.insert(pop[i].genome).second) continue;
    aps.members.push_back({pop[i].genome, ev.describe(pop[i].genome), pop[i].objectives});
  }
  return aps;
}

// Rank and crowding for every individual of a population.
struct Fitness {
  std::vector<int> rank;
  std::vector<double> crowding;
};

Fitness assess(const std::vector<Individual>& pop) {
  auto pts = objectives_of(pop);
  Fitness fit{std::vector<int>(pop.size()), std::vector<double>(pop.size())};
  auto fronts = nondominated_sort(pts);
  for (std::size_t r = 0; r < fronts.size(); ++r) {
    std::vector<ObjectiveVector> fp;
    for (auto i : fronts[r]) fp.push_back(pts[i]);
    auto cd = crowding_distance(fp);
    for (std::size_t j = 0; j < fronts[r].size(); ++j) {
      fit.rank[fronts[r][j]] = static_cast<int>(r);
      fit.crowding[fronts[r][j]] = cd[j];
    }
  }
  return fit;
}

std::size_t tournament(const std::vector<Individual>& pop, const Fitness& fit, Rng& rng) {
  const std::size_t a = uniform_index(rng, pop.size());
  const std::size_t b = uniform_index(rng, pop.size());
  if (fit.rank[a] != fit.rank[b]) return fit.rank[a] < fit.rank[b] ? a : b;
  if (fit.crowding[a] != fit.crowding[b]) return fit.crowding[a] > fit.crowding[b] ? a : b;
  return pop[b].genome < pop[a].genome ? b : a;
}

}  // namespace

MoeaResult nsga2_run(const MoeaConfig& cfg, const ObjectiveEvaluator& evaluator, const GenerationObserver& observer) {
  check_setup(cfg, evaluator);
  const std::size_t n = evaluator.genome_length();
  const std::size_t pop_size = static_cast<std::size_t>(cfg.population_size);
  const double bitflip = cfg.resolved_bitflip(n);
  const double mut = cfg.resolved_mutation(n);
  Rng rng(mix_seed(cfg.seed, 0x6e5a));
  Evaluation eval(evaluator);
  MoeaResult result;

  std::vector<Individual> pop;
  pop.reserve(2 * pop_size);
  for (std::size_t i = 0; i < pop_size; ++i) {
    Genome g = random_genome(n, rng);
    auto f = eval(g);
    pop.push_back({std::move(g), std::move(f)});
  }
  result.log.push_back(stats_for(0, eval.count(), pop));
  observe(observer, 0, pop);

  for (int gen = 1; gen <= cfg.iterations; ++gen) {
    const Fitness fit = assess(pop);
    std::vector<Genome> children;
    while (children.size() < pop_size) {
      const Genome& p1 = pop[tournament(pop, fit, rng)].genome;
      const Genome& p2 = pop[tournament(pop, fit, rng)].genome;
      std::pair<Genome, Genome> kids{p1, p2};
      if (bernoulli(rng, cfg.crossover_rate)) {
        kids = bernoulli(rng, cfg.nongeometric_probability) ? nongeometric_crossover(p1, p2, bitflip, rng)
                                                            : uniform_crossover(p1, p2, rng);
      }
      children.push_back(mutate(kids.first, mut, rng));
      if (children.size() < pop_size) children.push_back(mutate(kids.second, mut, rng));
    }
    for (auto& c : children) {
      auto f = eval(c);
      pop.push_back({std::move(c), std::move(f)});
    }

    // (mu + lambda) survival by fronts, the last front truncated by crowding.
    auto pts = objectives_of(pop);
    std::vector<Individual> next;
    next.reserve(2 * pop_size);
    for (const auto& front : nondominated_sort(pts)) {
      if (next.size() + front.size() <= pop_size) {
        for (auto i : front) next.push_back(pop[i]);
        if (next.size() == pop_size) break;
        continue;
      }
      std::vector<ObjectiveVector> fp;
      for (auto i : front) fp.push_back(pts[i]);
      auto cd = crowding_distance(fp);
      std::vector<std::size_t> order(front.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cd[a] > cd[b]; });
      for (std::size_t j = 0; next.size() < pop_size; ++j) next.push_back(pop[front[order[j]]]);
      break;
    }
    pop = std::move(next);
    result.log.push_back(stats_for(gen, eval.count(), pop));
    observe(observer, gen, pop);
  }

  result.aps = to_aps(pop, evaluator, cfg.seed);
  result.evaluations = eval.count();
  return result;
}

namespace {

class Archive {
 public:
  explicit Archive(std::size_t capacity) : capacity_(capacity) {}

  void offer(const Individual& cand) {
    for (const auto& a : members_) {
      if (a.genome == cand.genome || dominates(a.objectives, cand.objectives)) return;
    }
    std::erase_if(members_, [&](const Individual& a) { return dominates(cand.objectives, a.objectives); });
    members_.push_back(cand);
    while (members_.size() > capacity_) {
      auto cd = crowding_distance(objectives_of(members_));
      auto worst = std::min_element(cd.begin(), cd.end()) - cd.begin();
      members_.erase(members_.begin() + worst);
    }
  }
  const std::vector<Individual>& members() const { return members_; }

 private:
  std::size_t capacity_;
  std::vector<Individual> members_;
};

}  // namespace

MoeaResult eagd_run(const MoeaConfig& cfg, const ObjectiveEvaluator& evaluator, const GenerationObserver& observer) {
  check_setup(cfg, evaluator);
  const std::size_t n = evaluator.genome_length();
  const int m = evaluator.objective_count();
  const std::size_t pop_size = static_cast<std::size_t>(cfg.population_size);
  const double mut = cfg.resolved_mutation(n);
  Rng rng(mix_seed(cfg.seed, 0xea6d));
  Evaluation eval(evaluator);
  MoeaResult result;

  const auto weights = decomposition_weights(m, cfg.population_size);
  const std::size_t t =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(cfg.neighborhood_fraction * cfg.population_size)),
                              std::size_t{2}, pop_size);
  std::vector<std::vector<std::size_t>> neighbours(pop_size);
  for (std::size_t i = 0; i < pop_size; ++i) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < pop_size; ++j) {
      double s = 0;
      for (int k = 0; k < m; ++k) s += (weights[i][k] - weights[j][k]) * (weights[i][k] - weights[j][k]);
      d.emplace_back(s, j);
    }
    std::sort(d.begin(), d.end());
    for (std::size_t j = 0; j < t; ++j) neighbours[i].push_back(d[j].second);
  }

  std::vector<Individual> pop;
  Archive archive(static_cast<std::size_t>(cfg.archive_factor) * pop_size);
  ObjectiveVector ideal(m, std::numeric_limits<double>::infinity());
  auto absorb = [&](const Individual& ind) {
    for (int k = 0; k < m; ++k) ideal[k] = std::min(ideal[k], ind.objectives[k]);
    archive.offer(ind);
  };
  for (std::size_t i = 0; i < pop_size; ++i) {
    Genome g = random_genome(n, rng);
    auto f = eval(g);
    pop.push_back({std::move(g), std::move(f)});
    absorb(pop.back());
  }
  result.log.push_back(stats_for(0, eval.count(), pop));
  observe(observer, 0, pop);

  for (int gen = 1; gen <= cfg.iterations; ++gen) {
    for (std::size_t i = 0; i < pop_size; ++i) {
      const auto& nb = neighbours[i];
      const std::size_t a = nb[uniform_index(rng, nb.size())];
      std::size_t b = nb[uniform_index(rng, nb.size() - 1)];
      if (b == a) b = nb.back();
      Genome child = pop[a].genome;
      if (bernoulli(rng, cfg.crossover_rate)) child = uniform_crossover(pop[a].genome, pop[b].genome, rng).first;
      child = mutate(child, mut, rng);
      Individual ind{child, eval(child)};
      absorb(ind);
      for (auto j : nb) {
        if (tchebycheff(ind.objectives, weights[j], ideal) < tchebycheff(pop[j].objectives, weights[j], ideal)) {
          pop[j] = ind;
        }
      }
    }
    if (gen % cfg.learning_generations == 0) {
      for (std::size_t i = 0; i < pop_size; ++i) {
        const Individual* best = nullptr;
        double best_val = tchebycheff(pop[i].objectives, weights[i], ideal);
        for (const auto& a : archive.members()) {
          const double v = tchebycheff(a.objectives, weights[i], ideal);
          if (v < best_val) {
            best_val = v;
            best = &a;
          }
        }
        if (best) pop[i] = *best;
      }
    }
    result.log.push_back(stats_for(gen, eval.count(), pop));
    observe(observer, gen, pop);
  }

  result.aps = to_aps(archive.members(), evaluator, cfg.seed);
  result.evaluations = eval.count();
  return result;
}

MoeaResult run_moea(MoeaKind kind, const MoeaConfig& cfg, const ObjectiveEvaluator& evaluator,
                    const GenerationObserver& observer) {
  return kind == MoeaKind::Nsga2 ? nsga2_run(cfg, evaluator, observer) : eagd_run(cfg, evaluator, observer);
}

}  // namespace coevo
