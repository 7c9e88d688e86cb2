#include "coevo/stats_report.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "coevo/errors.hpp"

namespace coevo {

std::vector<double> rank_block(std::span<const double> row) {
  const std::size_t k = row.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
  std::vector<double> ranks(k);
  for (std::size_t i = 0; i < k;) {
    std::size_t j = i;
    while (j + 1 < k && row[order[j + 1]] == row[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

FriedmanResult friedman_test(const HvMatrix& m) {
  if (m.size() < 2) throw std::invalid_argument("Friedman test needs at least 2 blocks");
  const std::size_t k = m[0].size();
  if (k < 2) throw std::invalid_argument("Friedman test needs at least 2 treatments");
  const auto n = static_cast<double>(m.size());
  const auto kd = static_cast<double>(k);
  std::vector<double> rank_sum(k, 0.0);
  double sum_sq = 0;
  for (const auto& row : m) {
    if (row.size() != k) throw std::invalid_argument("Friedman matrix rows differ in length");
    const auto r = rank_block(row);
    for (std::size_t j = 0; j < k; ++j) {
      rank_sum[j] += r[j];
      sum_sq += r[j] * r[j];
    }
  }
  FriedmanResult res;
  res.blocks = m.size();
  res.treatments = k;
  for (double s : rank_sum) res.avg_ranks.push_back(s / n);

  // (k-1) * sum_j (R_j - n(k+1)/2)^2 / (sum r^2 - n k (k+1)^2 / 4); equals the
  // textbook statistic without ties and applies the tie correction otherwise.
  const double denom = sum_sq - n * kd * (kd + 1) * (kd + 1) / 4.0;
  double num = 0;
  for (double s : rank_sum) num += (s - n * (kd + 1) / 2.0) * (s - n * (kd + 1) / 2.0);
  if (denom <= 1e-12) {
    res.statistic = 0;
    res.p_value = 1;
    return res;
  }
  res.statistic = (kd - 1) * num / denom;
  boost::math::chi_squared chi(kd - 1);
  res.p_value = res.statistic <= 0 ? 1.0 : boost::math::cdf(boost::math::complement(chi, res.statistic));
  return res;
}

std::vector<double> friedman_posthoc_p(const FriedmanResult& f, std::size_t control) {
  if (control >= f.treatments) throw std::out_of_range("control index out of range");
  const auto k = static_cast<double>(f.treatments);
  const auto n = static_cast<double>(f.blocks);
  const double se = std::sqrt(k * (k + 1) / (6 * n));
  boost::math::normal norm;
  std::vector<double> p(f.treatments, 1.0);
  for (std::size_t j = 0; j < f.treatments; ++j) {
    if (j == control) continue;
    const double z = (f.avg_ranks[j] - f.avg_ranks[control]) / se;
    p[j] = boost::math::cdf(boost::math::complement(norm, z));
  }
  return p;
}

std::vector<double> hommel_apv(std::span<const double> raw_p) {
  const std::size_t n = raw_p.size();
  for (double v : raw_p) {
    if (!(v >= 0 && v <= 1)) throw std::invalid_argument("p-values must lie in [0, 1]");
  }
  if (n <= 1) return {raw_p.begin(), raw_p.end()};
  std::vector<std::size_t> o(n);
  std::iota(o.begin(), o.end(), std::size_t{0});
  std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) { return raw_p[a] < raw_p[b]; });
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = raw_p[o[i]];

  const auto nd = static_cast<double>(n);
  double init = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) init = std::min(init, nd * p[i] / static_cast<double>(i + 1));
  std::vector<double> q(n, init), pa(n, init);
  for (std::size_t m = n - 1; m >= 2; --m) {
    const std::size_t split = n - m + 1;  // first `split` sorted hypotheses
    double q1 = std::numeric_limits<double>::infinity();
    for (std::size_t t = 2; t <= m; ++t) {
      q1 = std::min(q1, static_cast<double>(m) * p[split + t - 2] / static_cast<double>(t));
    }
    for (std::size_t i = 0; i < split; ++i) q[i] = std::min(static_cast<double>(m) * p[i], q1);
    for (std::size_t i = split; i < n; ++i) q[i] = q[split - 1];
    for (std::size_t i = 0; i < n; ++i) pa[i] = std::max(pa[i], q[i]);
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[o[i]] = std::min(1.0, std::max(pa[i], p[i]));
  return out;
}

StatReport compare_scenarios(std::span<const std::string> ids, const HvMatrix& m, double alpha) {
  StatReport rep;
  rep.alpha = alpha;
  rep.friedman = friedman_test(m);
  const std::size_t k = rep.friedman.treatments;
  if (ids.size() != k) throw std::invalid_argument("scenario ids do not match matrix columns");
  std::size_t control = 0;
  for (std::size_t j = 1; j < k; ++j) {
    const double rj = rep.friedman.avg_ranks[j], rc = rep.friedman.avg_ranks[control];
    if (rj < rc || (rj == rc && ids[j] < ids[control])) control = j;
  }
  rep.control = control;
  const auto raw = friedman_posthoc_p(rep.friedman, control);
  std::vector<double> others;
  for (std::size_t j = 0; j < k; ++j) {
    if (j != control) others.push_back(raw[j]);
  }
  const auto apv = hommel_apv(others);
  for (std::size_t j = 0, t = 0; j < k; ++j) {
    ScenarioStat s;
    s.scenario = ids[j];
    std::vector<double> col;
    for (const auto& row : m) col.push_back(row[j]);
    s.hv = mean_sd(col);
    s.avg_rank = rep.friedman.avg_ranks[j];
    s.control = j == control;
    if (!s.control) {
      s.p_value = raw[j];
      s.apv = apv[t++];
      s.reject = s.apv <= alpha;
    }
    rep.scenarios.push_back(s);
  }
  return rep;
}

std::vector<ObjectiveVector> assign_hv_indicators(std::span<ScenarioResult> results, const ComparisonPoints& points,
                                                  double ref_coordinate) {
  if (points.size() != results.size()) throw std::invalid_argument("points do not match scenario results");
  std::vector<ObjectiveVector> all;
  for (const auto& sc : points) {
    for (const auto& run : sc) all.insert(all.end(), run.begin(), run.end());
  }
  if (all.empty()) throw EmptyDataError("no Pareto members to compare");
  std::vector<ObjectiveVector> gamma;
  {
    std::set<ObjectiveVector> unique(all.begin(), all.end());
    std::vector<ObjectiveVector> u(unique.begin(), unique.end());
    for (auto i : nondominated_indices(u)) gamma.push_back(u[i]);
  }
  const auto bounds = NormalizationBounds::of(gamma);
  for (std::size_t s = 0; s < results.size(); ++s) {
    auto& sr = results[s];
    sr.hv_per_run.assign(sr.aps_per_run.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t r = 0; r < points[s].size() && r < sr.hv_per_run.size(); ++r) {
      const bool ok = r >= sr.runs.size() || sr.runs[r].ok;
      if (ok) sr.hv_per_run[r] = hv_indicator(points[s][r], gamma, bounds, ref_coordinate);
    }
  }
  return gamma;
}

HvMatrix hv_matrix(std::span<const ScenarioResult> results) {
  if (results.size() < 2) throw std::invalid_argument("need >= 2 scenarios");
  std::size_t runs = results[0].hv_per_run.size();
  for (const auto& r : results) runs = std::min(runs, r.hv_per_run.size());
  HvMatrix m;
  for (std::size_t i = 0; i < runs; ++i) {
    std::vector<double> row;
    for (const auto& r : results) row.push_back(r.hv_per_run[i]);
    if (std::all_of(row.begin(), row.end(), [](double v) { return std::isfinite(v); })) m.push_back(std::move(row));
  }
  if (m.size() < 2) throw std::invalid_argument("need >= 2 runs completed by every scenario");
  return m;
}

std::size_t median_index(std::span<const double> hv) {
  if (hv.empty()) throw EmptyDataError("no HV values");
  std::vector<std::size_t> order(hv.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return hv[a] < hv[b]; });
  return order[(hv.size() - 1) / 2];
}

const ApproxParetoSet& median_front(const ScenarioResult& result) {
  if (result.aps_per_run.empty() || result.hv_per_run.size() != result.aps_per_run.size()) {
    throw EmptyDataError("scenario " + result.spec.id() + " has no HV-scored runs");
  }
  std::vector<double> hv;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < result.hv_per_run.size(); ++i) {
    if (std::isfinite(result.hv_per_run[i])) {
      hv.push_back(result.hv_per_run[i]);
      idx.push_back(i);
    }
  }
  return result.aps_per_run[idx.at(median_index(hv))];
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& p, const std::string& header_json) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << "# " << header_json << '\n';
  out << std::setprecision(10);
  return out;
}

std::string layer_tuple(const HiddenLayer& h) {
  return "\"(" + std::to_string(h.size) + "," + std::string(to_string(h.activation)) + ")\"";
}

}  // namespace

void emit_report(const std::filesystem::path& dir, const ReportInputs& in) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  {
    auto out = open_for_write(dir / "summary.csv", in.header_json);
    out << "scenario,hv_mean,hv_sd,p_value,apv,reject\n";
    for (const auto& s : in.stats.scenarios) {
      out << s.scenario << ',' << s.hv.mean << ',' << s.hv.sd << ',';
      if (s.control) {
        out << "-,-,control\n";
      } else {
        out << s.p_value << ',' << s.apv << ',' << (s.reject ? "yes" : "no") << '\n';
      }
    }
  }
  for (std::size_t i = 0; i < in.scenario_ids.size() && i < in.median_fronts.size(); ++i) {
    std::string name = in.scenario_ids[i];
    std::replace(name.begin(), name.end(), '+', '_');
    auto out = open_for_write(dir / ("median_front_" + name + ".csv"), in.header_json);
    for (std::size_t k = 0; k < in.objective_names.size(); ++k) out << (k ? "," : "") << in.objective_names[k];
    out << '\n';
    auto pts = in.median_fronts[i];
    std::sort(pts.begin(), pts.end());
    for (const auto& p : pts) {
      for (std::size_t k = 0; k < p.size(); ++k) out << (k ? "," : "") << p[k];
      out << '\n';
    }
  }
  {
    auto out = open_for_write(dir / "selected_architecture.csv", in.header_json);
    out << "scenario,selected_features,layer1,layer2,complexity,holdout_accuracy_mean,holdout_accuracy_sd,"
           "holdout_balanced_accuracy_mean,holdout_mcc_mean,holdout_mcc_sd,cycles,genome_hex\n";
    for (const auto& s : in.selections) {
      const auto& a = s.member.architecture;
      out << s.scenario << ',' << a.features.size() << ',' << (a.layers.size() > 0 ? layer_tuple(a.layers[0]) : "")
          << ',' << (a.layers.size() > 1 ? layer_tuple(a.layers[1]) : "") << ',' << s.complexity << ','
          << s.holdout.overall_accuracy.mean << ',' << s.holdout.overall_accuracy.sd << ','
          << s.holdout.balanced_accuracy.mean << ',' << s.holdout.mcc.mean << ',' << s.holdout.mcc.sd << ','
          << s.holdout.cycles << ',' << s.member.genome.to_hex() << '\n';
    }
  }
}

}  // namespace coevo
