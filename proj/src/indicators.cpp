#include "coevo/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "coevo/errors.hpp"

namespace coevo {
namespace indicators {

namespace {

std::span<const OhlcvBar> tail(std::span<const OhlcvBar> w, int n) {
  if (n <= 0 || static_cast<std::size_t>(n) > w.size()) {
    throw InsufficientDataError("indicator needs " + std::to_string(n) + " bars, window has " +
                                std::to_string(w.size()));
  }
  return w.subspan(w.size() - static_cast<std::size_t>(n));
}

double typical(const OhlcvBar& b) { return (b.high + b.low + b.close) / 3.0; }

double mean_close(std::span<const OhlcvBar> w) {
  double s = 0;
  for (const auto& b : w) s += b.close;
  return s / static_cast<double>(w.size());
}

double sd_close(std::span<const OhlcvBar> w, double mean) {
  double s = 0;
  for (const auto& b : w) s += (b.close - mean) * (b.close - mean);
  return std::sqrt(s / static_cast<double>(w.size()));
}

std::pair<double, double> high_low(std::span<const OhlcvBar> w) {
  double hh = w.front().high, ll = w.front().low;
  for (const auto& b : w) {
    hh = std::max(hh, b.high);
    ll = std::min(ll, b.low);
  }
  return {hh, ll};
}

double up_down_index(double up, double down) {
  if (up == 0 && down == 0) return 50.0;
  if (down == 0) return 100.0;
  if (up == 0) return 0.0;
  return 100.0 - 100.0 / (1.0 + up / down);
}

}  // namespace

double sma(std::span<const OhlcvBar> w, int tau) { return mean_close(tail(w, tau)); }

double ema(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, 2 * tau);
  const double alpha = 2.0 / (tau + 1.0);
  double e = mean_close(v.first(static_cast<std::size_t>(tau)));
  for (std::size_t i = static_cast<std::size_t>(tau); i < v.size(); ++i) e += alpha * (v[i].close - e);
  return e;
}

double wma(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, tau);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    num += static_cast<double>(i + 1) * v[i].close;
    den += static_cast<double>(i + 1);
  }
  return num / den;
}

double momentum(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, tau + 1);
  return v.back().close - v.front().close;
}

double rate_of_change(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, tau + 1);
  return 100.0 * (v.back().close / v.front().close - 1.0);
}

double disparity(std::span<const OhlcvBar> w, int tau) { return 100.0 * w.back().close / sma(w, tau); }

double rsi(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, tau + 1);
  double up = 0, down = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double d = v[i].close - v[i - 1].close;
    if (d > 0) up += d;
    else down -= d;
  }
  return up_down_index(up, down);
}

double williams_r(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, tau);
  auto [hh, ll] = high_low(v);
  if (hh == ll) return -50.0;
  return -100.0 * (hh - v.back().close) / (hh - ll);
}

double cci(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, tau);
  double m = 0;
  for (const auto& b : v) m += typical(b);
  m /= tau;
  double md = 0;
  for (const auto& b : v) md += std::abs(typical(b) - m);
  md /= tau;
  if (md == 0) return 0.0;
  return (typical(v.back()) - m) / (0.015 * md);
}

double atr(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, tau + 1);
  double s = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double prev = v[i - 1].close;
    s += std::max({v[i].high - v[i].low, std::abs(v[i].high - prev), std::abs(v[i].low - prev)});
  }
  return s / tau;
}

double stochastic_k(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, tau);
  auto [hh, ll] = high_low(v);
  if (hh == ll) return 50.0;
  return 100.0 * (v.back().close - ll) / (hh - ll);
}

double stochastic_d(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, tau + 2);
  double s = 0;
  for (std::size_t k = 0; k < 3; ++k) s += stochastic_k(v.first(v.size() - k), tau);
  return s / 3.0;
}

double bollinger_b(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, tau);
  const double m = mean_close(v);
  const double sd = sd_close(v, m);
  if (sd == 0) return 0.5;
  return (v.back().close - (m - 2.0 * sd)) / (4.0 * sd);
}

double bollinger_width(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, tau);
  const double m = mean_close(v);
  return 4.0 * sd_close(v, m) / m;
}

double obv_rate(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, tau + 1);
  double flow = 0, total = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double d = v[i].close - v[i - 1].close;
    flow += (d > 0 ? 1.0 : d < 0 ? -1.0 : 0.0) * v[i].volume;
    total += v[i].volume;
  }
  return total == 0 ? 0.0 : flow / total;
}

double volume_ratio(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, tau);
  double s = 0;
  for (const auto& b : v) s += b.volume;
  s /= tau;
  return s == 0 ? 1.0 : v.back().volume / s;
}

double return_volatility(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, tau + 1);
  double m = 0;
  for (std::size_t i = 1; i < v.size(); ++i) m += std::log(v[i].close / v[i - 1].close);
  m /= tau;
  double s = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double r = std::log(v[i].close / v[i - 1].close) - m;
    s += r * r;
  }
  return std::sqrt(s / tau);
}

double mfi(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, tau + 1);
  double pos = 0, neg = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double tp = typical(v[i]);
    const double prev = typical(v[i - 1]);
    if (tp > prev) pos += tp * v[i].volume;
    else if (tp < prev) neg += tp * v[i].volume;
  }
  return up_down_index(pos, neg);
}

double trix(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, 3 * tau + 1);
  const double alpha = 2.0 / (tau + 1.0);
  double e1 = v.front().close, e2 = e1, e3 = e1, prev_e3 = e3;
  for (std::size_t i = 1; i < v.size(); ++i) {
    prev_e3 = e3;
    e1 += alpha * (v[i].close - e1);
    e2 += alpha * (e1 - e2);
    e3 += alpha * (e2 - e3);
  }
  return 100.0 * (e3 / prev_e3 - 1.0);
}

double psychological_line(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, tau + 1);
  int ups = 0;
  for (std::size_t i = 1; i < v.size(); ++i) ups += v[i].close > v[i - 1].close ? 1 : 0;
  return 100.0 * ups / tau;
}

double highest_high_ratio(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, tau);
  return v.back().close / high_low(v).first;
}

double lowest_low_ratio(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, tau);
  return v.back().close / high_low(v).second;
}

double volume_momentum(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, tau + 1);
  return std::log((v.back().volume + 1.0) / (v.front().volume + 1.0));
}

double ad_oscillator(std::span<const OhlcvBar> w, int tau) {
  auto v = tail(w, tau);
  double flow = 0, total = 0;
  for (const auto& b : v) {
    const double range = b.high - b.low;
    const double clv = range == 0 ? 0.0 : ((b.close - b.low) - (b.high - b.close)) / range;
    flow += clv * b.volume;
    total += b.volume;
  }
  return total == 0 ? 0.0 : flow / total;
}

}  // namespace indicators

// ---------------------------------------------------------------------------

IndicatorRegistry::IndicatorRegistry(std::vector<IndicatorFeature> features) : features_(std::move(features)) {
  for (const auto& f : features_) max_lookback_ = std::max(max_lookback_, f.lookback);
}

std::size_t IndicatorRegistry::family_count() const {
  std::set<std::string> fams;
  for (const auto& f : features_) fams.insert(f.family);
  return fams.size();
}

std::vector<std::string> IndicatorRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(features_.size());
  for (const auto& f : features_) out.push_back(f.name);
  return out;
}

const IndicatorRegistry& IndicatorRegistry::default_registry() {
  static const IndicatorRegistry registry = [] {
    using Fn = double (*)(std::span<const OhlcvBar>, int);
    struct Family {
      const char* name;
      Fn fn;
      int (*lookback)(int);
      bool three_windows;
    };
    auto lb_tau_minus_1 = [](int t) { return t - 1; };
    auto lb_tau = [](int t) { return t; };
    const Family families[] = {
        {"sma", indicators::sma, lb_tau_minus_1, true},
        {"ema", indicators::ema, [](int t) { return 2 * t - 1; }, true},
        {"wma", indicators::wma, lb_tau_minus_1, true},
        {"momentum", indicators::momentum, lb_tau, true},
        {"roc", indicators::rate_of_change, lb_tau, true},
        {"disparity", indicators::disparity, lb_tau_minus_1, true},
        {"rsi", indicators::rsi, lb_tau, true},
        {"williams_r", indicators::williams_r, lb_tau_minus_1, true},
        {"cci", indicators::cci, lb_tau_minus_1, true},
        {"atr", indicators::atr, lb_tau, true},
        {"stoch_k", indicators::stochastic_k, lb_tau_minus_1, true},
        {"stoch_d", indicators::stochastic_d, [](int t) { return t + 1; }, true},
        {"bollinger_b", indicators::bollinger_b, lb_tau_minus_1, true},
        {"bollinger_width", indicators::bollinger_width, lb_tau_minus_1, true},
        {"obv_rate", indicators::obv_rate, lb_tau, true},
        {"volume_ratio", indicators::volume_ratio, lb_tau_minus_1, true},
        {"volatility", indicators::return_volatility, lb_tau, true},
        {"mfi", indicators::mfi, lb_tau, true},
        {"trix", indicators::trix, [](int t) { return 3 * t; }, true},
        {"psy", indicators::psychological_line, lb_tau, true},
        {"hh_ratio", indicators::highest_high_ratio, lb_tau_minus_1, false},
        {"ll_ratio", indicators::lowest_low_ratio, lb_tau_minus_1, false},
        {"volume_momentum", indicators::volume_momentum, lb_tau, false},
        {"ad_oscillator", indicators::ad_oscillator, lb_tau_minus_1, false},
    };
    std::vector<IndicatorFeature> feats;
    for (const auto& fam : families) {
      const std::vector<int> windows = fam.three_windows ? std::vector<int>{5, 10, 20} : std::vector<int>{10, 20};
      for (int tau : windows) {
        feats.push_back({std::string(fam.name) + "_" + std::to_string(tau), fam.name, tau, fam.lookback(tau), fam.fn});
      }
    }
    return IndicatorRegistry(std::move(feats));
  }();
  return registry;
}

FeatureDataset compute_features(const OhlcvSeries& series, const IndicatorRegistry& registry) {
  const std::size_t lb = static_cast<std::size_t>(registry.max_lookback());
  if (series.size() < lb + 2) {
    throw InsufficientDataError("series has " + std::to_string(series.size()) + " bars; features need at least " +
                                std::to_string(lb + 2));
  }
  FeatureDataset ds(registry.names());
  const auto bars = series.bars();
  std::vector<double> x(registry.size());
  for (std::size_t t = lb; t + 1 < bars.size(); ++t) {
    for (std::size_t j = 0; j < registry.size(); ++j) {
      const auto& f = registry.features()[j];
      const auto n = static_cast<std::size_t>(f.lookback) + 1;
      x[j] = f.compute(bars.subspan(t + 1 - n, n), f.window);
    }
    const int label = bars[t + 1].close - bars[t].close > 0 ? 1 : 0;
    ds.add_row(x, label, bars[t].date);
  }
  return ds;
}

}  // namespace coevo
