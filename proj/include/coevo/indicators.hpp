#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "coevo/market_data.hpp"

namespace coevo {

/// Technical indicators evaluated on a window that ends at day t. Each
/// function reads only the tail of `w` it needs (documented as lookback).
namespace indicators {

double sma(std::span<const OhlcvBar> w, int tau);             // lookback tau-1
double ema(std::span<const OhlcvBar> w, int tau);             // lookback 2tau-1, SMA-seeded
double wma(std::span<const OhlcvBar> w, int tau);             // lookback tau-1
double momentum(std::span<const OhlcvBar> w, int tau);        // lookback tau
double rate_of_change(std::span<const OhlcvBar> w, int tau);  // lookback tau
double disparity(std::span<const OhlcvBar> w, int tau);       // lookback tau-1
/// Simple-average RSI over tau close-to-close changes. No losses -> 100, no
/// gains -> 0, neither -> 50.
double rsi(std::span<const OhlcvBar> w, int tau);  // lookback tau
double williams_r(std::span<const OhlcvBar> w, int tau);      // lookback tau-1
double cci(std::span<const OhlcvBar> w, int tau);             // lookback tau-1
double atr(std::span<const OhlcvBar> w, int tau);             // lookback tau
double stochastic_k(std::span<const OhlcvBar> w, int tau);    // lookback tau-1
double stochastic_d(std::span<const OhlcvBar> w, int tau);    // lookback tau+1
double bollinger_b(std::span<const OhlcvBar> w, int tau);     // lookback tau-1
double bollinger_width(std::span<const OhlcvBar> w, int tau); // lookback tau-1
double obv_rate(std::span<const OhlcvBar> w, int tau);        // lookback tau
double volume_ratio(std::span<const OhlcvBar> w, int tau);    // lookback tau-1
double return_volatility(std::span<const OhlcvBar> w, int tau);  // lookback tau
double mfi(std::span<const OhlcvBar> w, int tau);             // lookback tau
double trix(std::span<const OhlcvBar> w, int tau);            // lookback 3tau
double psychological_line(std::span<const OhlcvBar> w, int tau);  // lookback tau
double highest_high_ratio(std::span<const OhlcvBar> w, int tau);  // lookback tau-1
double lowest_low_ratio(std::span<const OhlcvBar> w, int tau);    // lookback tau-1
double volume_momentum(std::span<const OhlcvBar> w, int tau);     // lookback tau
double ad_oscillator(std::span<const OhlcvBar> w, int tau);       // lookback tau-1

}  // namespace indicators

struct IndicatorFeature {
  std::string name;    // e.g. "rsi_10"
  std::string family;  // e.g. "rsi"
  int window = 0;
  int lookback = 0;    // bars needed before day t
  std::function<double(std::span<const OhlcvBar>, int)> compute;
};

class IndicatorRegistry {
 public:
  IndicatorRegistry() = default;
  explicit IndicatorRegistry(std::vector<IndicatorFeature> features);

  /// 20 families at tau in {5, 10, 20} plus 4 families at tau in {10, 20}:
  /// 68 features from 24 families.
  static const IndicatorRegistry& default_registry();

  std::span<const IndicatorFeature> features() const { return features_; }
  std::size_t size() const { return features_.size(); }
  std::size_t family_count() const;
  int max_lookback() const { return max_lookback_; }
  std::vector<std::string> names() const;

 private:
  std::vector<IndicatorFeature> features_;
  int max_lookback_ = 0;
};

/// Rows for every day t where all indicators have their lookback and day t+1
/// exists for the label. Each feature sees exactly bars [t - lookback, t].
FeatureDataset compute_features(const OhlcvSeries& series,
                                const IndicatorRegistry& registry = IndicatorRegistry::default_registry());

}  // namespace coevo
