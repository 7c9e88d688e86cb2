#pragma once

#include <vector>

#include "coevo/market_data.hpp"

namespace testing_support {

/// Weekday bars with open = high = low = close and constant volume.
inline coevo::OhlcvSeries flat_bars(const std::vector<double>& closes, double volume = 1000.0) {
  std::vector<coevo::OhlcvBar> bars;
  coevo::Date d(2010, 1, 4);
  for (double c : closes) {
    while (d.weekday() == 0 || d.weekday() == 6) d = d.plus_days(1);
    bars.push_back({d, c, c, c, c, volume});
    d = d.plus_days(1);
  }
  return coevo::OhlcvSeries(std::move(bars));
}

/// One-feature dataset with a row per weekday in [first, last].
inline coevo::FeatureDataset daily_dataset(coevo::Date first, coevo::Date last) {
  coevo::FeatureDataset ds({"f0"});
  int i = 0;
  for (coevo::Date d = first; d <= last; d = d.plus_days(1)) {
    if (d.weekday() == 0 || d.weekday() == 6) continue;
    const double v = static_cast<double>(i);
    ds.add_row(std::span<const double>(&v, 1), i % 2, d);
    ++i;
  }
  return ds;
}

}  // namespace testing_support
