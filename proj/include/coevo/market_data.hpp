#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coevo/date.hpp"

namespace coevo {

struct OhlcvBar {
  Date date;
  double open = 0;
  double high = 0;
  double low = 0;
  double close = 0;
  double volume = 0;
};

/// Daily bars with strictly increasing dates. Construction validates every bar.
class OhlcvSeries {
 public:
  OhlcvSeries() = default;
  explicit OhlcvSeries(std::vector<OhlcvBar> bars);

  std::span<const OhlcvBar> bars() const { return bars_; }
  std::size_t size() const { return bars_.size(); }
  const OhlcvBar& operator[](std::size_t i) const { return bars_[i]; }
  std::vector<double> closes() const;

 private:
  std::vector<OhlcvBar> bars_;
};

/// Reads `date,open,high,low,close,volume` CSV. Rows may appear in any order;
/// the result is sorted by date. Errors carry the source name and line number.
OhlcvSeries load_ohlcv(const std::filesystem::path& path);
OhlcvSeries parse_ohlcv_csv(std::istream& in, std::string_view source_name = "<stream>");
void write_ohlcv_csv(std::ostream& out, const OhlcvSeries& series);

struct DayLabel {
  Date date;  // day t; the label describes the move from t to t+1
  int label = 0;
};

/// y(t+1) = 1 iff C(t+1) - C(t) > 0. One label per day that has a successor.
std::vector<DayLabel> generate_labels(const OhlcvSeries& series);

/// Row-major feature matrix with binary labels and row dates.
class FeatureDataset {
 public:
  FeatureDataset() = default;
  explicit FeatureDataset(std::vector<std::string> feature_names);

  void add_row(std::span<const double> features, int label, Date date);

  std::size_t rows() const { return labels_.size(); }
  std::size_t feature_count() const { return names_.size(); }
  bool empty() const { return labels_.empty(); }
  const std::vector<std::string>& feature_names() const { return names_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * names_.size(), names_.size()};
  }
  double at(std::size_t row, std::size_t col) const { return values_[row * names_.size() + col]; }
  int label(std::size_t i) const { return labels_[i]; }
  Date date(std::size_t i) const { return dates_[i]; }
  std::span<const double> values() const { return values_; }
  std::span<const std::uint8_t> labels() const { return labels_; }
  std::span<const Date> dates() const { return dates_; }

  std::size_t count_label(int label) const;
  FeatureDataset subset(std::span<const std::size_t> row_indices) const;
  /// Rows of `a` followed by rows of `b`; feature names must match.
  static FeatureDataset concat(const FeatureDataset& a, const FeatureDataset& b);

  void write_csv(std::ostream& out) const;
  static FeatureDataset read_csv(std::istream& in, std::string_view source_name = "<stream>");

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;
  std::vector<std::uint8_t> labels_;
  std::vector<Date> dates_;
};

/// Inclusive calendar range.
struct DateRange {
  Date first;
  Date last;
  bool contains(Date d) const { return first <= d && d <= last; }
  bool overlaps(const DateRange& o) const { return first <= o.last && o.first <= last; }
};

/// The four timeline roles: pre-crisis, crisis-train, crisis-test, hold-out.
struct TimelineSpec {
  std::string id;
  DateRange pre_crisis;
  DateRange crisis_train;
  DateRange crisis_test;
  DateRange hold_out;

  struct MonthSpan {
    int first_year;
    unsigned first_month;
    int last_year;
    unsigned last_month;
  };
  /// Builds ranges from month spans. When a range ends in the month the next
  /// one starts, the shared month goes to the later range (its first day is
  /// the boundary).
  static TimelineSpec from_months(std::string id, MonthSpan pre, MonthSpan cr, MonthSpan test, MonthSpan hold);
  /// 2008 crisis: 2005-03..2006-12 / 2007-01..2009-07 / 2009-07..2010-04 / 2010-05..2011-05.
  static TimelineSpec timeline1();
  /// COVID-19: 2017-01..2018-12 / 2019-01..2020-08 / 2020-08..2021-01 / 2021-01..2021-05.
  static TimelineSpec timeline2();
};

/// Four disjoint partitions. Reads of the hold-out partition are counted so
/// callers can prove it was never touched during search.
class DatasetSplit {
 public:
  DatasetSplit(std::string timeline_id, FeatureDataset pre_crisis, FeatureDataset crisis_train,
               FeatureDataset crisis_test, FeatureDataset hold_out);

  const std::string& timeline_id() const { return timeline_id_; }
  const FeatureDataset& pre_crisis() const { return pre_crisis_; }
  const FeatureDataset& crisis_train() const { return crisis_train_; }
  const FeatureDataset& crisis_test() const { return crisis_test_; }
  const FeatureDataset& hold_out() const;

  std::size_t hold_out_size() const { return hold_out_.rows(); }
  std::uint64_t hold_out_reads() const { return hold_out_reads_->load(); }

 private:
  std::string timeline_id_;
  FeatureDataset pre_crisis_;
  FeatureDataset crisis_train_;
  FeatureDataset crisis_test_;
  FeatureDataset hold_out_;
  std::shared_ptr<std::atomic<std::uint64_t>> hold_out_reads_;
};

/// Assigns rows to partitions by date; rows outside every range are dropped.
/// Throws SpecificationError on overlapping ranges (or a hold-out range that is
/// not the latest) and CoverageError when a partition ends up empty.
DatasetSplit segment_timeline(const FeatureDataset& dataset, const TimelineSpec& spec);

struct StandardizationParams {
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<bool> constant;  // sd forced to 1 for these
};

StandardizationParams fit_standardization(const FeatureDataset& train);
FeatureDataset apply_standardization(const StandardizationParams& params, const FeatureDataset& ds);

/// Parameters of one market regime for the synthetic generator. Daily log
/// returns follow an AR(1) around `drift` with marginal s.d. `volatility`.
struct RegimeParams {
  double drift = 0.0;
  double volatility = 0.01;
  double autocorrelation = 0.0;
};

struct RegimeLengths {
  std::size_t pre = 500;
  std::size_t post = 500;
};

/// Geometric random walk whose dynamics switch from `pre` to `post` after
/// `lengths.pre` trading days. Weekdays only, starting 2000-01-03.
OhlcvSeries synth_regime_series(const RegimeParams& pre, const RegimeParams& post, RegimeLengths lengths,
                                std::uint64_t seed);

}  // namespace coevo
