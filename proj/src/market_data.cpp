#include "coevo/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "coevo/errors.hpp"
#include "coevo/indicators.hpp"
#include "coevo/seeding.hpp"

namespace coevo {

namespace {

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    auto field = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
      field.remove_suffix(1);
    out.push_back(field);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string where(std::string_view source, std::size_t line_no) {
  return std::string(source) + ": line " + std::to_string(line_no) + ": ";
}

double parse_number(std::string_view field, std::string_view source, std::size_t line_no) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw FormatError(where(source, line_no) + "not a number: '" + std::string(field) + "'");
  }
  return v;
}

void validate_bar(const OhlcvBar& b, const std::string& ctx) {
  for (double v : {b.open, b.high, b.low, b.close}) {
    if (!std::isfinite(v) || v <= 0) throw ValueError(ctx + "prices must be positive and finite");
  }
  if (!std::isfinite(b.volume) || b.volume < 0) throw ValueError(ctx + "volume must be non-negative");
  if (b.low > std::min(b.open, b.close) || b.high < std::max(b.open, b.close) || b.low > b.high) {
    throw ValueError(ctx + "bar violates low <= open/close <= high");
  }
}

}  // namespace

OhlcvSeries::OhlcvSeries(std::vector<OhlcvBar> bars) : bars_(std::move(bars)) {
  if (bars_.empty()) throw InsufficientDataError("OHLCV series must contain at least one bar");
  for (std::size_t i = 0; i < bars_.size(); ++i) {
    validate_bar(bars_[i], "bar " + bars_[i].date.iso() + ": ");
    if (i > 0 && !(bars_[i - 1].date < bars_[i].date)) {
      throw OrderingError("dates must be strictly increasing (" + bars_[i - 1].date.iso() + " then " +
                          bars_[i].date.iso() + ")");
    }
  }
}

std::vector<double> OhlcvSeries::closes() const {
  std::vector<double> out;
  out.reserve(bars_.size());
  for (const auto& b : bars_) out.push_back(b.close);
  return out;
}

OhlcvSeries parse_ohlcv_csv(std::istream& in, std::string_view source) {
  static const std::vector<std::string> kColumns = {"date", "open", "high", "low", "close", "volume"};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line != "\r") break;
  }
  if (line.empty()) throw FormatError(std::string(source) + ": empty file");

  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> column_of;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string name(header[i]);
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    if (std::find(kColumns.begin(), kColumns.end(), name) == kColumns.end()) {
      throw FormatError(where(source, line_no) + "unexpected column '" + name + "'");
    }
    if (!column_of.emplace(name, i).second) throw FormatError(where(source, line_no) + "duplicate column '" + name + "'");
  }
  for (const auto& c : kColumns) {
    if (!column_of.contains(c)) throw FormatError(where(source, line_no) + "missing column '" + c + "'");
  }

  std::vector<std::pair<OhlcvBar, std::size_t>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw FormatError(where(source, line_no) + "expected " + std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    }
    OhlcvBar bar;
    try {
      bar.date = Date::parse(fields[column_of["date"]]);
    } catch (const FormatError& e) {
      throw FormatError(where(source, line_no) + e.what());
    }
    bar.open = parse_number(fields[column_of["open"]], source, line_no);
    bar.high = parse_number(fields[column_of["high"]], source, line_no);
    bar.low = parse_number(fields[column_of["low"]], source, line_no);
    bar.close = parse_number(fields[column_of["close"]], source, line_no);
    bar.volume = parse_number(fields[column_of["volume"]], source, line_no);
    validate_bar(bar, where(source, line_no));
    rows.emplace_back(bar, line_no);
  }
  if (rows.empty()) throw InsufficientDataError(std::string(source) + ": no data rows");

  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first.date < b.first.date; });
  std::vector<OhlcvBar> bars;
  bars.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].first.date == rows[i - 1].first.date) {
      throw OrderingError(where(source, rows[i].second) + "duplicate date " + rows[i].first.date.iso());
    }
    bars.push_back(rows[i].first);
  }
  return OhlcvSeries(std::move(bars));
}

OhlcvSeries load_ohlcv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open OHLCV file " + path.string());
  return parse_ohlcv_csv(in, path.string());
}

void write_ohlcv_csv(std::ostream& out, const OhlcvSeries& series) {
  out << "date,open,high,low,close,volume\n";
  out << std::setprecision(17);
  for (const auto& b : series.bars()) {
    out << b.date.iso() << ',' << b.open << ',' << b.high << ',' << b.low << ',' << b.close << ',' << b.volume
        << '\n';
  }
}

std::vector<DayLabel> generate_labels(const OhlcvSeries& series) {
  if (series.size() < 2) throw InsufficientDataError("labels need at least two bars");
  std::vector<DayLabel> out;
  out.reserve(series.size() - 1);
  for (std::size_t t = 0; t + 1 < series.size(); ++t) {
    out.push_back({series[t].date, series[t + 1].close - series[t].close > 0 ? 1 : 0});
  }
  return out;
}

// ---------------------------------------------------------------------------
// FeatureDataset

FeatureDataset::FeatureDataset(std::vector<std::string> feature_names) : names_(std::move(feature_names)) {}

void FeatureDataset::add_row(std::span<const double> features, int label, Date date) {
  if (features.size() != names_.size()) {
    throw ShapeError("row has " + std::to_string(features.size()) + " features, dataset expects " +
                     std::to_string(names_.size()));
  }
  if (label != 0 && label != 1) throw ValueError("labels must be 0 or 1");
  for (double v : features) {
    if (!std::isfinite(v)) throw ValueError("non-finite feature value on " + date.iso());
  }
  values_.insert(values_.end(), features.begin(), features.end());
  labels_.push_back(static_cast<std::uint8_t>(label));
  dates_.push_back(date);
}

std::size_t FeatureDataset::count_label(int label) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), static_cast<std::uint8_t>(label)));
}

FeatureDataset FeatureDataset::subset(std::span<const std::size_t> row_indices) const {
  FeatureDataset out(names_);
  out.values_.reserve(row_indices.size() * names_.size());
  for (auto i : row_indices) {
    auto r = row(i);
    out.values_.insert(out.values_.end(), r.begin(), r.end());
    out.labels_.push_back(labels_[i]);
    out.dates_.push_back(dates_[i]);
  }
  return out;
}

FeatureDataset FeatureDataset::concat(const FeatureDataset& a, const FeatureDataset& b) {
  if (a.names_ != b.names_) throw ShapeError("cannot concatenate datasets with different features");
  FeatureDataset out = a;
  out.values_.insert(out.values_.end(), b.values_.begin(), b.values_.end());
  out.labels_.insert(out.labels_.end(), b.labels_.begin(), b.labels_.end());
  out.dates_.insert(out.dates_.end(), b.dates_.begin(), b.dates_.end());
  return out;
}

void FeatureDataset::write_csv(std::ostream& out) const {
  for (const auto& n : names_) out << n << ',';
  out << "label,date\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < rows(); ++i) {
    for (double v : row(i)) out << v << ',';
    out << int(labels_[i]) << ',' << dates_[i].iso() << '\n';
  }
}

FeatureDataset FeatureDataset::read_csv(std::istream& in, std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  // Leading '#' lines carry provenance headers.
  bool got = false;
  while ((got = static_cast<bool>(std::getline(in, line)))) {
    ++line_no;
    if (line.empty() || line[0] != '#') break;
  }
  if (!got) throw FormatError(std::string(source) + ": empty feature file");
  auto header = split_csv_line(line);
  if (header.size() < 3 || header[header.size() - 2] != "label" || header.back() != "date") {
    throw FormatError(where(source, line_no) + "feature header must end with label,date");
  }
  std::vector<std::string> names(header.begin(), header.end() - 2);
  FeatureDataset ds(names);
  std::vector<double> x(names.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) throw FormatError(where(source, line_no) + "wrong field count");
    for (std::size_t j = 0; j < names.size(); ++j) x[j] = parse_number(fields[j], source, line_no);
    const double label = parse_number(fields[names.size()], source, line_no);
    ds.add_row(x, static_cast<int>(label), Date::parse(fields.back()));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Timelines

TimelineSpec TimelineSpec::from_months(std::string id, MonthSpan pre, MonthSpan cr, MonthSpan test, MonthSpan hold) {
  const MonthSpan spans[4] = {pre, cr, test, hold};
  DateRange ranges[4];
  for (int i = 0; i < 4; ++i) {
    ranges[i] = {Date(spans[i].first_year, spans[i].first_month, 1), end_of_month(spans[i].last_year, spans[i].last_month)};
  }
  for (int i = 0; i < 3; ++i) {
    const auto& cur = spans[i];
    const auto& next = spans[i + 1];
    if (cur.last_year == next.first_year && cur.last_month == next.first_month) {
      ranges[i].last = ranges[i + 1].first.plus_days(-1);
    }
  }
  return {std::move(id), ranges[0], ranges[1], ranges[2], ranges[3]};
}

TimelineSpec TimelineSpec::timeline1() {
  return from_months("timeline-1", {2005, 3, 2006, 12}, {2007, 1, 2009, 7}, {2009, 7, 2010, 4}, {2010, 5, 2011, 5});
}

TimelineSpec TimelineSpec::timeline2() {
  return from_months("timeline-2", {2017, 1, 2018, 12}, {2019, 1, 2020, 8}, {2020, 8, 2021, 1}, {2021, 1, 2021, 5});
}

DatasetSplit::DatasetSplit(std::string timeline_id, FeatureDataset pre_crisis, FeatureDataset crisis_train,
                           FeatureDataset crisis_test, FeatureDataset hold_out)
    : timeline_id_(std::move(timeline_id)),
      pre_crisis_(std::move(pre_crisis)),
      crisis_train_(std::move(crisis_train)),
      crisis_test_(std::move(crisis_test)),
      hold_out_(std::move(hold_out)),
      hold_out_reads_(std::make_shared<std::atomic<std::uint64_t>>(0)) {}

const FeatureDataset& DatasetSplit::hold_out() const {
  hold_out_reads_->fetch_add(1);
  return hold_out_;
}

DatasetSplit segment_timeline(const FeatureDataset& dataset, const TimelineSpec& spec) {
  const DateRange* ranges[4] = {&spec.pre_crisis, &spec.crisis_train, &spec.crisis_test, &spec.hold_out};
  static const char* kNames[4] = {"pre_crisis", "crisis_train", "crisis_test", "hold_out"};
  for (int i = 0; i < 4; ++i) {
    if (ranges[i]->last < ranges[i]->first) {
      throw SpecificationError(std::string(kNames[i]) + " range ends before it starts");
    }
    for (int j = i + 1; j < 4; ++j) {
      if (ranges[i]->overlaps(*ranges[j])) {
        throw SpecificationError(std::string(kNames[i]) + " and " + kNames[j] + " ranges overlap");
      }
    }
  }
  for (int i = 0; i < 3; ++i) {
    if (!(ranges[i]->last < spec.hold_out.first)) {
      throw SpecificationError("hold_out must be strictly the latest range");
    }
  }

  std::vector<std::size_t> idx[4];
  for (std::size_t r = 0; r < dataset.rows(); ++r) {
    for (int i = 0; i < 4; ++i) {
      if (ranges[i]->contains(dataset.date(r))) {
        idx[i].push_back(r);
        break;
      }
    }
  }
  std::string empty;
  for (int i = 0; i < 4; ++i) {
    if (idx[i].empty()) empty += (empty.empty() ? "" : ", ") + std::string(kNames[i]);
  }
  if (!empty.empty()) throw CoverageError("no rows fall inside: " + empty);
  return DatasetSplit(spec.id, dataset.subset(idx[0]), dataset.subset(idx[1]), dataset.subset(idx[2]),
                      dataset.subset(idx[3]));
}

// ---------------------------------------------------------------------------
// Standardization

StandardizationParams fit_standardization(const FeatureDataset& train) {
  if (train.empty()) throw EmptyDataError("cannot fit standardization on an empty dataset");
  const std::size_t nf = train.feature_count();
  const double n = static_cast<double>(train.rows());
  StandardizationParams p{std::vector<double>(nf, 0.0), std::vector<double>(nf, 0.0), std::vector<bool>(nf, false)};
  for (std::size_t r = 0; r < train.rows(); ++r) {
    for (std::size_t j = 0; j < nf; ++j) p.mean[j] += train.at(r, j);
  }
  for (auto& m : p.mean) m /= n;
  for (std::size_t r = 0; r < train.rows(); ++r) {
    for (std::size_t j = 0; j < nf; ++j) {
      const double d = train.at(r, j) - p.mean[j];
      p.sd[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < nf; ++j) {
    p.sd[j] = std::sqrt(p.sd[j] / n);
    if (!(p.sd[j] > 1e-12 * std::max(1.0, std::abs(p.mean[j])))) {
      p.sd[j] = 1.0;
      p.constant[j] = true;
    }
  }
  return p;
}

FeatureDataset apply_standardization(const StandardizationParams& params, const FeatureDataset& ds) {
  if (params.mean.size() != ds.feature_count()) throw ShapeError("standardization width mismatch");
  FeatureDataset out(ds.feature_names());
  std::vector<double> x(ds.feature_count());
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = (ds.at(r, j) - params.mean[j]) / params.sd[j];
    out.add_row(x, ds.label(r), ds.date(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic regime-shift data

OhlcvSeries synth_regime_series(const RegimeParams& pre, const RegimeParams& post, RegimeLengths lengths,
                                std::uint64_t seed) {
  const std::size_t min_len = static_cast<std::size_t>(IndicatorRegistry::default_registry().max_lookback()) + 2;
  if (lengths.pre < min_len || lengths.post < min_len) {
    throw InsufficientDataError("each regime needs at least " + std::to_string(min_len) + " days");
  }
  for (const auto* p : {&pre, &post}) {
    if (!(p->volatility > 0) || std::abs(p->autocorrelation) >= 1) {
      throw ValueError("regime needs volatility > 0 and |autocorrelation| < 1");
    }
  }
  Rng rng(mix_seed(seed, 0x5eed));
  std::vector<OhlcvBar> bars;
  bars.reserve(lengths.pre + lengths.post);
  Date day(2000, 1, 3);
  double close = 100.0;
  double prev_excess = 0.0;
  for (std::size_t t = 0; t < lengths.pre + lengths.post; ++t) {
    const RegimeParams& p = t < lengths.pre ? pre : post;
    while (day.weekday() == 0 || day.weekday() == 6) day = day.plus_days(1);
    const double innovation = p.volatility * std::sqrt(1.0 - p.autocorrelation * p.autocorrelation);
    const double excess = p.autocorrelation * prev_excess + innovation * standard_normal(rng);
    const double ret = p.drift + excess;
    prev_excess = excess;

    OhlcvBar bar;
    bar.date = day;
    bar.open = close * std::exp(0.2 * p.volatility * standard_normal(rng));
    close *= std::exp(ret);
    bar.close = close;
    bar.high = std::max(bar.open, bar.close) * std::exp(std::abs(0.5 * p.volatility * standard_normal(rng)));
    bar.low = std::min(bar.open, bar.close) * std::exp(-std::abs(0.5 * p.volatility * standard_normal(rng)));
    bar.volume = std::round(1.0e6 * std::exp(0.3 * standard_normal(rng) + 20.0 * std::abs(ret)));
    bars.push_back(bar);
    day = day.plus_days(1);
  }
  return OhlcvSeries(std::move(bars));
}

}  // namespace coevo
