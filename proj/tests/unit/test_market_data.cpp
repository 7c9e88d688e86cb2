#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "coevo/errors.hpp"
#include "coevo/indicators.hpp"
#include "coevo/market_data.hpp"
#include "coevo/seeding.hpp"
#include "helpers.hpp"

using namespace coevo;
using testing_support::daily_dataset;
using testing_support::flat_bars;

namespace {

OhlcvSeries parse(const std::string& text) {
  std::istringstream in(text);
  return parse_ohlcv_csv(in, "test.csv");
}

OhlcvSeries random_walk(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<OhlcvBar> bars;
  Date d(2012, 1, 2);
  double c = 100;
  for (std::size_t i = 0; i < n; ++i) {
    while (d.weekday() == 0 || d.weekday() == 6) d = d.plus_days(1);
    const double o = c;
    c *= std::exp(0.01 * standard_normal(rng));
    const double hi = std::max(o, c) * (1 + 0.005 * uniform01(rng));
    const double lo = std::min(o, c) * (1 - 0.005 * uniform01(rng));
    bars.push_back({d, o, hi, lo, c, 1e6 * (1 + uniform01(rng))});
    d = d.plus_days(1);
  }
  return OhlcvSeries(std::move(bars));
}

}  // namespace

TEST_CASE("load_ohlcv parses three rows") {
  const auto s = parse(
      "date,open,high,low,close,volume\n"
      "2020-01-02,10,11,9,10.5,100\n"
      "2020-01-03,10.5,12,10,11,200\n"
      "2020-01-06,11,11.5,10,10.2,150\n");
  CHECK(s.size() == 3);
  CHECK(s[2].close == doctest::Approx(10.2));
}

TEST_CASE("load_ohlcv sorts rows by date") {
  const auto s = parse(
      "date,open,high,low,close,volume\n"
      "2020-01-06,1,1,1,1,1\n"
      "2020-01-02,2,2,2,2,1\n"
      "2020-01-03,3,3,3,3,1\n");
  REQUIRE(s.size() == 3);
  CHECK(s[0].date == Date(2020, 1, 2));
  CHECK(s[1].date == Date(2020, 1, 3));
  CHECK(s[2].date == Date(2020, 1, 6));
}

TEST_CASE("load_ohlcv rejects malformed input") {
  CHECK_THROWS_AS(parse("date,open,high,low,close\n2020-01-02,1,1,1,1\n"), FormatError);
  CHECK_THROWS_AS(parse("date,open,high,low,close,volume\n2020-01-02,1,1,1,0,1\n"), ValueError);
  CHECK_THROWS_AS(parse("date,open,high,low,close,volume\n2020-01-02,1,1,1,1,1\n2020-01-02,1,1,1,1,1\n"),
                  OrderingError);
  try {
    parse("date,open,high,low,close,volume\n2020-01-02,1,1,1,1,1\n2020-01-03,1,x,1,1,1\n");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("generate_labels follows the next-day close rule") {
  const auto l = generate_labels(flat_bars({100, 101, 99}));
  REQUIRE(l.size() == 2);
  CHECK(l[0].label == 1);
  CHECK(l[1].label == 0);
  const auto eq = generate_labels(flat_bars({100, 100}));
  REQUIRE(eq.size() == 1);
  CHECK(eq[0].label == 0);
  CHECK_THROWS_AS(generate_labels(flat_bars({5})), InsufficientDataError);
}

TEST_CASE("default registry has 68 features from 24 families") {
  const auto& reg = IndicatorRegistry::default_registry();
  CHECK(reg.size() == 68);
  CHECK(reg.family_count() == 24);
  const auto ds = compute_features(random_walk(200, 3));
  CHECK(ds.feature_count() == 68);
  CHECK(ds.rows() == 200 - static_cast<std::size_t>(reg.max_lookback()) - 1);
}

TEST_CASE("compute_features needs tau_max + 2 bars") {
  const int need = IndicatorRegistry::default_registry().max_lookback() + 2;
  CHECK_THROWS_AS(compute_features(random_walk(static_cast<std::size_t>(need - 1), 1)), InsufficientDataError);
  CHECK(compute_features(random_walk(static_cast<std::size_t>(need), 1)).rows() == 1);
}

TEST_CASE("SMA of a constant series equals the price") {
  const auto s = flat_bars(std::vector<double>(100, 42.0));
  const auto ds = compute_features(s);
  const auto& names = ds.feature_names();
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (names[j].rfind("sma_", 0) != 0) continue;
    for (std::size_t r = 0; r < ds.rows(); ++r) CHECK(ds.at(r, j) == doctest::Approx(42.0));
  }
}

TEST_CASE("RSI over strictly rising closes is 100; constant is 50") {
  std::vector<double> up;
  for (int i = 0; i < 15; ++i) up.push_back(100 + i);
  CHECK(indicators::rsi(flat_bars(up).bars(), 14) == 100.0);
  std::vector<double> down;
  for (int i = 0; i < 15; ++i) down.push_back(100 - i);
  CHECK(indicators::rsi(flat_bars(down).bars(), 14) == 0.0);
  CHECK(indicators::rsi(flat_bars(std::vector<double>(15, 7.0)).bars(), 14) == 50.0);
}

TEST_CASE("features use only the trailing window") {
  const auto s = random_walk(150, 11);
  const auto full = compute_features(s);
  const int lb = IndicatorRegistry::default_registry().max_lookback();
  for (std::size_t t : {static_cast<std::size_t>(lb), std::size_t{90}, std::size_t{148}}) {
    std::vector<OhlcvBar> tail(s.bars().begin() + static_cast<long>(t) - lb, s.bars().begin() + static_cast<long>(t) + 2);
    const auto part = compute_features(OhlcvSeries(tail));
    REQUIRE(part.rows() == 1);
    const std::size_t row = t - static_cast<std::size_t>(lb);
    CHECK(full.date(row) == part.date(0));
    for (std::size_t j = 0; j < full.feature_count(); ++j) CHECK(full.at(row, j) == part.at(0, j));
  }
}

TEST_CASE("changing the next day moves the label but not the features") {
  const auto s = random_walk(120, 5);
  const auto base = compute_features(s);
  const std::size_t row = 30;
  const std::size_t t = row + static_cast<std::size_t>(IndicatorRegistry::default_registry().max_lookback());
  std::vector<OhlcvBar> bars(s.bars().begin(), s.bars().end());
  const double c = bars[t].close;
  const double next = base.label(row) == 1 ? c * 0.97 : c * 1.03;
  bars[t + 1].close = next;
  bars[t + 1].open = next;
  bars[t + 1].high = next;
  bars[t + 1].low = next;
  const auto moved = compute_features(OhlcvSeries(bars));
  CHECK(moved.label(row) != base.label(row));
  for (std::size_t j = 0; j < base.feature_count(); ++j) CHECK(moved.at(row, j) == base.at(row, j));
}

TEST_CASE("timeline2 yields four disjoint non-empty partitions") {
  const auto ds = daily_dataset(Date(2016, 6, 1), Date(2021, 6, 30));
  const auto split = segment_timeline(ds, TimelineSpec::timeline2());
  CHECK(split.pre_crisis().rows() > 0);
  CHECK(split.crisis_train().rows() > 0);
  CHECK(split.crisis_test().rows() > 0);
  CHECK(split.hold_out_size() > 0);
  CHECK(split.pre_crisis().date(0) == Date(2017, 1, 2));
  CHECK(split.crisis_test().date(0) == Date(2020, 8, 3));
  CHECK(split.crisis_train().date(split.crisis_train().rows() - 1) == Date(2020, 7, 31));

  std::set<Date> others;
  for (const auto* p : {&split.pre_crisis(), &split.crisis_train(), &split.crisis_test()}) {
    for (auto d : p->dates()) CHECK(others.insert(d).second);
  }
  const auto& hold = split.hold_out();
  for (auto d : hold.dates()) {
    CHECK(others.count(d) == 0);
    CHECK(d > *others.rbegin());
  }
}

TEST_CASE("segment_timeline rejects overlap and empty partitions") {
  const auto ds = daily_dataset(Date(2016, 6, 1), Date(2021, 6, 30));
  auto spec = TimelineSpec::timeline2();
  spec.crisis_test.first = Date(2020, 7, 1);
  CHECK_THROWS_AS(segment_timeline(ds, spec), SpecificationError);
  const auto only_pr = daily_dataset(Date(2017, 2, 1), Date(2018, 6, 1));
  CHECK_THROWS_AS(segment_timeline(only_pr, TimelineSpec::timeline2()), CoverageError);
}

TEST_CASE("standardization uses the population s.d.") {
  FeatureDataset ds({"a", "b"});
  const double rows[3][2] = {{1, 5}, {2, 5}, {3, 5}};
  for (int i = 0; i < 3; ++i) ds.add_row(rows[i], i % 2, Date(2020, 1, 1 + i));
  const auto p = fit_standardization(ds);
  const auto z = apply_standardization(p, ds);
  CHECK(z.at(0, 0) == doctest::Approx(-1.224744871).epsilon(1e-9));
  CHECK(z.at(1, 0) == doctest::Approx(0.0));
  CHECK(z.at(2, 0) == doctest::Approx(1.224744871).epsilon(1e-9));
  CHECK(p.constant[1]);
  CHECK_FALSE(p.constant[0]);
  for (int i = 0; i < 3; ++i) CHECK(z.at(static_cast<std::size_t>(i), 1) == 0.0);
}

TEST_CASE("standardized training columns have mean 0 and s.d. 1") {
  const auto ds = compute_features(random_walk(300, 9));
  const auto z = apply_standardization(fit_standardization(ds), ds);
  for (std::size_t j = 0; j < z.feature_count(); ++j) {
    double m = 0, v = 0;
    for (std::size_t r = 0; r < z.rows(); ++r) m += z.at(r, j);
    m /= static_cast<double>(z.rows());
    for (std::size_t r = 0; r < z.rows(); ++r) v += (z.at(r, j) - m) * (z.at(r, j) - m);
    v /= static_cast<double>(z.rows());
    CHECK(std::abs(m) < 1e-9);
    CHECK(std::abs(std::sqrt(v) - 1) < 1e-9);
  }
}

TEST_CASE("synthetic series is deterministic and shifts the base rate") {
  const RegimeParams pre{0.001, 0.01, 0.0}, post{-0.001, 0.01, 0.0};
  const auto a = synth_regime_series(pre, post, {500, 500}, 3);
  const auto b = synth_regime_series(pre, post, {500, 500}, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].close == b[i].close);

  double up_pre = 0, up_post = 0, n_pre = 0, n_post = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto labels = generate_labels(synth_regime_series(pre, post, {500, 500}, seed));
    for (std::size_t t = 0; t < labels.size(); ++t) {
      if (t + 1 < 500) {
        up_pre += labels[t].label;
        ++n_pre;
      } else if (t + 1 > 500) {
        up_post += labels[t].label;
        ++n_post;
      }
    }
  }
  CHECK(up_pre / n_pre > 0.5);
  CHECK(up_post / n_post < 0.5);
}

TEST_CASE("synthetic series without a regime change has matching segment statistics") {
  const RegimeParams same{0.0005, 0.01, 0.0};
  double m1 = 0, m2 = 0;
  const int seeds = 50;
  for (int s = 0; s < seeds; ++s) {
    const auto series = synth_regime_series(same, same, {400, 400}, static_cast<std::uint64_t>(s));
    const auto c = series.closes();
    m1 += std::log(c[399] / c[0]) / 399.0;
    m2 += std::log(c[799] / c[400]) / 399.0;
  }
  CHECK(std::abs(m1 / seeds - m2 / seeds) < 0.0005);
}

TEST_CASE("feature CSV round-trips and skips provenance lines") {
  const auto ds = compute_features(random_walk(100, 2));
  std::ostringstream os;
  os << "# {\"tool\":\"coevo\"}\n";
  ds.write_csv(os);
  std::istringstream in(os.str());
  const auto back = FeatureDataset::read_csv(in);
  REQUIRE(back.rows() == ds.rows());
  CHECK(back.feature_names() == ds.feature_names());
  for (std::size_t r = 0; r < ds.rows(); r += 7) {
    CHECK(back.label(r) == ds.label(r));
    CHECK(back.date(r) == ds.date(r));
    for (std::size_t j = 0; j < ds.feature_count(); ++j) CHECK(back.at(r, j) == ds.at(r, j));
  }
}
