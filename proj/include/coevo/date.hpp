#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace coevo {

/// Calendar date (proleptic Gregorian). Thin wrapper so dates order, hash and
/// print without dragging <chrono> calendar arithmetic into every caller.
class Date {
 public:
  constexpr Date() = default;
  Date(int year, unsigned month, unsigned day);

  /// Parses "YYYY-MM-DD". Throws FormatError on anything else.
  static Date parse(std::string_view text);
  static Date from_days(std::int64_t days_since_epoch);

  std::int64_t days() const { return days_; }
  int year() const;
  unsigned month() const;
  unsigned day() const;
  /// 0 = Sunday ... 6 = Saturday.
  unsigned weekday() const;
  Date plus_days(std::int64_t n) const { return from_days(days_ + n); }

  std::string iso() const;

  friend constexpr auto operator<=>(const Date&, const Date&) = default;

 private:
  std::int64_t days_ = 0;
};

/// Last day of the given month.
Date end_of_month(int year, unsigned month);

}  // namespace coevo
