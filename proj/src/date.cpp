#include "coevo/date.hpp"

#include <charconv>
#include <cstdio>

#include "coevo/errors.hpp"

namespace coevo {

namespace chr = std::chrono;

Date::Date(int year, unsigned month, unsigned day) {
  const chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
  if (!ymd.ok()) {
    throw FormatError("invalid calendar date " + std::to_string(year) + "-" + std::to_string(month) + "-" +
                      std::to_string(day));
  }
  days_ = chr::sys_days{ymd}.time_since_epoch().count();
}

Date Date::from_days(std::int64_t days_since_epoch) {
  Date d;
  d.days_ = days_since_epoch;
  return d;
}

Date Date::parse(std::string_view text) {
  auto fail = [&] { return FormatError("expected ISO-8601 date YYYY-MM-DD, got '" + std::string(text) + "'"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw fail();
  int y = 0;
  unsigned m = 0, d = 0;
  auto parse_part = [&](std::size_t pos, std::size_t len, auto& out) {
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    if (ec != std::errc{} || ptr != text.data() + pos + len) throw fail();
  };
  parse_part(0, 4, y);
  parse_part(5, 2, m);
  parse_part(8, 2, d);
  return Date(y, m, d);
}

static chr::year_month_day to_ymd(std::int64_t days) {
  return chr::year_month_day{chr::sys_days{chr::days{days}}};
}

int Date::year() const { return static_cast<int>(to_ymd(days_).year()); }
unsigned Date::month() const { return static_cast<unsigned>(to_ymd(days_).month()); }
unsigned Date::day() const { return static_cast<unsigned>(to_ymd(days_).day()); }

unsigned Date::weekday() const {
  return chr::weekday{chr::sys_days{chr::days{days_}}}.c_encoding();
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
  return buf;
}

Date end_of_month(int year, unsigned month) {
  const chr::year_month_day_last last{chr::year{year}, chr::month_day_last{chr::month{month}}};
  return Date::from_days(chr::sys_days{last}.time_since_epoch().count());
}

}  // namespace coevo
