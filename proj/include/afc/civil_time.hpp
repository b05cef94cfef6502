#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace afc {

// All timestamps are naive local civil time. The feeds come from a single
// city, so no zone conversion is ever applied.
using Seconds = std::chrono::seconds;
using DateTime = std::chrono::local_seconds;
using Date = std::chrono::local_days;

// Strict "YYYY-MM-DD hh:mm:ss". Rejects out-of-range fields and impossible
// calendar dates (2011-02-30).
std::optional<DateTime> parse_datetime(std::string_view text);

// Strict "YYYY-MM-DD".
std::optional<Date> parse_date(std::string_view text);

std::string format_datetime(DateTime t);
std::string format_date(Date d);

inline Date date_of(DateTime t) { return std::chrono::floor<std::chrono::days>(t); }
inline Seconds time_of_day(DateTime t) { return t - date_of(t); }

// 0 = Monday ... 6 = Sunday.
inline int weekday_index(Date d) {
  return static_cast<int>(std::chrono::weekday{d}.iso_encoding()) - 1;
}

inline std::int64_t day_number(Date d) { return d.time_since_epoch().count(); }

std::string_view weekday_name(int index);

}  // namespace afc
