#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace aplf {

/// Civil (wall-clock) time with the UTC offset it was recorded in. Ordering
/// and differences use the UTC instant; calendar logic uses the local fields.
struct Timestamp {
  std::int64_t local_minutes = 0;  // minutes since 1970-01-01T00:00 local
  int utc_offset_minutes = 0;

  std::int64_t utc_minutes() const { return local_minutes - utc_offset_minutes; }
  std::chrono::sys_days local_date() const;
  int hour() const;
  int minute_of_day() const;
  std::chrono::weekday weekday() const;

  Timestamp plus_minutes(std::int64_t minutes) const {
    return {local_minutes + minutes, utc_offset_minutes};
  }

  friend bool operator==(const Timestamp& a, const Timestamp& b) {
    return a.utc_minutes() == b.utc_minutes();
  }
  friend auto operator<=>(const Timestamp& a, const Timestamp& b) {
    return a.utc_minutes() <=> b.utc_minutes();
  }
};

Timestamp make_timestamp(std::chrono::sys_days date, int hour, int minute = 0,
                         int utc_offset_minutes = 0);

/// Accepts "YYYY-MM-DD[T| ]HH:MM[:SS][Z|+HH:MM|-HH:MM]" and a bare
/// "YYYY-MM-DD" (midnight). Throws InputError on malformed text.
Timestamp parse_timestamp(std::string_view text);

/// ISO-8601 with minutes precision; the offset is written as Z when zero.
std::string format_timestamp(const Timestamp& ts);

std::chrono::sys_days parse_date(std::string_view text);
std::string format_date(std::chrono::sys_days date);

/// "HH:MM" -> minutes after midnight.
int parse_time_of_day(std::string_view text);

}  // namespace aplf
