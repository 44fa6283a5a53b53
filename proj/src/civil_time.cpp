#include "aplf/civil_time.hpp"

#include "aplf/model_types.hpp"

#include <charconv>
#include <cstdio>

namespace aplf {

namespace {

using namespace std::chrono;

constexpr std::int64_t kMinutesPerDay = 24 * 60;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

int read_int(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
  if (pos + len > text.size()) throw InputError("truncated timestamp '" + std::string(whole) + "'");
  int value = 0;
  const char* first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, value);
  if (ec != std::errc{} || ptr != first + len) {
    throw InputError("malformed timestamp '" + std::string(whole) + "'");
  }
  return value;
}

void expect(std::string_view text, std::size_t pos, char c, std::string_view whole) {
  if (pos >= text.size() || text[pos] != c) {
    throw InputError("malformed timestamp '" + std::string(whole) + "'");
  }
}

sys_days checked_date(int y, int m, int d, std::string_view whole) {
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw InputError("invalid calendar date '" + std::string(whole) + "'");
  return sys_days{ymd};
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

sys_days Timestamp::local_date() const {
  return sys_days{days{floor_div(local_minutes, kMinutesPerDay)}};
}

int Timestamp::minute_of_day() const {
  return static_cast<int>(local_minutes - floor_div(local_minutes, kMinutesPerDay) * kMinutesPerDay);
}

int Timestamp::hour() const { return minute_of_day() / 60; }

weekday Timestamp::weekday() const { return std::chrono::weekday{local_date()}; }

Timestamp make_timestamp(sys_days date, int hour, int minute, int utc_offset_minutes) {
  const std::int64_t day_index = date.time_since_epoch().count();
  return {day_index * kMinutesPerDay + hour * 60 + minute, utc_offset_minutes};
}

sys_days parse_date(std::string_view text) {
  const std::string_view s = trim(text);
  if (s.size() != 10) throw InputError("malformed date '" + std::string(text) + "'");
  const int y = read_int(s, 0, 4, text);
  expect(s, 4, '-', text);
  const int m = read_int(s, 5, 2, text);
  expect(s, 7, '-', text);
  const int d = read_int(s, 8, 2, text);
  return checked_date(y, m, d, text);
}

Timestamp parse_timestamp(std::string_view text) {
  const std::string_view s = trim(text);
  if (s.size() < 10) throw InputError("malformed timestamp '" + std::string(text) + "'");
  const sys_days date = parse_date(s.substr(0, 10));
  if (s.size() == 10) return make_timestamp(date, 0);

  if (s[10] != 'T' && s[10] != ' ') throw InputError("malformed timestamp '" + std::string(text) + "'");
  const int hh = read_int(s, 11, 2, text);
  expect(s, 13, ':', text);
  const int mm = read_int(s, 14, 2, text);
  std::size_t pos = 16;
  if (pos < s.size() && s[pos] == ':') {
    const int ss = read_int(s, pos + 1, 2, text);
    if (ss != 0) throw InputError("sub-minute timestamps are not supported: '" + std::string(text) + "'");
    pos += 3;
  }
  if (hh > 23 || mm > 59) throw InputError("invalid time of day in '" + std::string(text) + "'");

  int offset = 0;
  if (pos < s.size()) {
    const char sign = s[pos];
    if (sign == 'Z' && pos + 1 == s.size()) {
      offset = 0;
    } else if ((sign == '+' || sign == '-') && pos + 6 == s.size()) {
      const int oh = read_int(s, pos + 1, 2, text);
      expect(s, pos + 3, ':', text);
      const int om = read_int(s, pos + 4, 2, text);
      offset = (oh * 60 + om) * (sign == '-' ? -1 : 1);
    } else {
      throw InputError("malformed UTC offset in '" + std::string(text) + "'");
    }
  }
  return make_timestamp(date, hh, mm, offset);
}

std::string format_date(sys_days date) {
  const year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_timestamp(const Timestamp& ts) {
  const int mod = ts.minute_of_day();
  char buf[32];
  std::snprintf(buf, sizeof buf, "T%02d:%02d", mod / 60, mod % 60);
  std::string out = format_date(ts.local_date()) + buf;
  if (ts.utc_offset_minutes == 0) {
    out += 'Z';
  } else {
    const int off = ts.utc_offset_minutes < 0 ? -ts.utc_offset_minutes : ts.utc_offset_minutes;
    std::snprintf(buf, sizeof buf, "%c%02d:%02d", ts.utc_offset_minutes < 0 ? '-' : '+', off / 60,
                  off % 60);
    out += buf;
  }
  return out;
}

int parse_time_of_day(std::string_view text) {
  const std::string_view s = trim(text);
  if (s.size() != 5 || s[2] != ':') throw InputError("time of day must be HH:MM, got '" + std::string(text) + "'");
  const int hh = read_int(s, 0, 2, text);
  const int mm = read_int(s, 3, 2, text);
  if (hh > 23 || mm > 59) throw InputError("invalid time of day '" + std::string(text) + "'");
  return hh * 60 + mm;
}

}  // namespace aplf
