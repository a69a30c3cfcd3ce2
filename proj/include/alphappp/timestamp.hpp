#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <iomanip>
#include <locale>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

namespace alphappp {

/// Milliseconds since the Unix epoch, UTC.
using TimestampMs = std::int64_t;

namespace detail {

inline bool read_digits(std::string_view s, std::size_t& pos, std::size_t count, int& out) {
  if (pos + count > s.size()) return false;
  int v = 0;
  for (std::size_t i = 0; i < count; ++i) {
    char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  pos += count;
  return true;
}

inline TimestampMs to_epoch_ms(int year, int month, int day, int hour, int minute, int second, int millis) {
  using namespace std::chrono;
  const auto ymd = year_month_day{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                                  std::chrono::day{static_cast<unsigned>(day)}};
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return ((static_cast<std::int64_t>(days) * 24 + hour) * 60 + minute) * 60'000 +
         static_cast<std::int64_t>(second) * 1000 + millis;
}

}  // namespace detail

/// Parses `YYYY-MM-DD[T| ]hh:mm[:ss[.fff…]][Z|±hh[:]mm]`. A bare date is midnight UTC.
inline std::optional<TimestampMs> parse_iso8601(std::string_view s) {
  using detail::read_digits;
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  std::size_t p = 0;
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0, millis = 0;
  if (!read_digits(s, p, 4, year) || p >= s.size() || s[p++] != '-') return std::nullopt;
  if (!read_digits(s, p, 2, month) || p >= s.size() || s[p++] != '-') return std::nullopt;
  if (!read_digits(s, p, 2, day)) return std::nullopt;
  if (month < 1 || month > 12 || day < 1 || day > 31) return std::nullopt;
  if (p == s.size()) return detail::to_epoch_ms(year, month, day, 0, 0, 0, 0);
  if (s[p] != 'T' && s[p] != 't' && s[p] != ' ') return std::nullopt;
  ++p;
  if (!read_digits(s, p, 2, hour) || p >= s.size() || s[p++] != ':') return std::nullopt;
  if (!read_digits(s, p, 2, minute)) return std::nullopt;
  if (p < s.size() && s[p] == ':') {
    ++p;
    if (!read_digits(s, p, 2, second)) return std::nullopt;
    if (p < s.size() && (s[p] == '.' || s[p] == ',')) {
      ++p;
      int scale = 100;
      std::size_t start = p;
      while (p < s.size() && s[p] >= '0' && s[p] <= '9') {
        millis += (s[p] - '0') * scale;
        scale /= 10;
        ++p;
      }
      if (p == start) return std::nullopt;
    }
  }
  if (hour > 24 || minute > 59 || second > 60) return std::nullopt;
  int offset_minutes = 0;
  if (p < s.size()) {
    if (s[p] == 'Z' || s[p] == 'z') {
      ++p;
    } else if (s[p] == '+' || s[p] == '-') {
      int sign = s[p] == '-' ? -1 : 1;
      ++p;
      int oh = 0, om = 0;
      if (!read_digits(s, p, 2, oh)) return std::nullopt;
      if (p < s.size() && s[p] == ':') ++p;
      if (p < s.size() && !read_digits(s, p, 2, om)) return std::nullopt;
      offset_minutes = sign * (oh * 60 + om);
    } else {
      return std::nullopt;
    }
  }
  if (p != s.size()) return std::nullopt;
  return detail::to_epoch_ms(year, month, day, hour, minute, second, millis) -
         static_cast<TimestampMs>(offset_minutes) * 60'000;
}

/// Parses with a strftime-style `format` (interpreted as UTC, second resolution).
inline std::optional<TimestampMs> parse_timestamp(std::string_view s, const std::string& format) {
  std::tm tm{};
  std::istringstream in{std::string(s)};
  in.imbue(std::locale::classic());
  in >> std::get_time(&tm, format.c_str());
  if (in.fail()) return std::nullopt;
  in >> std::ws;
  if (!in.eof()) return std::nullopt;
  return detail::to_epoch_ms(tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, 0);
}

}  // namespace alphappp
