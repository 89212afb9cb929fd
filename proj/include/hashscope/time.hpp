#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace hashscope {

using Timestamp = std::chrono::sys_seconds;

namespace detail {

inline bool parse_digits(std::string_view s, std::size_t pos, std::size_t count, int& out) {
  if (pos + count > s.size()) return false;
  int value = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    value = value * 10 + (s[i] - '0');
  }
  out = value;
  return true;
}

}  // namespace detail

/// Parses an RFC 3339 date-time ("2019-04-11T08:00:00Z",
/// "2019-04-11 08:00:00.250+05:30"). Fractional seconds are truncated.
inline std::optional<Timestamp> parse_rfc3339(std::string_view s) {
  using namespace std::chrono;
  int y, mo, d, h, mi, sec;
  if (!detail::parse_digits(s, 0, 4, y) || s.size() < 19 || s[4] != '-' ||
      !detail::parse_digits(s, 5, 2, mo) || s[7] != '-' || !detail::parse_digits(s, 8, 2, d))
    return std::nullopt;
  if (s[10] != 'T' && s[10] != 't' && s[10] != ' ') return std::nullopt;
  if (!detail::parse_digits(s, 11, 2, h) || s[13] != ':' || !detail::parse_digits(s, 14, 2, mi) ||
      s[16] != ':' || !detail::parse_digits(s, 17, 2, sec))
    return std::nullopt;
  if (h > 23 || mi > 59 || sec > 60) return std::nullopt;

  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == start) return std::nullopt;
  }
  if (pos >= s.size()) return std::nullopt;

  int offset_minutes = 0;
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    int oh, om;
    if (!detail::parse_digits(s, pos + 1, 2, oh) || pos + 3 >= s.size() || s[pos + 3] != ':' ||
        !detail::parse_digits(s, pos + 4, 2, om) || oh > 23 || om > 59)
      return std::nullopt;
    offset_minutes = (oh * 60 + om) * (s[pos] == '-' ? -1 : 1);
    pos += 6;
  } else {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;

  const year_month_day date{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;
  return Timestamp{sys_days{date}} + hours{h} + minutes{mi} + seconds{sec} - minutes{offset_minutes};
}

/// "YYYY-MM-DDTHH:MM:SSZ".
inline std::string format_utc(Timestamp ts) {
  using namespace std::chrono;
  const auto day_point = floor<days>(ts);
  const year_month_day date{day_point};
  const hh_mm_ss clock{ts - day_point};
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()),
                static_cast<int>(clock.hours().count()), static_cast<int>(clock.minutes().count()),
                static_cast<int>(clock.seconds().count()));
  return buffer;
}

/// Calendar date of `ts` on a wall clock that runs `utc_offset` ahead of UTC.
inline std::chrono::year_month_day civil_date(Timestamp ts, std::chrono::minutes utc_offset) {
  return std::chrono::year_month_day{std::chrono::floor<std::chrono::days>(ts + utc_offset)};
}

/// "YYYY-MM-DD"
inline std::optional<std::chrono::year_month_day> parse_date(std::string_view s) {
  int y, m, d;
  if (s.size() != 10 || !detail::parse_digits(s, 0, 4, y) || s[4] != '-' ||
      !detail::parse_digits(s, 5, 2, m) || s[7] != '-' || !detail::parse_digits(s, 8, 2, d))
    return std::nullopt;
  const std::chrono::year_month_day date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                         std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

inline std::string format_date(std::chrono::year_month_day date) {
  char buffer[16];
  std::snprintf(buffer, sizeof buffer, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buffer;
}

/// "+05:30" / "-04:00" / "Z"
inline std::optional<std::chrono::minutes> parse_utc_offset(std::string_view s) {
  if (s == "Z" || s == "z") return std::chrono::minutes{0};
  int h, m;
  if (s.size() != 6 || (s[0] != '+' && s[0] != '-') || !detail::parse_digits(s, 1, 2, h) || s[3] != ':' ||
      !detail::parse_digits(s, 4, 2, m) || h > 23 || m > 59)
    return std::nullopt;
  return std::chrono::minutes{(h * 60 + m) * (s[0] == '-' ? -1 : 1)};
}

inline std::string format_utc_offset(std::chrono::minutes offset) {
  const auto total = offset.count();
  const long magnitude = total < 0 ? -total : total;
  char buffer[48];
  std::snprintf(buffer, sizeof buffer, "%c%02ld:%02ld", total < 0 ? '-' : '+', magnitude / 60, magnitude % 60);
  return buffer;
}

}  // namespace hashscope
