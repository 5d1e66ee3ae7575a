#include "uba/timestamp.hpp"

#include <array>
#include <cstdio>

namespace uba {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Parses 1..max_digits decimal digits starting at pos; advances pos.
bool read_int(std::string_view s, std::size_t& pos, int max_digits, int& out) {
  int value = 0;
  int digits = 0;
  while (pos < s.size() && digits < max_digits && is_digit(s[pos])) {
    value = value * 10 + (s[pos] - '0');
    ++pos;
    ++digits;
  }
  if (digits == 0) return false;
  out = value;
  return true;
}

bool expect(std::string_view s, std::size_t& pos, char c) {
  if (pos < s.size() && s[pos] == c) {
    ++pos;
    return true;
  }
  return false;
}

}  // namespace

std::int64_t days_from_civil(std::int32_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int32_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<std::int32_t>(yr + (m <= 2));
}

unsigned weekday_from_days(std::int64_t z) {
  return static_cast<unsigned>(z >= -4 ? (z + 4) % 7 : (z + 5) % 7 + 6);
}

bool valid_civil(std::int32_t y, unsigned m, unsigned d) {
  if (m < 1 || m > 12 || d < 1) return false;
  static constexpr std::array<unsigned, 12> days_in = {31, 28, 31, 30, 31, 30,
                                                       31, 31, 30, 31, 30, 31};
  unsigned limit = days_in[m - 1];
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  if (m == 2 && leap) limit = 29;
  return d <= limit;
}

std::int64_t Timestamp::day_number() const {
  return days_from_civil(year, month, day);
}

std::optional<TimestampFormat> detect_timestamp_format(std::string_view text) {
  // "MM/DD/YYYY ..." starts with digits then '/'; ISO starts "YYYY-".
  if (text.size() >= 10) {
    if (is_digit(text[0]) && is_digit(text[1]) && is_digit(text[2]) &&
        is_digit(text[3]) && text[4] == '-') {
      return TimestampFormat::iso8601;
    }
    std::size_t slash = text.find('/');
    if (slash != std::string_view::npos && slash >= 1 && slash <= 2) {
      return TimestampFormat::month_day_year;
    }
  }
  return std::nullopt;
}

std::optional<Timestamp> parse_timestamp(std::string_view text, TimestampFormat fmt) {
  std::size_t pos = 0;
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (fmt == TimestampFormat::month_day_year) {
    if (!read_int(text, pos, 2, month) || !expect(text, pos, '/') ||
        !read_int(text, pos, 2, day) || !expect(text, pos, '/') ||
        !read_int(text, pos, 4, year) || !expect(text, pos, ' ')) {
      return std::nullopt;
    }
  } else {
    if (!read_int(text, pos, 4, year) || !expect(text, pos, '-') ||
        !read_int(text, pos, 2, month) || !expect(text, pos, '-') ||
        !read_int(text, pos, 2, day)) {
      return std::nullopt;
    }
    if (!(expect(text, pos, 'T') || expect(text, pos, ' '))) return std::nullopt;
  }
  if (!read_int(text, pos, 2, hour) || !expect(text, pos, ':') ||
      !read_int(text, pos, 2, minute) || !expect(text, pos, ':') ||
      !read_int(text, pos, 2, second)) {
    return std::nullopt;
  }
  if (pos != text.size()) return std::nullopt;
  if (!valid_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day))) {
    return std::nullopt;
  }
  if (hour > 23 || minute > 59 || second > 59) return std::nullopt;
  Timestamp ts;
  ts.year = year;
  ts.month = static_cast<std::uint8_t>(month);
  ts.day = static_cast<std::uint8_t>(day);
  ts.hour = static_cast<std::uint8_t>(hour);
  ts.minute = static_cast<std::uint8_t>(minute);
  ts.second = static_cast<std::uint8_t>(second);
  return ts;
}

std::string format_timestamp(const Timestamp& ts, TimestampFormat fmt) {
  char buf[32];
  if (fmt == TimestampFormat::month_day_year) {
    std::snprintf(buf, sizeof(buf), "%02u/%02u/%04d %02u:%02u:%02u", ts.month,
                  ts.day, ts.year, ts.hour, ts.minute, ts.second);
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02u:%02u:%02u", ts.year,
                  ts.month, ts.day, ts.hour, ts.minute, ts.second);
  }
  return buf;
}

}  // namespace uba
