#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace uba {

// Calendar timestamp with second resolution. Values are taken as local
// wall-clock time, matching the source logs; no timezone handling.
struct Timestamp {
  std::int32_t year = 1970;
  std::uint8_t month = 1;  // 1..12
  std::uint8_t day = 1;    // 1..31
  std::uint8_t hour = 0;
  std::uint8_t minute = 0;
  std::uint8_t second = 0;

  // Minutes since local midnight, seconds folded in as a fraction. [0,1440).
  double minutes_of_day() const {
    return hour * 60.0 + minute + second / 60.0;
  }

  // Whole minute of day, seconds dropped. Used for mode bucketing.
  int minute_of_day() const { return hour * 60 + minute; }

  // Days since 1970-01-01; buckets events into calendar days.
  std::int64_t day_number() const;

  std::int64_t epoch_seconds() const {
    return day_number() * 86400 + hour * 3600 + minute * 60 + second;
  }

  auto operator<=>(const Timestamp&) const = default;
};

enum class TimestampFormat : std::uint8_t {
  month_day_year,  // "MM/DD/YYYY HH:MM:SS"
  iso8601,         // "YYYY-MM-DDTHH:MM:SS"
};

// Looks at the shape of one date field and decides which of the two accepted
// formats it uses. nullopt when it matches neither.
std::optional<TimestampFormat> detect_timestamp_format(std::string_view text);

std::optional<Timestamp> parse_timestamp(std::string_view text, TimestampFormat fmt);

std::string format_timestamp(const Timestamp& ts, TimestampFormat fmt);

// Civil calendar helpers (proleptic Gregorian).
std::int64_t days_from_civil(std::int32_t y, unsigned m, unsigned d);
void civil_from_days(std::int64_t z, std::int32_t& y, unsigned& m, unsigned& d);
unsigned weekday_from_days(std::int64_t z);  // 0 = Sunday .. 6 = Saturday
bool valid_civil(std::int32_t y, unsigned m, unsigned d);

}  // namespace uba
