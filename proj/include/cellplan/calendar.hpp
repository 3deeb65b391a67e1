#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace cellplan {

using Date = std::chrono::sys_days;

/// Seconds since 1970-01-01T00:00:00Z.
using EpochSeconds = std::int64_t;

/// Day boundaries are evaluated in a fixed-offset zone. Named zones with
/// DST rules are not supported; "UTC" and "+HH:MM" / "-HH:MM" are.
class TimeZone {
 public:
  TimeZone() = default;
  static TimeZone utc() { return {}; }
  static TimeZone fixed(std::chrono::minutes offset);
  /// Accepts "UTC", "Z", "+01:00", "UTC-03:30".
  static TimeZone parse(std::string_view text);

  std::chrono::minutes offset() const { return offset_; }
  std::string name() const;

  /// Local calendar day and minute-of-day of an instant.
  Date local_date(EpochSeconds t) const;
  int local_minute_of_day(EpochSeconds t) const;
  /// Instant of local midnight starting `day`.
  EpochSeconds midnight(Date day) const;

  friend bool operator==(const TimeZone&, const TimeZone&) = default;

 private:
  std::chrono::minutes offset_{0};
};

Date make_date(int year, unsigned month, unsigned day);
std::string format_date(Date d);
/// YYYY-MM-DD
Date parse_date(std::string_view text);

/// ISO-8601 instant "YYYY-MM-DDTHH:MM:SS[.fff][Z|+HH:MM|-HH:MM]"; a
/// missing zone designator means UTC.
EpochSeconds parse_iso8601(std::string_view text);
std::string format_iso8601(EpochSeconds t);

/// 1 = Monday ... 7 = Sunday.
int iso_weekday(Date d);
/// ISO-8601 week number, 1..53.
int iso_week(Date d);
int calendar_year(Date d);

}  // namespace cellplan
