#include "cellplan/calendar.hpp"

#include <cstdio>

#include "cellplan/common.hpp"

namespace cellplan {

namespace chr = std::chrono;

namespace {

constexpr EpochSeconds kSecondsPerDay = 86400;

EpochSeconds floor_div(EpochSeconds a, EpochSeconds b) {
  EpochSeconds q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

int digits(std::string_view text, std::size_t pos, std::size_t count) {
  if (pos + count > text.size()) throw ParseError("truncated timestamp: '" + std::string(text) + "'");
  int value = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') throw ParseError("bad digit in timestamp: '" + std::string(text) + "'");
    value = value * 10 + (c - '0');
  }
  return value;
}

void expect(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c)
    throw ParseError("malformed timestamp: '" + std::string(text) + "'");
}

chr::minutes parse_offset(std::string_view text, std::string_view whole) {
  // text starts with '+' or '-'
  const int sign = text[0] == '-' ? -1 : 1;
  int hh = 0, mm = 0;
  if (text.size() == 6 && text[3] == ':') {
    hh = digits(text, 1, 2);
    mm = digits(text, 4, 2);
  } else if (text.size() == 5) {
    hh = digits(text, 1, 2);
    mm = digits(text, 3, 2);
  } else if (text.size() == 3) {
    hh = digits(text, 1, 2);
  } else {
    throw ParseError("malformed zone offset: '" + std::string(whole) + "'");
  }
  if (hh > 23 || mm > 59) throw ParseError("zone offset out of range: '" + std::string(whole) + "'");
  return chr::minutes(sign * (hh * 60 + mm));
}

}  // namespace

TimeZone TimeZone::fixed(chr::minutes offset) {
  if (offset <= chr::hours(-24) || offset >= chr::hours(24))
    throw InvalidArgument("time zone offset must lie strictly within +/-24h");
  TimeZone tz;
  tz.offset_ = offset;
  return tz;
}

TimeZone TimeZone::parse(std::string_view text) {
  text = trim(text);
  if (text.empty() || text == "UTC" || text == "Z" || text == "utc") return utc();
  if (text.starts_with("UTC")) text.remove_prefix(3);
  if (text.empty() || (text[0] != '+' && text[0] != '-'))
    throw InvalidArgument("unsupported time zone '" + std::string(text) + "' (use UTC or +HH:MM)");
  try {
    return fixed(parse_offset(text, text));
  } catch (const ParseError& e) {
    throw InvalidArgument(e.what());
  }
}

std::string TimeZone::name() const {
  if (offset_.count() == 0) return "UTC";
  const auto total = offset_.count();
  const auto magnitude = total < 0 ? -total : total;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%02d:%02d", total < 0 ? '-' : '+', static_cast<int>(magnitude / 60),
                static_cast<int>(magnitude % 60));
  return buf;
}

Date TimeZone::local_date(EpochSeconds t) const {
  const EpochSeconds local = t + offset_.count() * 60;
  return Date(chr::days(floor_div(local, kSecondsPerDay)));
}

int TimeZone::local_minute_of_day(EpochSeconds t) const {
  const EpochSeconds local = t + offset_.count() * 60;
  const EpochSeconds sod = local - floor_div(local, kSecondsPerDay) * kSecondsPerDay;
  return static_cast<int>(sod / 60);
}

EpochSeconds TimeZone::midnight(Date day) const {
  return static_cast<EpochSeconds>(day.time_since_epoch().count()) * kSecondsPerDay - offset_.count() * 60;
}

Date make_date(int year, unsigned month, unsigned day) {
  const chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
  if (!ymd.ok()) throw InvalidArgument("invalid calendar date");
  return Date(ymd);
}

std::string format_date(Date d) {
  const chr::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Date parse_date(std::string_view text) {
  text = trim(text);
  if (text.size() != 10) throw ParseError("malformed date: '" + std::string(text) + "'");
  const int y = digits(text, 0, 4);
  expect(text, 4, '-');
  const int m = digits(text, 5, 2);
  expect(text, 7, '-');
  const int d = digits(text, 8, 2);
  const chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(m)},
                                chr::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw ParseError("invalid date: '" + std::string(text) + "'");
  return Date(ymd);
}

EpochSeconds parse_iso8601(std::string_view text) {
  const std::string_view whole = text;
  text = trim(text);
  if (text.size() < 19) throw ParseError("malformed timestamp: '" + std::string(whole) + "'");
  const Date day = parse_date(text.substr(0, 10));
  if (text[10] != 'T' && text[10] != ' ') throw ParseError("malformed timestamp: '" + std::string(whole) + "'");
  const int hh = digits(text, 11, 2);
  expect(text, 13, ':');
  const int mi = digits(text, 14, 2);
  expect(text, 16, ':');
  const int ss = digits(text, 17, 2);
  if (hh > 23 || mi > 59 || ss > 59) throw ParseError("time out of range: '" + std::string(whole) + "'");
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    if (pos == start) throw ParseError("malformed fraction: '" + std::string(whole) + "'");
  }
  chr::minutes offset{0};
  const std::string_view zone = text.substr(pos);
  if (zone.empty() || zone == "Z") {
  } else if (zone[0] == '+' || zone[0] == '-') {
    offset = parse_offset(zone, whole);
  } else {
    throw ParseError("malformed zone designator: '" + std::string(whole) + "'");
  }
  const EpochSeconds local = static_cast<EpochSeconds>(day.time_since_epoch().count()) * kSecondsPerDay +
                             hh * 3600 + mi * 60 + ss;
  return local - offset.count() * 60;
}

std::string format_iso8601(EpochSeconds t) {
  const Date day = TimeZone::utc().local_date(t);
  const EpochSeconds sod = t - static_cast<EpochSeconds>(day.time_since_epoch().count()) * kSecondsPerDay;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%sT%02d:%02d:%02dZ", format_date(day).c_str(), static_cast<int>(sod / 3600),
                static_cast<int>((sod / 60) % 60), static_cast<int>(sod % 60));
  return buf;
}

int iso_weekday(Date d) { return static_cast<int>(chr::weekday{d}.iso_encoding()); }

int iso_week(Date d) {
  // The ISO week containing d is the one containing its Thursday.
  const Date thursday = d + chr::days(4 - iso_weekday(d));
  const chr::year_month_day ymd{thursday};
  const Date jan1 = Date(chr::year_month_day{ymd.year(), chr::January, chr::day{1}});
  return static_cast<int>((thursday - jan1).count() / 7) + 1;
}

int calendar_year(Date d) { return static_cast<int>(chr::year_month_day{d}.year()); }

}  // namespace cellplan
