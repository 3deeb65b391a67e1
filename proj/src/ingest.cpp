#include "cellplan/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cellplan {

namespace {

bool looks_like_epoch(std::string_view field) {
  field = trim(field);
  if (field.empty()) return false;
  std::size_t i = field[0] == '-' ? 1 : 0;
  if (i == field.size()) return false;
  for (; i < field.size(); ++i)
    if (field[i] < '0' || field[i] > '9') return false;
  return true;
}

// "# format=epoch delimiter=;" style header directives.
void apply_header(std::string_view line, TimestampFormat& declared) {
  line.remove_prefix(1);
  for (auto token : split(line, ' ')) {
    token = trim(token);
    const auto eq = token.find('=');
    if (eq == std::string_view::npos) continue;
    const auto key = trim(token.substr(0, eq));
    const auto value = trim(token.substr(eq + 1));
    if (key != "format") continue;
    if (value == "iso8601" || value == "iso")
      declared = TimestampFormat::Iso8601;
    else if (value == "epoch")
      declared = TimestampFormat::Epoch;
  }
}

}  // namespace

CdrParseFailure::CdrParseFailure(std::vector<LineError> errors, std::size_t data_lines)
    : ParseError("CDR input rejected: " + std::to_string(errors.size()) + " malformed of " +
                 std::to_string(data_lines) + " data lines" +
                 (errors.empty() ? std::string()
                                 : " (first at line " + std::to_string(errors.front().line) + ": " +
                                       errors.front().message + ")")),
      errors_(std::move(errors)),
      data_lines_(data_lines) {}

ParseResult parse_cdr(std::istream& input, const CdrFormat& format) {
  if (!(format.max_error_fraction >= 0.0)) throw InvalidArgument("max_error_fraction must be >= 0");
  ParseResult result;
  TimestampFormat ts_format = format.timestamps;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      if (format.timestamps == TimestampFormat::Auto && result.data_lines == 0) apply_header(view, ts_format);
      continue;
    }
    ++result.data_lines;
    const auto fields = split(view, format.delimiter);
    if (fields.size() != 3 && fields.size() != 5) {
      result.errors.push_back({line_no, "expected 3 or 5 fields, found " + std::to_string(fields.size())});
      continue;
    }
    const auto user = trim(fields[0]);
    const auto site = trim(fields[1]);
    const auto stamp = trim(fields[2]);
    if (user.empty() || site.empty()) {
      result.errors.push_back({line_no, "empty user_id or site_id"});
      continue;
    }
    if (ts_format == TimestampFormat::Auto)
      ts_format = looks_like_epoch(stamp) ? TimestampFormat::Epoch : TimestampFormat::Iso8601;
    try {
      EpochSeconds t = 0;
      if (ts_format == TimestampFormat::Epoch) {
        if (!looks_like_epoch(stamp)) throw ParseError("expected epoch seconds, found '" + std::string(stamp) + "'");
        t = parse_int(stamp);
      } else {
        t = parse_iso8601(stamp);
      }
      result.records.push_back({std::string(user), std::string(site), t});
    } catch (const ParseError& e) {
      result.errors.push_back({line_no, e.what()});
    }
  }
  result.detected = ts_format;
  if (result.data_lines > 0 &&
      static_cast<double>(result.errors.size()) > format.max_error_fraction * static_cast<double>(result.data_lines))
    throw CdrParseFailure(result.errors, result.data_lines);
  return result;
}

void write_error_report(std::ostream& out, std::span<const LineError> errors) {
  for (const auto& e : errors) out << "line " << e.line << ": " << e.message << '\n';
}

void LoadAccumulator::add(const CdrRecord& record) {
  const Date day = tz_.local_date(record.timestamp);
  const int bin = tz_.local_minute_of_day(record.timestamp) / kBinMinutes;
  auto& sets = accumulators_[{record.site_id, day}];
  sets[static_cast<std::size_t>(bin)].insert(record.user_id);
}

SeriesMap LoadAccumulator::finish() const {
  SeriesMap out;
  for (const auto& [key, sets] : accumulators_) {
    LoadSeries s;
    s.site_id = key.first;
    s.date = key.second;
    for (std::size_t b = 0; b < sets.size(); ++b) s.bins[b] = static_cast<int>(sets[b].size());
    out.emplace(key, std::move(s));
  }
  return out;
}

SeriesMap build_load_series(std::span<const CdrRecord> records, TimeZone tz) {
  LoadAccumulator acc(tz);
  for (const auto& r : records) acc.add(r);
  return acc.finish();
}

std::vector<LoadSeries> series_values(const SeriesMap& map) {
  std::vector<LoadSeries> out;
  out.reserve(map.size());
  for (const auto& [key, s] : map) out.push_back(s);
  return out;
}

std::string to_string(Granularity g) { return g == Granularity::TenMin ? "10min" : "hourly"; }

Granularity parse_granularity(std::string_view text) {
  text = trim(text);
  if (text == "10min" || text == "tenmin") return Granularity::TenMin;
  if (text == "hourly") return Granularity::Hourly;
  throw InvalidArgument("unknown granularity '" + std::string(text) + "' (use 10min or hourly)");
}

bool min_max_scale(std::span<const double> in, std::span<double> out) {
  require_dimension("min_max_scale", in.size(), out.size());
  if (in.empty()) return true;
  const auto [lo_it, hi_it] = std::minmax_element(in.begin(), in.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (hi == lo) {
    std::fill(out.begin(), out.end(), 0.0);
    return true;
  }
  const double range = hi - lo;
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = (in[i] - lo) / range;
  // exact endpoints, independent of rounding in the division
  out[static_cast<std::size_t>(lo_it - in.begin())] = 0.0;
  out[static_cast<std::size_t>(hi_it - in.begin())] = 1.0;
  return false;
}

Profile normalize(const LoadSeries& series) {
  Profile p;
  p.site_id = series.site_id;
  p.date = series.date;
  p.granularity = Granularity::TenMin;
  const Vector raw(series.bins.begin(), series.bins.end());
  p.values.resize(raw.size());
  p.degenerate = min_max_scale(raw, p.values);
  return p;
}

Profile aggregate_hourly(const LoadSeries& series) {
  Profile p;
  p.site_id = series.site_id;
  p.date = series.date;
  p.granularity = Granularity::Hourly;
  Vector hourly(kHoursPerDay, 0.0);
  for (int b = 0; b < kBinsPerDay; ++b) hourly[static_cast<std::size_t>(b / kBinsPerHour)] += series.bins[b];
  p.values.resize(hourly.size());
  p.degenerate = min_max_scale(hourly, p.values);
  return p;
}

Profile to_profile(const LoadSeries& series, Granularity granularity) {
  return granularity == Granularity::TenMin ? normalize(series) : aggregate_hourly(series);
}

void write_load_series(std::ostream& out, std::span<const LoadSeries> series) {
  out << "site_id,date";
  for (int b = 0; b < kBinsPerDay; ++b) out << ",b" << b;
  out << '\n';
  for (const auto& s : series) {
    out << s.site_id << ',' << format_date(s.date);
    for (int v : s.bins) out << ',' << v;
    out << '\n';
  }
}

std::vector<LoadSeries> read_load_series(std::istream& in) {
  std::vector<LoadSeries> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (view.starts_with("site_id")) continue;
    }
    const auto fields = split(view, ',');
    if (fields.size() != 2 + kBinsPerDay)
      throw ParseError("load series line " + std::to_string(line_no) + ": expected " +
                       std::to_string(2 + kBinsPerDay) + " fields, found " + std::to_string(fields.size()));
    LoadSeries s;
    s.site_id = std::string(trim(fields[0]));
    s.date = parse_date(fields[1]);
    for (int b = 0; b < kBinsPerDay; ++b) {
      const auto v = parse_int(fields[static_cast<std::size_t>(2 + b)]);
      if (v < 0) throw ParseError("load series line " + std::to_string(line_no) + ": negative bin count");
      s.bins[static_cast<std::size_t>(b)] = static_cast<int>(v);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_profiles(std::ostream& out, std::span<const Profile> profiles) {
  out << "site_id,date,granularity,degenerate,values\n";
  for (const auto& p : profiles) {
    out << p.site_id << ',' << format_date(p.date) << ',' << to_string(p.granularity) << ','
        << (p.degenerate ? 1 : 0);
    for (double v : p.values) out << ',' << format_double(v);
    out << '\n';
  }
}

std::vector<Profile> read_profiles(std::istream& in) {
  std::vector<Profile> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty() || view.front() == '#' || view.starts_with("site_id")) continue;
    const auto fields = split(view, ',');
    if (fields.size() < 4) throw ParseError("profile line " + std::to_string(line_no) + ": too few fields");
    Profile p;
    p.site_id = std::string(trim(fields[0]));
    p.date = parse_date(fields[1]);
    p.granularity = parse_granularity(fields[2]);
    p.degenerate = parse_int(fields[3]) != 0;
    for (std::size_t i = 4; i < fields.size(); ++i) {
      const double v = parse_double(fields[i]);
      if (!(v >= 0.0 && v <= 1.0)) throw ParseError("profile line " + std::to_string(line_no) + ": value outside [0,1]");
      p.values.push_back(v);
    }
    require_dimension("profile line " + std::to_string(line_no), dimension_of(p.granularity), p.values.size());
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace cellplan
