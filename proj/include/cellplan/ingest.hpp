#pragma once

// CDR parsing and reduction to per-station daily load series.

#include <array>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cellplan/calendar.hpp"
#include "cellplan/common.hpp"

namespace cellplan {

inline constexpr int kBinsPerDay = 144;
inline constexpr int kBinMinutes = 10;
inline constexpr int kHoursPerDay = 24;
inline constexpr int kBinsPerHour = 6;

struct CdrRecord {
  std::string user_id;
  std::string site_id;
  EpochSeconds timestamp = 0;

  friend bool operator==(const CdrRecord&, const CdrRecord&) = default;
};

enum class TimestampFormat { Auto, Iso8601, Epoch };

struct CdrFormat {
  char delimiter = ',';
  /// Auto: taken from a "# format=..." header line, otherwise detected
  /// from the first data line.
  TimestampFormat timestamps = TimestampFormat::Auto;
  /// Parsing fails when malformed lines exceed this fraction of data lines.
  double max_error_fraction = 0.01;
};

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct ParseResult {
  std::vector<CdrRecord> records;
  std::vector<LineError> errors;
  std::size_t data_lines = 0;
  TimestampFormat detected = TimestampFormat::Auto;
};

/// Raised when the malformed-line fraction exceeds the threshold. Carries
/// the full error report.
class CdrParseFailure : public ParseError {
 public:
  CdrParseFailure(std::vector<LineError> errors, std::size_t data_lines);
  const std::vector<LineError>& errors() const { return errors_; }
  std::size_t data_lines() const { return data_lines_; }

 private:
  std::vector<LineError> errors_;
  std::size_t data_lines_;
};

ParseResult parse_cdr(std::istream& input, const CdrFormat& format = {});

void write_error_report(std::ostream& out, std::span<const LineError> errors);

/// Distinct-user counts in 144 ten-minute bins of one station-day.
struct LoadSeries {
  std::string site_id;
  Date date{};
  std::array<int, kBinsPerDay> bins{};

  friend bool operator==(const LoadSeries&, const LoadSeries&) = default;
};

using SeriesKey = std::pair<std::string, Date>;
using SeriesMap = std::map<SeriesKey, LoadSeries>;

/// Single-pass fold of records into (site, day) accumulators. Memory per
/// key is bounded by the distinct (user, bin) pairs seen for that key.
class LoadAccumulator {
 public:
  explicit LoadAccumulator(TimeZone tz = TimeZone::utc()) : tz_(tz) {}

  void add(const CdrRecord& record);
  SeriesMap finish() const;

 private:
  using BinSets = std::array<std::unordered_set<std::string>, kBinsPerDay>;
  TimeZone tz_;
  std::map<SeriesKey, BinSets> accumulators_;
};

SeriesMap build_load_series(std::span<const CdrRecord> records, TimeZone tz = TimeZone::utc());

std::vector<LoadSeries> series_values(const SeriesMap& map);

enum class Granularity { TenMin, Hourly };

constexpr std::size_t dimension_of(Granularity g) { return g == Granularity::TenMin ? kBinsPerDay : kHoursPerDay; }
std::string to_string(Granularity g);
Granularity parse_granularity(std::string_view text);

struct Profile {
  std::string site_id;
  Date date{};
  Vector values;
  Granularity granularity = Granularity::TenMin;
  /// Set when the underlying load was constant (max == min).
  bool degenerate = false;
};

/// Per-profile min-max scaling to [0, 1].
Profile normalize(const LoadSeries& series);
/// Sums bins 6h..6h+5 into 24 hours, then min-max scales.
Profile aggregate_hourly(const LoadSeries& series);
Profile to_profile(const LoadSeries& series, Granularity granularity);

/// Min-max scaling of an arbitrary vector; returns true when degenerate.
bool min_max_scale(std::span<const double> in, std::span<double> out);

// Delimited exports. LoadSeries: "site_id,date,b0,...,b143".
void write_load_series(std::ostream& out, std::span<const LoadSeries> series);
std::vector<LoadSeries> read_load_series(std::istream& in);

// Profiles: "site_id,date,granularity,degenerate,v0,...".
void write_profiles(std::ostream& out, std::span<const Profile> profiles);
std::vector<Profile> read_profiles(std::istream& in);

}  // namespace cellplan
