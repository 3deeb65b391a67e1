#pragma once

// Seeded synthetic stand-ins for real traces: labeled daily load series for
// the three load classes and CDR text that ingests back to them exactly.

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cellplan/calendar.hpp"
#include "cellplan/ingest.hpp"
#include "cellplan/svc.hpp"

namespace cellplan {

struct ClassTemplate {
  ClassLabel label = ClassLabel::AlwaysLoaded;
  std::array<double, kBinsPerDay> shape{};  // base intensities in [0, 1]
  double noise_sigma = 0.15;                // multiplicative Gaussian noise
  double volume = 100.0;                    // peak user count
};

/// Shape parameters for the three templates. Hours are local, fractional.
struct TemplateConfig {
  double noise_sigma = 0.15;
  // class 1: flat floor with a gentle daytime plateau
  double flat_floor = 0.85;
  double flat_volume = 80.0;
  // class 2: single late-morning peak
  double morning_peak_hour = 11.0;
  double morning_width_hours = 1.75;
  double morning_base = 0.08;
  double morning_volume = 150.0;
  // class 3: night peak wrapping past midnight
  double evening_peak_hour = 22.5;
  double evening_width_hours = 2.5;
  double evening_base = 0.1;
  double evening_volume = 100.0;

  /// "key = value" lines; unknown keys are rejected.
  static TemplateConfig parse(std::istream& in);
};

ClassTemplate make_template(ClassLabel label, const TemplateConfig& config = {});
std::array<ClassTemplate, 3> default_templates(const TemplateConfig& config = {});

/// Deterministic sub-seed derivation (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// round(volume * shape * (1 + noise)), noise ~ N(0, sigma) clamped at -1.
LoadSeries draw_series(const ClassTemplate& tmpl, std::string site_id, Date date, std::uint64_t seed);

struct LabeledSeries {
  LoadSeries series;
  ClassLabel label;
};

std::vector<LabeledSeries> gen_profiles(const ClassTemplate& tmpl, std::size_t count, std::uint64_t seed,
                                        const std::string& site_prefix = "site", Date date = make_date(2013, 1, 7));

/// `count` stations split into equal class thirds (remainder to the lowest
/// classes), in a seeded shuffled order, named S000, S001, ...
std::vector<LabeledSeries> gen_station_set(const std::array<ClassTemplate, 3>& templates, std::size_t count,
                                           std::uint64_t seed, Date date = make_date(2013, 1, 7));

struct SiteSpec {
  std::string site_id;
  ClassTemplate tmpl;
};

struct GeneratedCdr {
  std::string text;
  std::vector<LoadSeries> intended;  // sorted by (site, date)
};

/// Emits CDR lines whose distinct-user counts per bin equal `series`
/// exactly; bins above users_per_site are an error.
GeneratedCdr cdr_from_series(std::span<const LoadSeries> series, std::size_t users_per_site, std::uint64_t seed);

/// Draws one series per (site, day) and renders it as CDR text; counts are
/// capped at users_per_site.
GeneratedCdr gen_cdr(std::span<const SiteSpec> sites, std::size_t days, std::size_t users_per_site,
                     std::uint64_t seed, Date start = make_date(2013, 1, 7));

/// `weeks` consecutive weeks starting on the Monday `start`; day d uses the
/// template of weekday_class[iso_weekday - 1].
std::vector<LoadSeries> gen_weekly(const std::array<ClassLabel, 7>& weekday_class, std::size_t weeks,
                                   std::uint64_t seed, const std::array<ClassTemplate, 3>& templates,
                                   const std::string& site_id = "S000", Date start = make_date(2013, 1, 7));

}  // namespace cellplan
