#include "cellplan/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>

namespace cellplan {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double circular_hours(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, 24.0 - d);
}

double bin_hour(int b) { return (b + 0.5) * kBinMinutes / 60.0; }

void check_positive(const char* key, double v) {
  if (!(v > 0.0)) throw InvalidArgument(std::string("template parameter ") + key + " must be > 0");
}

}  // namespace

TemplateConfig TemplateConfig::parse(std::istream& in) {
  TemplateConfig c;
  const std::map<std::string, double TemplateConfig::*> keys{
      {"noise_sigma", &TemplateConfig::noise_sigma},
      {"class1.floor", &TemplateConfig::flat_floor},
      {"class1.volume", &TemplateConfig::flat_volume},
      {"class2.peak_hour", &TemplateConfig::morning_peak_hour},
      {"class2.width_hours", &TemplateConfig::morning_width_hours},
      {"class2.base", &TemplateConfig::morning_base},
      {"class2.volume", &TemplateConfig::morning_volume},
      {"class3.peak_hour", &TemplateConfig::evening_peak_hour},
      {"class3.width_hours", &TemplateConfig::evening_width_hours},
      {"class3.base", &TemplateConfig::evening_base},
      {"class3.volume", &TemplateConfig::evening_volume},
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ParseError("template config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(trim(view.substr(0, eq)));
    const auto it = keys.find(key);
    if (it == keys.end()) throw ParseError("template config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    c.*(it->second) = parse_double(view.substr(eq + 1));
  }
  return c;
}

ClassTemplate make_template(ClassLabel label, const TemplateConfig& config) {
  if (!(config.noise_sigma >= 0.0)) throw InvalidArgument("noise_sigma must be >= 0");
  ClassTemplate t;
  t.label = label;
  t.noise_sigma = config.noise_sigma;
  switch (label) {
    case ClassLabel::AlwaysLoaded: {
      if (!(config.flat_floor > 0.0 && config.flat_floor <= 1.0)) throw InvalidArgument("class1.floor must lie in (0, 1]");
      check_positive("class1.volume", config.flat_volume);
      t.volume = config.flat_volume;
      for (int b = 0; b < kBinsPerDay; ++b) {
        const double h = bin_hour(b);
        const double plateau = logistic((h - 7.0) / 0.75) * logistic((23.0 - h) / 0.75);
        t.shape[static_cast<std::size_t>(b)] = config.flat_floor + (1.0 - config.flat_floor) * plateau;
      }
      break;
    }
    case ClassLabel::MorningPeak:
    case ClassLabel::EveningPeak: {
      const bool morning = label == ClassLabel::MorningPeak;
      const double peak = morning ? config.morning_peak_hour : config.evening_peak_hour;
      const double width = morning ? config.morning_width_hours : config.evening_width_hours;
      const double base = morning ? config.morning_base : config.evening_base;
      t.volume = morning ? config.morning_volume : config.evening_volume;
      check_positive("width_hours", width);
      check_positive("volume", t.volume);
      if (!(base >= 0.0 && base < 1.0)) throw InvalidArgument("template base must lie in [0, 1)");
      for (int b = 0; b < kBinsPerDay; ++b) {
        const double d = circular_hours(bin_hour(b), peak);
        t.shape[static_cast<std::size_t>(b)] = base + (1.0 - base) * std::exp(-0.5 * d * d / (width * width));
      }
      break;
    }
  }
  return t;
}

std::array<ClassTemplate, 3> default_templates(const TemplateConfig& config) {
  return {make_template(ClassLabel::AlwaysLoaded, config), make_template(ClassLabel::MorningPeak, config),
          make_template(ClassLabel::EveningPeak, config)};
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

LoadSeries draw_series(const ClassTemplate& tmpl, std::string site_id, Date date, std::uint64_t seed) {
  LoadSeries s;
  s.site_id = std::move(site_id);
  s.date = date;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t b = 0; b < s.bins.size(); ++b) {
    const double n = tmpl.noise_sigma > 0.0 ? std::max(-1.0, tmpl.noise_sigma * noise(rng)) : 0.0;
    s.bins[b] = static_cast<int>(std::max(0.0, std::round(tmpl.volume * tmpl.shape[b] * (1.0 + n))));
  }
  return s;
}

std::vector<LabeledSeries> gen_profiles(const ClassTemplate& tmpl, std::size_t count, std::uint64_t seed,
                                        const std::string& site_prefix, Date date) {
  if (count < 1) throw InvalidArgument("gen_profiles: count must be >= 1");
  std::vector<LabeledSeries> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::ostringstream id;
    id << site_prefix << i;
    out.push_back({draw_series(tmpl, id.str(), date, derive_seed(seed, i)), tmpl.label});
  }
  return out;
}

std::vector<LabeledSeries> gen_station_set(const std::array<ClassTemplate, 3>& templates, std::size_t count,
                                           std::uint64_t seed, Date date) {
  std::vector<ClassLabel> labels;
  for (std::size_t c = 0; c < 3; ++c) {
    const std::size_t share = count / 3 + (c < count % 3 ? 1 : 0);
    labels.insert(labels.end(), share, templates[c].label);
  }
  std::mt19937_64 rng(derive_seed(seed, 0xC1A55));
  std::shuffle(labels.begin(), labels.end(), rng);
  std::vector<LabeledSeries> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    char id[24];
    std::snprintf(id, sizeof(id), "S%03zu", i);
    const auto& tmpl = templates[static_cast<std::size_t>(to_int(labels[i]) - 1)];
    out.push_back({draw_series(tmpl, id, date, derive_seed(seed, i)), labels[i]});
  }
  return out;
}

GeneratedCdr cdr_from_series(std::span<const LoadSeries> series, std::size_t users_per_site, std::uint64_t seed) {
  struct Event {
    EpochSeconds t;
    const std::string* site;
    std::size_t user;
  };
  GeneratedCdr out;
  out.intended.assign(series.begin(), series.end());
  std::sort(out.intended.begin(), out.intended.end(),
            [](const LoadSeries& a, const LoadSeries& b) { return std::tie(a.site_id, a.date) < std::tie(b.site_id, b.date); });

  std::vector<Event> events;
  std::vector<std::size_t> pool(users_per_site);
  for (std::size_t k = 0; k < out.intended.size(); ++k) {
    const auto& s = out.intended[k];
    std::mt19937_64 rng(derive_seed(seed, k));
    const EpochSeconds midnight = TimeZone::utc().midnight(s.date);
    for (std::size_t b = 0; b < s.bins.size(); ++b) {
      const auto count = static_cast<std::size_t>(s.bins[b]);
      if (count > users_per_site)
        throw InvalidArgument("bin count " + std::to_string(count) + " exceeds users_per_site " +
                              std::to_string(users_per_site) + " at site '" + s.site_id + "'");
      std::iota(pool.begin(), pool.end(), std::size_t{0});
      for (std::size_t u = 0; u < count; ++u) {
        std::uniform_int_distribution<std::size_t> pick(u, users_per_site - 1);
        std::swap(pool[u], pool[pick(rng)]);
        std::uniform_int_distribution<int> repeats(1, 3);
        std::uniform_int_distribution<int> offset(0, kBinMinutes * 60 - 1);
        const int r = repeats(rng);
        for (int e = 0; e < r; ++e)
          events.push_back({midnight + static_cast<EpochSeconds>(b) * kBinMinutes * 60 + offset(rng), &s.site_id, pool[u]});
      }
    }
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return std::tie(a.t, *a.site, a.user) < std::tie(b.t, *b.site, b.user);
  });
  if (events.empty()) return out;

  std::string& text = out.text;
  text.reserve(events.size() * 40);
  text += "# format=iso8601 fields=user_id,site_id,timestamp\n";
  for (const auto& e : events) {
    text += *e.site;
    text += "-u";
    text += std::to_string(e.user);
    text += ',';
    text += *e.site;
    text += ',';
    text += format_iso8601(e.t);
    text += '\n';
  }
  return out;
}

GeneratedCdr gen_cdr(std::span<const SiteSpec> sites, std::size_t days, std::size_t users_per_site,
                     std::uint64_t seed, Date start) {
  std::vector<LoadSeries> series;
  for (std::size_t s = 0; s < sites.size(); ++s) {
    for (std::size_t d = 0; d < days; ++d) {
      LoadSeries ls = draw_series(sites[s].tmpl, sites[s].site_id, start + std::chrono::days(static_cast<int>(d)),
                                  derive_seed(seed, s * 100003 + d));
      for (auto& v : ls.bins) v = std::min(v, static_cast<int>(users_per_site));
      series.push_back(std::move(ls));
    }
  }
  return cdr_from_series(series, users_per_site, derive_seed(seed, 0xCD2));
}

std::vector<LoadSeries> gen_weekly(const std::array<ClassLabel, 7>& weekday_class, std::size_t weeks,
                                   std::uint64_t seed, const std::array<ClassTemplate, 3>& templates,
                                   const std::string& site_id, Date start) {
  if (iso_weekday(start) != 1) throw InvalidArgument("gen_weekly: start date must be a Monday");
  std::vector<LoadSeries> out;
  out.reserve(weeks * 7);
  for (std::size_t d = 0; d < weeks * 7; ++d) {
    const Date day = start + std::chrono::days(static_cast<int>(d));
    const ClassLabel label = weekday_class[static_cast<std::size_t>(iso_weekday(day) - 1)];
    out.push_back(draw_series(templates[static_cast<std::size_t>(to_int(label) - 1)], site_id, day, derive_seed(seed, d)));
  }
  return out;
}

}  // namespace cellplan
