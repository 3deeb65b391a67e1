// cellplan: command-line pipeline over the cellplan library.
//
//   gen -> ingest -> train-svm / train-kmeans -> classify / assign-kmeans
//   -> evaluate; train-svr -> predict -> plan -> evaluate; tune -> export-curve
//
// Every run appends one JSON line to <out>/run_log.jsonl.

#include <openssl/evp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cellplan/kmeans.hpp"
#include "cellplan/model_io.hpp"
#include "cellplan/model_select.hpp"
#include "cellplan/planner.hpp"
#include "cellplan/svc.hpp"
#include "cellplan/svr.hpp"
#include "cellplan/synthgen.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace cellplan;

namespace {

constexpr int kConfigVersion = 1;

// Every recognised configuration key with its default.
const std::map<std::string, std::string>& config_defaults() {
  static const std::map<std::string, std::string> d{
      {"config_version", "1"},
      {"seed", "2013"},
      {"timezone", "UTC"},
      {"granularity", "10min"},
      {"gen.stations", "70"},
      {"gen.days", "1"},
      {"gen.weeks", "0"},
      {"gen.users_per_site", "400"},
      {"gen.start", "2013-01-07"},
      {"gen.templates", ""},
      {"gen.noise_sigma", "0.15"},
      {"gen.neighbors", "3"},
      {"gen.capacity", "160"},
      {"svm.C", "10"},
      {"svm.gamma", "0"},
      {"kmeans.granularity", "hourly"},
      {"svr.C", "10"},
      {"svr.gamma", "10"},
      {"svr.epsilon", "5"},
      {"svr.train_days", "0"},
      {"plan.off_threshold", "0.2"},
      {"plan.overload_threshold", "0.9"},
      {"plan.horizon", "144"},
      {"plan.min_off_run", "3"},
      {"tune.threads", "0"},
  };
  return d;
}

class Config {
 public:
  Config() : values_(config_defaults()) {}

  void load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config file " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto view = trim(line);
      if (view.empty() || view.front() == '#') continue;
      const auto eq = view.find('=');
      if (eq == std::string_view::npos)
        throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key = value");
      set(std::string(trim(view.substr(0, eq))), std::string(trim(view.substr(eq + 1))));
    }
    if (parse_int(get("config_version")) != kConfigVersion)
      throw InvalidArgument("unsupported config_version " + get("config_version"));
  }

  void set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) throw InvalidArgument("unknown config key '" + key + "'");
    values_[key] = value;
  }

  const std::string& get(const std::string& key) const { return values_.at(key); }
  double num(const std::string& key) const { return parse_double(get(key)); }
  long long integer(const std::string& key) const { return parse_int(get(key)); }
  const std::map<std::string, std::string>& all() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open input " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

// Shared state of one invocation.
struct Run {
  Config config;
  fs::path out_dir = ".";
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;

  std::ifstream open_input(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open input " + p.string());
    inputs.push_back(p);
    return in;
  }

  fs::path output(const std::string& name) {
    fs::create_directories(out_dir);
    outputs.push_back(out_dir / name);
    return out_dir / name;
  }

  std::ofstream open_output(const std::string& name) {
    const auto p = output(name);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InvalidArgument("cannot create output " + p.string());
    return out;
  }

  std::uint64_t seed() const { return static_cast<std::uint64_t>(config.integer("seed")); }
  Granularity granularity(const std::string& key = "granularity") const { return parse_granularity(config.get(key)); }
};

// ---------------------------------------------------------------- readers

// Per-(site, date) labels; site-level labels apply to every date.
struct Labels {
  std::map<std::string, ClassLabel> by_site;
  std::map<std::pair<std::string, std::string>, ClassLabel> by_day;

  std::optional<ClassLabel> find(const std::string& site, const std::string& date) const {
    if (auto it = by_day.find({site, date}); it != by_day.end()) return it->second;
    if (auto it = by_site.find(site); it != by_site.end()) return it->second;
    return std::nullopt;
  }
};

Labels read_labels(std::istream& in) {
  Labels l;
  std::string line;
  while (std::getline(in, line)) {
    const auto view = trim(line);
    if (view.empty() || view.front() == '#' || view.starts_with("site_id")) continue;
    const auto f = split(view, ',');
    if (f.size() == 2) l.by_site[std::string(trim(f[0]))] = class_from_int(parse_int(f[1]));
    else if (f.size() == 3) l.by_day[{std::string(trim(f[0])), std::string(trim(f[1]))}] = class_from_int(parse_int(f[2]));
    else throw ParseError("label lines are site_id,class or site_id,date,class");
  }
  return l;
}

// Profiles from either a profile export or a load-series export.
std::vector<Profile> read_any_profiles(Run& run, const fs::path& path, Granularity g) {
  auto in = run.open_input(path);
  std::string first;
  std::getline(in, first);
  in.seekg(0);
  if (first.starts_with("site_id,date,b0")) {
    std::vector<Profile> out;
    for (const auto& s : read_load_series(in)) out.push_back(to_profile(s, g));
    return out;
  }
  return read_profiles(in);
}

struct LabeledProfiles {
  std::vector<Profile> profiles;
  std::vector<ClassLabel> labels;
};

LabeledProfiles join_labels(const std::vector<Profile>& profiles, const Labels& labels) {
  LabeledProfiles out;
  for (const auto& p : profiles) {
    const auto l = labels.find(p.site_id, format_date(p.date));
    if (!l) throw InvalidArgument("no label for site '" + p.site_id + "' on " + format_date(p.date));
    out.profiles.push_back(p);
    out.labels.push_back(*l);
  }
  return out;
}

TrainingSet training_set(const LabeledProfiles& lp, Granularity g) {
  TrainingSet d;
  for (std::size_t i = 0; i < lp.profiles.size(); ++i) {
    require_dimension("training profile '" + lp.profiles[i].site_id + "'", dimension_of(g), lp.profiles[i].values.size());
    d.X.push_back(lp.profiles[i].values);
    d.y.push_back(to_int(lp.labels[i]));
  }
  return d;
}

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> v;
  for (auto t : split(text, ',')) v.push_back(parse_double(t));
  return v;
}

GridSpec read_grid(Run& run, const std::optional<fs::path>& path, GridSpec g) {
  if (!path) return g;
  auto in = run.open_input(*path);
  std::string line;
  while (std::getline(in, line)) {
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw InvalidArgument("grid file: expected key = value");
    const auto key = trim(view.substr(0, eq));
    const auto value = trim(view.substr(eq + 1));
    if (key == "C") g.C = parse_list(value);
    else if (key == "gamma") g.gamma = parse_list(value);
    else if (key == "epsilon") g.epsilon = parse_list(value);
    else if (key == "folds") g.folds = static_cast<int>(parse_int(value));
    else if (key == "holdout") g.holdout = static_cast<std::size_t>(parse_int(value));
    else if (key == "mode") {
      if (value == "cartesian") g.mode = SearchMode::Cartesian;
      else if (value == "sequential") g.mode = SearchMode::Sequential;
      else throw InvalidArgument("grid file: mode must be cartesian or sequential");
    } else throw InvalidArgument("grid file: unknown key '" + std::string(key) + "'");
  }
  return g;
}

std::vector<LoadSeries> series_for_site(const std::vector<LoadSeries>& all, const std::string& site) {
  std::vector<LoadSeries> out;
  for (const auto& s : all)
    if (s.site_id == site) out.push_back(s);
  if (out.empty()) throw InvalidArgument("no load series for site '" + site + "'");
  return out;
}

std::set<std::string> site_ids(const std::vector<LoadSeries>& all) {
  std::set<std::string> ids;
  for (const auto& s : all) ids.insert(s.site_id);
  return ids;
}

// predictions.csv: site_id,date,x1,predicted,actual
struct Prediction {
  std::string site, date;
  int interval;
  double predicted;
};

std::vector<Prediction> read_predictions(std::istream& in) {
  std::vector<Prediction> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto view = trim(line);
    if (view.empty() || view.starts_with("site_id")) continue;
    const auto f = split(view, ',');
    if (f.size() < 4) throw ParseError("prediction lines need site_id,date,x1,predicted");
    out.push_back({std::string(f[0]), std::string(f[1]), static_cast<int>(parse_int(f[2])), parse_double(f[3])});
  }
  return out;
}

CellLoads loads_on(const std::vector<Prediction>& preds, const std::string& date) {
  CellLoads loads;
  for (const auto& p : preds) {
    if (p.date != date) continue;
    auto& v = loads[p.site];
    v.resize(kBinsPerDay, 0.0);
    if (p.interval < 1 || p.interval > kBinsPerDay) throw ParseError("prediction interval out of range");
    v[static_cast<std::size_t>(p.interval - 1)] = p.predicted;
  }
  if (loads.empty()) throw InvalidArgument("no predictions for date " + date);
  return loads;
}

CellLoads loads_on(const std::vector<LoadSeries>& series, const std::string& date) {
  CellLoads loads;
  for (const auto& s : series)
    if (format_date(s.date) == date) loads[s.site_id] = std::vector<double>(s.bins.begin(), s.bins.end());
  if (loads.empty()) throw InvalidArgument("no load series for date " + date);
  return loads;
}

QosConfig qos_of(const Config& c) {
  QosConfig q;
  q.off_threshold = c.num("plan.off_threshold");
  q.overload_threshold = c.num("plan.overload_threshold");
  q.horizon = static_cast<int>(c.integer("plan.horizon"));
  q.min_off_run = static_cast<int>(c.integer("plan.min_off_run"));
  q.validate();
  return q;
}

void write_json(std::ostream& out, const ordered_json& j) { out << j.dump(2) << '\n'; }

ordered_json evaluation_json(const Evaluation& e) {
  ordered_json per = ordered_json::object();
  for (std::size_t k = 0; k < 3; ++k) {
    const auto name = std::to_string(k + 1);
    per[name] = {{"size", e.class_size[k]}, {"accuracy", e.class_size[k] ? ordered_json(e.per_class_accuracy[k]) : ordered_json()}};
  }
  ordered_json confusion = ordered_json::array();
  for (const auto& row : e.confusion) confusion.push_back(row);
  return {{"total_accuracy", e.total_accuracy}, {"correct", e.correct}, {"total", e.total}, {"per_class", per},
          {"confusion", confusion}};
}

// ---------------------------------------------------------------- subcommands

struct Options {
  std::optional<fs::path> input, labels, model, profiles, loads, femto, predicted, actual, plan_file, table, grid,
      classes, templates;
  std::vector<fs::path> models;
  std::string site, date, kind = "svm";
  std::optional<double> c, gamma, epsilon;
  std::optional<std::string> granularity;
  std::optional<long long> weeks, stations;
  int days = 1;
};

fs::path need(const std::optional<fs::path>& p, const char* flag) {
  if (!p) throw InvalidArgument(std::string("missing required option ") + flag);
  return *p;
}

void cmd_gen(Run& run, const Options& o) {
  TemplateConfig tc;
  const std::string tpath = o.templates ? o.templates->string() : run.config.get("gen.templates");
  if (!tpath.empty()) {
    auto in = run.open_input(tpath);
    tc = TemplateConfig::parse(in);
  } else {
    tc.noise_sigma = run.config.num("gen.noise_sigma");
  }
  const auto templates = default_templates(tc);
  const auto users = static_cast<std::size_t>(run.config.integer("gen.users_per_site"));
  const Date start = parse_date(run.config.get("gen.start"));
  const auto weeks = static_cast<std::size_t>(run.config.integer("gen.weeks"));
  const auto stations = static_cast<std::size_t>(run.config.integer("gen.stations"));

  std::vector<LoadSeries> series;
  std::string text;
  auto labels = run.open_output("labels.csv");
  if (weeks > 0) {
    // weekday class 2, Sunday class 1, one independent draw per station
    std::array<ClassLabel, 7> wc;
    wc.fill(ClassLabel::MorningPeak);
    wc[6] = ClassLabel::AlwaysLoaded;
    labels << "site_id,date,class\n";
    for (std::size_t s = 0; s < stations; ++s) {
      char id[24];
      std::snprintf(id, sizeof id, "S%03zu", s);
      for (auto& d : gen_weekly(wc, weeks, derive_seed(run.seed(), s), templates, id, start)) {
        for (auto& b : d.bins) b = std::min<int>(b, static_cast<int>(users));
        labels << d.site_id << ',' << format_date(d.date) << ',' << to_int(wc[static_cast<std::size_t>(iso_weekday(d.date) - 1)]) << '\n';
        series.push_back(std::move(d));
      }
    }
    text = cdr_from_series(series, users, derive_seed(run.seed(), 2)).text;
  } else {
    const auto days = static_cast<std::size_t>(run.config.integer("gen.days"));
    const auto set = gen_station_set(templates, stations, run.seed(), start);
    labels << "site_id,class\n";
    std::vector<SiteSpec> sites;
    for (const auto& s : set) {
      labels << s.series.site_id << ',' << to_int(s.label) << '\n';
      sites.push_back({s.series.site_id, templates[static_cast<std::size_t>(to_int(s.label) - 1)]});
    }
    auto cdr = gen_cdr(sites, days, users, derive_seed(run.seed(), 1), start);
    series = std::move(cdr.intended);
    text = std::move(cdr.text);
  }
  run.open_output("cdr.csv") << text;

  // femto database: a ring plus seeded chords, symmetric by construction
  std::vector<FemtoRecord> recs;
  std::set<std::string> ids;
  for (const auto& s : series) ids.insert(s.site_id);
  std::vector<std::string> idv(ids.begin(), ids.end());
  std::mt19937_64 rng(derive_seed(run.seed(), 3));
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  for (std::size_t i = 0; i < idv.size(); ++i)
    recs.push_back({idv[i], 5.35 + jitter(rng), -4.0 + jitter(rng), static_cast<int>(run.config.integer("gen.capacity")), {}});
  const auto extra = static_cast<std::size_t>(std::max<long long>(0, run.config.integer("gen.neighbors") - 2));
  auto link = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    recs[a].neighbors.insert(idv[b]);
    recs[b].neighbors.insert(idv[a]);
  };
  if (idv.size() > 1)
    for (std::size_t i = 0; i < idv.size(); ++i) {
      link(i, (i + 1) % idv.size());
      for (std::size_t k = 0; k < extra; ++k) link(i, static_cast<std::size_t>(rng() % idv.size()));
    }
  auto femto = run.open_output("femto.csv");
  write_femto_db(femto, FemtoDatabase(recs));
}

void cmd_ingest(Run& run, const Options& o) {
  auto in = run.open_input(need(o.input, "--input"));
  CdrFormat fmt;
  ParseResult parsed;
  try {
    parsed = parse_cdr(in, fmt);
  } catch (const CdrParseFailure& e) {
    auto report = run.open_output("ingest_errors.txt");
    write_error_report(report, e.errors());
    throw;
  }
  if (!parsed.errors.empty()) {
    auto report = run.open_output("ingest_errors.txt");
    write_error_report(report, parsed.errors);
  }
  const auto series = series_values(build_load_series(parsed.records, TimeZone::parse(run.config.get("timezone"))));
  auto loads = run.open_output("loads.csv");
  write_load_series(loads, series);
  const auto g = run.granularity();
  std::vector<Profile> profiles;
  for (const auto& s : series) profiles.push_back(to_profile(s, g));
  auto pout = run.open_output("profiles.csv");
  write_profiles(pout, profiles);
}

SvcParams svm_params(const Run& run, const Options& o, Granularity g) {
  const double C = o.c.value_or(run.config.num("svm.C"));
  double gamma = o.gamma.value_or(run.config.num("svm.gamma"));
  if (gamma == 0.0) gamma = default_gamma(dimension_of(g));
  return {C, KernelSpec::rbf(gamma), {}};
}

void cmd_train_svm(Run& run, const Options& o) {
  const auto g = run.granularity();
  auto lin = run.open_input(need(o.labels, "--labels"));
  const auto lp = join_labels(read_any_profiles(run, need(o.profiles, "--profiles"), g), read_labels(lin));
  const auto model = train_multiclass(training_set(lp, g), svm_params(run, o, g), g);
  auto out = run.open_output("svm_model.json");
  save_model(out, model);
}

void write_classes(std::ostream& out, const std::vector<Profile>& ps, const std::vector<ClassLabel>& cls) {
  out << "site_id,date,class\n";
  for (std::size_t i = 0; i < ps.size(); ++i) out << ps[i].site_id << ',' << format_date(ps[i].date) << ',' << to_int(cls[i]) << '\n';
}

void cmd_classify(Run& run, const Options& o) {
  auto min = run.open_input(need(o.model, "--model"));
  const auto model = load_multiclass_model(min);
  const auto ps = read_any_profiles(run, need(o.profiles, "--profiles"), model.granularity);
  std::vector<ClassLabel> cls;
  for (const auto& p : ps) cls.push_back(classify(model, p));
  auto out = run.open_output("classes.csv");
  write_classes(out, ps, cls);
}

void cmd_train_kmeans(Run& run, const Options& o) {
  const auto g = o.granularity ? parse_granularity(*o.granularity) : run.granularity("kmeans.granularity");
  auto lin = run.open_input(need(o.labels, "--labels"));
  const auto lp = join_labels(read_any_profiles(run, need(o.profiles, "--profiles"), g), read_labels(lin));
  const auto d = training_set(lp, g);
  const auto fit = kmeans_fit(d.X, run.seed());
  auto out = run.open_output("kmeans_model.json");
  save_model(out, kmeans_align(fit.centroids, d.X, lp.labels, g));
}

void cmd_assign_kmeans(Run& run, const Options& o) {
  auto min = run.open_input(need(o.model, "--model"));
  const auto ref = load_kmeans_model(min);
  const auto ps = read_any_profiles(run, need(o.profiles, "--profiles"), ref.granularity);
  std::vector<ClassLabel> cls;
  for (const auto& p : ps) cls.push_back(kmeans_assign(ref, p));
  auto out = run.open_output("kmeans_classes.csv");
  write_classes(out, ps, cls);
}

void cmd_evaluate(Run& run, const Options& o) {
  if (o.plan_file) {
    auto pin = run.open_input(*o.plan_file);
    const auto p = read_plan(pin);
    auto fin = run.open_input(need(o.femto, "--femto"));
    const auto db = read_femto_db(fin);
    auto ain = run.open_input(need(o.actual, "--actual"));
    const auto series = read_load_series(ain);
    std::string date = o.date;
    if (date.empty()) {
      std::set<std::string> dates;
      for (const auto& s : series) dates.insert(format_date(s.date));
      if (dates.size() != 1) throw InvalidArgument("--date is required when the actual loads span several days");
      date = *dates.begin();
    }
    CellLoads actual = loads_on(series, date);
    std::set<std::string> planned;
    for (const auto& a : p.actions) planned.insert(a.cell_id);
    for (auto it = actual.begin(); it != actual.end();) it = planned.count(it->first) ? std::next(it) : actual.erase(it);
    const auto ev = evaluate_plan(p.actions, actual, db, qos_of(run.config));
    auto out = run.open_output("plan_evaluation.json");
    write_json(out, {{"date", date}, {"energy_saved", ev.energy_saved}, {"qos_violations", ev.qos_violations},
                     {"cell_intervals", ev.cell_intervals}});
    return;
  }
  auto pin = run.open_input(need(o.predicted, "--predicted"));
  auto lin = run.open_input(need(o.labels, "--labels"));
  const auto truth = read_labels(lin);
  std::vector<ClassLabel> t, p;
  std::string line;
  while (std::getline(pin, line)) {
    const auto view = trim(line);
    if (view.empty() || view.starts_with("site_id")) continue;
    const auto f = split(view, ',');
    if (f.size() != 3) throw ParseError("class lines are site_id,date,class");
    const auto l = truth.find(std::string(f[0]), std::string(f[1]));
    if (!l) throw InvalidArgument("no ground-truth label for site '" + std::string(f[0]) + "'");
    t.push_back(*l);
    p.push_back(class_from_int(parse_int(f[2])));
  }
  auto out = run.open_output("accuracy_report.json");
  write_json(out, evaluation_json(evaluate_labels(t, p)));
}

void cmd_tune(Run& run, const Options& o) {
  const auto threads = static_cast<unsigned>(run.config.integer("tune.threads"));
  if (o.kind == "svm") {
    const auto g = run.granularity();
    auto lin = run.open_input(need(o.labels, "--labels"));
    const auto lp = join_labels(read_any_profiles(run, need(o.profiles, "--profiles"), g), read_labels(lin));
    const auto grid = read_grid(run, o.grid, GridSpec::default_svm());
    const auto r = grid_search_svm(training_set(lp, g), grid, run.seed(), g, threads);
    auto out = run.open_output("svm_grid.csv");
    write_score_table(out, r.table);
    auto best = run.open_output("svm_best.conf");
    best << "svm.C = " << format_double(r.best.C) << "\nsvm.gamma = " << format_double(r.best.gamma) << '\n';
    return;
  }
  if (o.kind != "svr") throw InvalidArgument("--kind must be svm or svr");
  auto lin = run.open_input(need(o.loads, "--loads"));
  const auto all = read_load_series(lin);
  const auto ids = site_ids(all);
  const std::string site = o.site.empty() ? *ids.begin() : o.site;
  auto series = series_for_site(all, site);
  const auto samples = build_features(series);
  double lo = samples.front().label, hi = lo;
  for (const auto& s : samples) {
    lo = std::min(lo, s.label);
    hi = std::max(hi, s.label);
  }
  const auto grid = read_grid(run, o.grid, GridSpec::default_svr(hi - lo));
  const auto r = grid_search_svr(samples, grid, threads);
  auto out = run.open_output("svr_grid.csv");
  write_score_table(out, r.table);
  auto best = run.open_output("svr_best.conf");
  best << "svr.C = " << format_double(r.best.C) << "\nsvr.gamma = " << format_double(r.best.gamma)
       << "\nsvr.epsilon = " << format_double(r.best.epsilon) << '\n';
}

void cmd_train_svr(Run& run, const Options& o) {
  auto lin = run.open_input(need(o.loads, "--loads"));
  const auto all = read_load_series(lin);
  std::vector<std::string> sites;
  if (o.site.empty() || o.site == "all") {
    const auto ids = site_ids(all);
    sites.assign(ids.begin(), ids.end());
  } else {
    sites.push_back(o.site);
  }
  const SvrParams params{o.c.value_or(run.config.num("svr.C")), o.gamma.value_or(run.config.num("svr.gamma")),
                         o.epsilon.value_or(run.config.num("svr.epsilon")), {}};
  const auto train_days = static_cast<std::size_t>(run.config.integer("svr.train_days"));
  for (const auto& site : sites) {
    auto series = series_for_site(all, site);
    if (train_days > 0 && series.size() > train_days) series.resize(train_days);
    const int base_year = calendar_year(series.front().date);
    auto model = train_svr(build_features(series, base_year), params);
    model.site_id = site;
    model.base_year = base_year;
    auto out = run.open_output("svr_" + site + ".json");
    save_model(out, model);
  }
}

void cmd_predict(Run& run, const Options& o) {
  if (o.models.empty()) throw InvalidArgument("missing required option --model");
  if (o.date.empty()) throw InvalidArgument("missing required option --date");
  std::map<std::pair<std::string, std::string>, LoadSeries> actual;
  if (o.actual) {
    auto ain = run.open_input(*o.actual);
    for (auto& s : read_load_series(ain)) actual[{s.site_id, format_date(s.date)}] = s;
  }
  auto out = run.open_output("predictions.csv");
  out << (o.actual ? "site_id,date,x1,predicted,actual\n" : "site_id,date,x1,predicted\n");
  const Date start = parse_date(o.date);
  for (const auto& path : o.models) {
    std::string text;
    {
      auto in = run.open_input(path);
      std::stringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    std::istringstream peek(text);
    const auto header = peek_model(peek);
    require_dimension("SVR model feature vector (model " + path.filename().string() + ")", kSvrFeatures,
                      header.feature_dim);
    std::istringstream in(text);
    const auto model = load_svr_model(in);
    for (int d = 0; d < o.days; ++d) {
      const Date day = start + std::chrono::days{d};
      const auto f = calendar_features(day, 1, model.base_year);
      const auto values = predict_day(model, f.weekday, f.week, f.year);
      const auto it = actual.find({model.site_id, format_date(day)});
      for (int k = 0; k < kBinsPerDay; ++k) {
        out << model.site_id << ',' << format_date(day) << ',' << k + 1 << ','
            << format_double(values[static_cast<std::size_t>(k)]);
        if (o.actual) out << ',' << (it == actual.end() ? std::string() : std::to_string(it->second.bins[static_cast<std::size_t>(k)]));
        out << '\n';
      }
    }
  }
}

void cmd_plan(Run& run, const Options& o) {
  auto fin = run.open_input(need(o.femto, "--femto"));
  const auto db = read_femto_db(fin);
  auto pin = run.open_input(need(o.predicted, "--predicted"));
  const auto preds = read_predictions(pin);
  const std::string date = o.date.empty() ? preds.at(0).date : o.date;
  CellLoads loads = loads_on(preds, date);
  std::map<std::string, ClassLabel> classes;
  if (o.classes) {
    auto cin = run.open_input(*o.classes);
    std::string line;
    while (std::getline(cin, line)) {
      const auto view = trim(line);
      if (view.empty() || view.starts_with("site_id")) continue;
      const auto f = split(view, ',');
      if (f.size() == 3 && f[1] == date) classes[std::string(f[0])] = class_from_int(parse_int(f[2]));
    }
  }
  auto out = run.open_output("plan.csv");
  write_plan(out, plan(loads, classes, db, qos_of(run.config)));
}

void cmd_export_curve(Run& run, const Options& o) {
  auto in = run.open_input(need(o.table, "--table"));
  auto table = read_score_table(in);
  std::stable_sort(table.begin(), table.end(), [](const GridCell& a, const GridCell& b) {
    return std::tie(a.gamma, a.C, a.epsilon) < std::tie(b.gamma, b.C, b.epsilon);
  });
  auto out = run.open_output("gamma_curve.csv");
  out << "gamma,C,epsilon,metric\n";
  for (const auto& c : table)
    out << format_double(c.gamma) << ',' << format_double(c.C) << ',' << format_double(c.epsilon) << ','
        << format_double(c.score) << '\n';
}

std::string utc_now() {
  const auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
  return format_iso8601(now.time_since_epoch().count());
}

void append_run_log(const Run& run, const std::string& command, const std::vector<std::string>& argv, bool ok,
                    const std::string& error) {
  ordered_json rec;
  rec["timestamp"] = utc_now();
  rec["command"] = command;
  rec["argv"] = argv;
  rec["status"] = ok ? "ok" : "error";
  if (!ok) rec["error"] = error;
  rec["seed"] = run.config.get("seed");
  rec["config"] = run.config.all();
  ordered_json inputs = ordered_json::object();
  for (const auto& p : run.inputs) {
    try {
      inputs[p.string()] = sha256_file(p);
    } catch (const std::exception&) {
      inputs[p.string()] = nullptr;
    }
  }
  rec["inputs"] = inputs;
  std::vector<std::string> outs;
  for (const auto& p : run.outputs) outs.push_back(p.string());
  rec["outputs"] = outs;
  fs::create_directories(run.out_dir);
  std::ofstream log(run.out_dir / "run_log.jsonl", std::ios::app);
  log << rec.dump() << '\n';
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
  if (dynamic_cast<const ParseError*>(&e)) return "parse";
  if (dynamic_cast<const InvalidArgument*>(&e)) return "invalid_argument";
  if (dynamic_cast<const ConvergenceError*>(&e)) return "convergence";
  return "error";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell load profiling, prediction and on/off planning"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<fs::path> config_path;
  std::optional<long long> seed;
  std::string out_dir = ".";
  Options o;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--seed", seed, "random seed (overrides the config)");
  app.add_option("--out", out_dir, "output directory");
  std::vector<std::string> overrides;
  app.add_option("--set", overrides, "config override key=value (repeatable)");

  auto add_gamma_c = [&](CLI::App* s) {
    s->add_option("--c", o.c, "penalty C");
    s->add_option("--gamma", o.gamma, "RBF gamma");
  };
  auto add_granularity = [&](CLI::App* s) {
    s->add_option("--granularity", o.granularity, "10min or hourly")->check(CLI::IsMember({"10min", "hourly"}));
  };

  auto* gen = app.add_subcommand("gen", "synthetic CDR, labels and femtocell database");
  gen->add_option("--templates", o.templates, "template configuration file");
  gen->add_option("--weeks", o.weeks, "weekly mode: number of weeks (weekdays class 2, Sunday class 1)");
  gen->add_option("--stations", o.stations, "number of stations");

  auto* ingest = app.add_subcommand("ingest", "CDR file to load series and profiles");
  ingest->add_option("--input", o.input, "CDR file")->required();
  add_granularity(ingest);

  auto* train_svm = app.add_subcommand("train-svm", "train the one-vs-one SVM classifier");
  train_svm->add_option("--profiles", o.profiles)->required();
  train_svm->add_option("--labels", o.labels)->required();
  add_gamma_c(train_svm);
  add_granularity(train_svm);

  auto* classify_cmd = app.add_subcommand("classify", "classify profiles with an SVM model");
  classify_cmd->add_option("--model", o.model)->required();
  classify_cmd->add_option("--profiles", o.profiles)->required();

  auto* train_km = app.add_subcommand("train-kmeans", "fit and label three K-means reference clusters");
  train_km->add_option("--profiles", o.profiles)->required();
  train_km->add_option("--labels", o.labels)->required();
  add_granularity(train_km);

  auto* assign_km = app.add_subcommand("assign-kmeans", "nearest-centroid classification");
  assign_km->add_option("--model", o.model)->required();
  assign_km->add_option("--profiles", o.profiles)->required();

  auto* tune = app.add_subcommand("tune", "grid search (SVM accuracy or SVR MSE)");
  tune->add_option("--kind", o.kind)->check(CLI::IsMember({"svm", "svr"}));
  tune->add_option("--profiles", o.profiles);
  tune->add_option("--labels", o.labels);
  tune->add_option("--loads", o.loads);
  tune->add_option("--site", o.site);
  tune->add_option("--grid", o.grid, "grid file");
  add_granularity(tune);

  auto* train_svr_cmd = app.add_subcommand("train-svr", "train per-site SVR load models");
  train_svr_cmd->add_option("--loads", o.loads)->required();
  train_svr_cmd->add_option("--site", o.site, "site id or 'all'");
  train_svr_cmd->add_option("--epsilon", o.epsilon);
  add_gamma_c(train_svr_cmd);

  auto* predict_cmd = app.add_subcommand("predict", "predict daily load curves");
  predict_cmd->add_option("--model", o.models)->required();
  predict_cmd->add_option("--date", o.date)->required();
  predict_cmd->add_option("--days", o.days);
  predict_cmd->add_option("--actual", o.actual, "load series to attach as the actual column");

  auto* plan_cmd = app.add_subcommand("plan", "femtocell on/off plan from predicted loads");
  plan_cmd->add_option("--femto", o.femto)->required();
  plan_cmd->add_option("--predicted", o.predicted)->required();
  plan_cmd->add_option("--classes", o.classes);
  plan_cmd->add_option("--date", o.date);

  auto* eval_cmd = app.add_subcommand("evaluate", "classification accuracy or plan QoS evaluation");
  eval_cmd->add_option("--predicted", o.predicted, "classes file");
  eval_cmd->add_option("--labels", o.labels);
  eval_cmd->add_option("--plan", o.plan_file);
  eval_cmd->add_option("--femto", o.femto);
  eval_cmd->add_option("--actual", o.actual);
  eval_cmd->add_option("--date", o.date);

  auto* curve = app.add_subcommand("export-curve", "gamma-vs-metric table from a tune score table");
  curve->add_option("--table", o.table)->required();

  CLI11_PARSE(app, argc, argv);

  const std::vector<std::string> args(argv + 1, argv + argc);
  const auto* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  Run run;
  run.out_dir = out_dir;
  try {
    if (config_path) {
      run.inputs.push_back(*config_path);
      run.config.load(*config_path);
    }
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got '" + kv + "'");
      run.config.set(std::string(trim(std::string_view(kv).substr(0, eq))), std::string(trim(std::string_view(kv).substr(eq + 1))));
    }
    if (seed) run.config.set("seed", std::to_string(*seed));
    if (o.granularity) run.config.set("granularity", *o.granularity);
    if (o.weeks) run.config.set("gen.weeks", std::to_string(*o.weeks));
    if (o.stations) run.config.set("gen.stations", std::to_string(*o.stations));
    if (command == "gen") cmd_gen(run, o);
    else if (command == "ingest") cmd_ingest(run, o);
    else if (command == "train-svm") cmd_train_svm(run, o);
    else if (command == "classify") cmd_classify(run, o);
    else if (command == "train-kmeans") cmd_train_kmeans(run, o);
    else if (command == "assign-kmeans") cmd_assign_kmeans(run, o);
    else if (command == "tune") cmd_tune(run, o);
    else if (command == "train-svr") cmd_train_svr(run, o);
    else if (command == "predict") cmd_predict(run, o);
    else if (command == "plan") cmd_plan(run, o);
    else if (command == "evaluate") cmd_evaluate(run, o);
    else if (command == "export-curve") cmd_export_curve(run, o);
    append_run_log(run, command, args, true, {});
    return 0;
  } catch (const std::exception& e) {
    const ordered_json err{{"error", error_kind(e)}, {"command", command}, {"message", e.what()}};
    std::cerr << err.dump() << '\n';
    try {
      append_run_log(run, command, args, false, e.what());
    } catch (...) {
    }
    return 1;
  }
}
