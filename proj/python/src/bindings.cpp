#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "cellplan/ingest.hpp"
#include "cellplan/kmeans.hpp"
#include "cellplan/model_io.hpp"
#include "cellplan/model_select.hpp"
#include "cellplan/planner.hpp"
#include "cellplan/svc.hpp"
#include "cellplan/svr.hpp"
#include "cellplan/synthgen.hpp"

namespace py = pybind11;
using namespace cellplan;

namespace {

std::array<ClassLabel, 7> weekday_classes(const std::vector<int>& v) {
  if (v.size() != 7) throw InvalidArgument("weekday_classes needs 7 entries (Monday first)");
  std::array<ClassLabel, 7> out{};
  for (std::size_t i = 0; i < 7; ++i) out[i] = class_from_int(v[i]);
  return out;
}

std::vector<LoadSeries> ingest_text(const std::string& text, const std::string& tz) {
  std::istringstream in(text);
  return series_values(build_load_series(parse_cdr(in).records, TimeZone::parse(tz)));
}

std::vector<int> classify_all(const MulticlassModel& m, const std::vector<Vector>& X) {
  std::vector<int> out;
  for (const auto& x : X) {
    Profile p;
    p.values.resize(x.size());
    p.degenerate = min_max_scale(x, p.values);
    p.granularity = m.granularity;
    out.push_back(to_int(classify(m, p)));
  }
  return out;
}

std::vector<std::tuple<std::string, int, std::string, bool>> plan_py(const CellLoads& predicted,
                                                                     const FemtoDatabase& db, const QosConfig& qos,
                                                                     const std::map<std::string, int>& classes) {
  std::map<std::string, ClassLabel> cls;
  for (const auto& [k, v] : classes) cls[k] = class_from_int(v);
  std::vector<std::tuple<std::string, int, std::string, bool>> out;
  for (const auto& a : plan(predicted, cls, db, qos).actions)
    out.emplace_back(a.cell_id, a.interval, to_string(a.action), a.whitespace_flag);
  return out;
}

std::vector<PlanAction> actions_from(const std::vector<std::tuple<std::string, int, std::string, bool>>& rows) {
  std::vector<PlanAction> out;
  for (const auto& [id, t, act, ws] : rows) out.push_back({id, t, parse_action(act), ws});
  return out;
}

template <typename M>
void save(const M& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  save_model(out, m);
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  return in;
}

}  // namespace

PYBIND11_MODULE(_cellplan, m) {
  m.doc() = "Cell load profiling, classification, forecasting and on/off planning";

  // translators run newest first, so the base class is registered first
  const auto base = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<DimensionError>(m, "DimensionError", base);

  m.attr("BINS_PER_DAY") = kBinsPerDay;

  py::class_<LoadSeries>(m, "LoadSeries")
      .def(py::init([](std::string site, const std::string& date, const std::vector<int>& bins) {
             require_dimension("LoadSeries bins", kBinsPerDay, bins.size());
             LoadSeries s{std::move(site), parse_date(date), {}};
             std::copy(bins.begin(), bins.end(), s.bins.begin());
             return s;
           }),
           py::arg("site_id"), py::arg("date"), py::arg("bins"))
      .def_readonly("site_id", &LoadSeries::site_id)
      .def_property_readonly("date", [](const LoadSeries& s) { return format_date(s.date); })
      .def_property_readonly("bins", [](const LoadSeries& s) { return std::vector<int>(s.bins.begin(), s.bins.end()); })
      .def("profile", [](const LoadSeries& s, const std::string& g) { return to_profile(s, parse_granularity(g)).values; },
           py::arg("granularity") = "10min", "Min-max normalized profile (144 or 24 values).")
      .def("__repr__", [](const LoadSeries& s) { return "<LoadSeries " + s.site_id + " " + format_date(s.date) + ">"; });

  m.def("ingest", &ingest_text, py::arg("cdr_text"), py::arg("tz") = "UTC",
        "Parse CDR text (user_id,site_id,timestamp) into per-site daily load series.");

  m.def("generate_station_set", [](std::size_t count, std::uint64_t seed, double noise) {
        TemplateConfig cfg;
        cfg.noise_sigma = noise;
        std::vector<std::pair<LoadSeries, int>> out;
        for (auto& l : gen_station_set(default_templates(cfg), count, seed)) out.emplace_back(l.series, to_int(l.label));
        return out;
      }, py::arg("count"), py::arg("seed"), py::arg("noise") = 0.15, "Labeled synthetic station-days as (series, class).");

  m.def("generate_weekly", [](const std::vector<int>& classes, std::size_t weeks, std::uint64_t seed, double noise) {
        TemplateConfig cfg;
        cfg.noise_sigma = noise;
        return gen_weekly(weekday_classes(classes), weeks, seed, default_templates(cfg));
      }, py::arg("weekday_classes"), py::arg("weeks"), py::arg("seed"), py::arg("noise") = 0.1);

  // classification
  py::class_<MulticlassModel>(m, "SvmModel")
      .def_property_readonly("dimension", &MulticlassModel::dimension)
      .def("classify", &classify_all, py::arg("X"), "Class (1, 2 or 3) per raw or normalized profile row.")
      .def("save", &save<MulticlassModel>, py::arg("path"))
      .def_static("load", [](const std::string& p) {
        auto in = open_in(p);
        return load_multiclass_model(in);
      });

  m.def("train_svm", [](const std::vector<Vector>& X, const std::vector<int>& y, double C, double gamma) {
        TrainingSet d{X, y};
        d.validate();
        const auto dim = X.empty() ? 0 : X.front().size();
        const auto g = dim == static_cast<std::size_t>(kHoursPerDay) ? Granularity::Hourly : Granularity::TenMin;
        return train_multiclass(d, {C, KernelSpec::rbf(gamma > 0 ? gamma : default_gamma(dim)), {}}, g);
      }, py::arg("X"), py::arg("y"), py::arg("C") = 10.0, py::arg("gamma") = 0.0,
      "One-vs-one RBF SVM over 144- or 24-value profiles; gamma 0 means 1/dimension.");

  py::class_<KmeansRef>(m, "KmeansModel")
      .def_property_readonly("centroids", [](const KmeansRef& r) { return std::vector<Vector>(r.centroids.begin(), r.centroids.end()); })
      .def_property_readonly("classes", [](const KmeansRef& r) {
        std::vector<int> c;
        for (auto l : r.centroid_class) c.push_back(to_int(l));
        return c;
      })
      .def("assign", [](const KmeansRef& r, const std::vector<Vector>& X) {
        std::vector<int> out;
        for (const auto& x : X) out.push_back(to_int(kmeans_assign(r, x)));
        return out;
      }, py::arg("X"))
      .def("save", &save<KmeansRef>, py::arg("path"))
      .def_static("load", [](const std::string& p) {
        auto in = open_in(p);
        return load_kmeans_model(in);
      });

  m.def("kmeans_fit", [](const std::vector<Vector>& X, std::uint64_t seed) {
        const auto f = kmeans_fit(X, seed);
        py::dict d;
        d["centroids"] = std::vector<Vector>(f.centroids.begin(), f.centroids.end());
        d["assignment"] = f.assignment;
        d["inertia_trace"] = f.inertia_trace;
        d["iterations"] = f.iterations;
        d["converged"] = f.converged;
        return d;
      }, py::arg("X"), py::arg("seed"));

  m.def("train_kmeans", [](const std::vector<Vector>& X, const std::vector<int>& y, std::uint64_t seed) {
        std::vector<ClassLabel> labels;
        for (int v : y) labels.push_back(class_from_int(v));
        const auto dim = X.empty() ? 0 : X.front().size();
        const auto g = dim == static_cast<std::size_t>(kBinsPerDay) ? Granularity::TenMin : Granularity::Hourly;
        return kmeans_align(kmeans_fit(X, seed).centroids, X, labels, g);
      }, py::arg("X"), py::arg("y"), py::arg("seed") = 0, "Fit 3 centroids and label them from y.");

  // forecasting
  py::class_<SvrModel>(m, "SvrModel")
      .def_readonly("site_id", &SvrModel::site_id)
      .def_readonly("base_year", &SvrModel::base_year)
      .def_property_readonly("support_vectors", [](const SvrModel& s) { return s.support_vectors.size(); })
      .def("predict_day", [](const SvrModel& s, const std::string& date) {
        const auto f = calendar_features(parse_date(date), 1, s.base_year);
        const auto p = predict_day(s, f.weekday, f.week, f.year);
        return std::vector<double>(p.begin(), p.end());
      }, py::arg("date"), "144 predicted loads for a YYYY-MM-DD date, clamped at 0.")
      .def("save", &save<SvrModel>, py::arg("path"))
      .def_static("load", [](const std::string& p) {
        auto in = open_in(p);
        return load_svr_model(in);
      });

  m.def("train_svr", [](const std::vector<LoadSeries>& days, double C, double gamma, double epsilon) {
        if (days.empty()) throw InvalidArgument("train_svr: no series");
        const int base_year = calendar_year(days.front().date);
        auto model = train_svr(build_features(days, base_year), {C, gamma, epsilon, {}});
        model.site_id = days.front().site_id;
        model.base_year = base_year;
        return model;
      }, py::arg("days"), py::arg("C") = 10.0, py::arg("gamma") = 10.0, py::arg("epsilon") = 5.0,
      "Fit an RBF SVR to one site's daily series.");

  m.def("normalized_mse", [](const std::vector<double>& p, const std::vector<double>& a) { return normalized_mse(p, a); },
        py::arg("predicted"), py::arg("actual"));

  m.def("tune_svr", [](const std::vector<LoadSeries>& days, const std::vector<double>& Cs, const std::vector<double>& gammas,
                       const std::vector<double>& eps, std::size_t holdout) {
        GridSpec g;
        g.C = Cs;
        g.gamma = gammas;
        g.epsilon = eps;
        g.metric = Metric::Mse;
        g.folds = 3;
        g.holdout = holdout;
        const auto r = grid_search_svr(build_features(days), g);
        std::vector<std::tuple<double, double, double, double>> table;
        for (const auto& c : r.table) table.emplace_back(c.C, c.gamma, c.epsilon, c.score);
        return py::make_tuple(py::make_tuple(r.best.C, r.best.gamma, r.best.epsilon, r.best.score), table);
      }, py::arg("days"), py::arg("C"), py::arg("gamma"), py::arg("epsilon"), py::arg("holdout") = 0,
      "Grid search; returns ((C, gamma, epsilon, mse), table).");

  // planning
  py::class_<QosConfig>(m, "QosConfig")
      .def(py::init([](double off, double over, int min_off_run) {
             QosConfig q;
             q.off_threshold = off;
             q.overload_threshold = over;
             q.min_off_run = min_off_run;
             q.validate();
             return q;
           }),
           py::arg("off_threshold") = 0.2, py::arg("overload_threshold") = 0.9, py::arg("min_off_run") = 3)
      .def_readonly("off_threshold", &QosConfig::off_threshold)
      .def_readonly("overload_threshold", &QosConfig::overload_threshold)
      .def_readonly("min_off_run", &QosConfig::min_off_run);

  py::class_<FemtoDatabase>(m, "FemtoDatabase")
      .def(py::init([](const std::vector<std::tuple<std::string, int, std::vector<std::string>>>& cells) {
             std::vector<FemtoRecord> recs;
             for (const auto& [id, cap, nb] : cells) recs.push_back({id, 0.0, 0.0, cap, {nb.begin(), nb.end()}});
             return FemtoDatabase(std::move(recs));
           }),
           py::arg("cells"), "cells: [(cell_id, capacity, [neighbour ids])], neighbours must be symmetric.")
      .def_static("load", [](const std::string& p) {
        auto in = open_in(p);
        return read_femto_db(in);
      })
      .def("__len__", &FemtoDatabase::size);

  m.def("plan", &plan_py, py::arg("predicted"), py::arg("db"), py::arg("qos") = QosConfig{},
        py::arg("classes") = std::map<std::string, int>{},
        "Plan rows (cell_id, interval, 'On'|'Off', whitespace_flag) from predicted per-cell loads.");

  m.def("evaluate_plan", [](const std::vector<std::tuple<std::string, int, std::string, bool>>& rows,
                            const CellLoads& actual, const FemtoDatabase& db, const QosConfig& qos) {
        const auto e = evaluate_plan(actions_from(rows), actual, db, qos);
        py::dict d;
        d["energy_saved"] = e.energy_saved;
        d["qos_violations"] = e.qos_violations;
        d["cell_intervals"] = e.cell_intervals;
        return d;
      }, py::arg("plan"), py::arg("actual"), py::arg("db"), py::arg("qos") = QosConfig{});
}
