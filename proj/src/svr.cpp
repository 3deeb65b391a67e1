#include "cellplan/svr.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cellplan {

namespace {

class SvrQ final : public QMatrix {
 public:
  SvrQ(KernelCache& cache, std::span<const signed char> y) : cache_(cache), y_(y), m_(cache.size()) {}

  std::size_t size() const override { return 2 * m_; }
  double diagonal(std::size_t i) const override { return cache_.diagonal(i % m_); }
  void row(std::size_t i, std::span<double> out) override {
    const auto k = cache_.row(i % m_);
    const signed char yi = y_[i];
    for (std::size_t s = 0; s < m_; ++s) {
      out[s] = yi * k[s];
      out[s + m_] = -yi * k[s];
    }
  }

 private:
  KernelCache& cache_;
  std::span<const signed char> y_;
  std::size_t m_;
};

}  // namespace

void FeatureVector4::validate() const {
  if (interval < 1 || interval > kBinsPerDay) throw InvalidArgument("interval must lie in 1..144");
  if (weekday < 1 || weekday > 7) throw InvalidArgument("weekday must lie in 1..7");
  if (week < 1 || week > 52) throw InvalidArgument("week must lie in 1..52");
  if (year < 1) throw InvalidArgument("year index must be >= 1");
}

std::array<double, kSvrFeatures> FeatureVector4::as_array() const {
  return {static_cast<double>(interval), static_cast<double>(weekday), static_cast<double>(week),
          static_cast<double>(year)};
}

FeatureVector4 calendar_features(Date day, int interval, int base_year) {
  FeatureVector4 f;
  f.interval = interval;
  f.weekday = iso_weekday(day);
  f.week = std::min(iso_week(day), 52);
  f.year = calendar_year(day) - base_year + 1;
  f.validate();
  return f;
}

FeatureScaling FeatureScaling::fit(std::span<const SvrSample> samples) {
  FeatureScaling s;
  if (samples.empty()) return s;
  s.min = samples.front().features.as_array();
  s.max = s.min;
  for (const auto& sample : samples) {
    const auto v = sample.features.as_array();
    for (std::size_t d = 0; d < kSvrFeatures; ++d) {
      s.min[d] = std::min(s.min[d], v[d]);
      s.max[d] = std::max(s.max[d], v[d]);
    }
  }
  return s;
}

Vector FeatureScaling::apply(const FeatureVector4& x) const {
  const auto v = x.as_array();
  Vector out(kSvrFeatures, 0.0);
  for (std::size_t d = 0; d < kSvrFeatures; ++d) {
    const double width = max[d] - min[d];
    out[d] = width > 0.0 ? (v[d] - min[d]) / width : 0.0;
  }
  return out;
}

std::vector<SvrSample> build_features(std::span<const LoadSeries> series) {
  if (series.empty()) return {};
  int base_year = calendar_year(series.front().date);
  for (const auto& s : series) base_year = std::min(base_year, calendar_year(s.date));
  return build_features(series, base_year);
}

std::vector<SvrSample> build_features(std::span<const LoadSeries> series, int base_year) {
  std::vector<const LoadSeries*> ordered;
  std::set<Date> seen;
  for (const auto& s : series) {
    if (s.site_id != series.front().site_id)
      throw InvalidArgument("build_features expects a single site, found '" + series.front().site_id + "' and '" +
                            s.site_id + "'");
    if (!seen.insert(s.date).second)
      throw InvalidArgument("duplicate series for site '" + s.site_id + "' on " + format_date(s.date));
    ordered.push_back(&s);
  }
  std::sort(ordered.begin(), ordered.end(), [](const LoadSeries* a, const LoadSeries* b) { return a->date < b->date; });

  std::vector<SvrSample> out;
  out.reserve(ordered.size() * kBinsPerDay);
  for (const auto* s : ordered) {
    for (int b = 0; b < kBinsPerDay; ++b)
      out.push_back({calendar_features(s->date, b + 1, base_year), static_cast<double>(s->bins[static_cast<std::size_t>(b)])});
  }
  return out;
}

SvrModel train_svr(std::span<const SvrSample> samples, const SvrParams& params) {
  return train_svr(samples, params, nullptr);
}

SvrModel train_svr(std::span<const SvrSample> samples, const SvrParams& params, SmoResult* details) {
  if (samples.size() < 2) throw InvalidArgument("SVR training needs at least 2 samples");
  if (!(params.C > 0.0) || !(params.gamma > 0.0) || !(params.epsilon > 0.0))
    throw InvalidArgument("SVR requires C, gamma and epsilon > 0");
  for (const auto& s : samples) {
    s.features.validate();
    if (!(s.label >= 0.0) || !std::isfinite(s.label)) throw InvalidArgument("SVR labels must be finite and >= 0");
  }

  SvrModel model;
  model.kernel = KernelSpec::rbf(params.gamma);
  model.C = params.C;
  model.epsilon = params.epsilon;
  model.scaling = FeatureScaling::fit(samples);

  const std::size_t m = samples.size();
  std::vector<Vector> X;
  X.reserve(m);
  for (const auto& s : samples) X.push_back(model.scaling.apply(s.features));

  std::vector<signed char> y(2 * m);
  std::vector<double> linear(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    y[i] = 1;
    y[i + m] = -1;
    linear[i] = params.epsilon - samples[i].label;
    linear[i + m] = params.epsilon + samples[i].label;
  }

  KernelCache cache(model.kernel, X);
  SvrQ q(cache, y);
  SmoResult r = solve_smo(q, linear, y, params.C, params.smo);

  model.bias = -r.rho;
  model.dual_objective = r.objective;
  model.iterations = r.iterations;
  for (std::size_t i = 0; i < m; ++i) {
    const double coef = r.alpha[i] - r.alpha[i + m];
    if (coef != 0.0) {
      model.support_vectors.push_back(X[i]);
      model.coefs.push_back(coef);
    }
  }
  if (details) *details = std::move(r);
  return model;
}

double predict(const SvrModel& model, const FeatureVector4& x) {
  const Vector z = model.scaling.apply(x);
  double f = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
    f += model.coefs[i] * eval_kernel(model.kernel, z, model.support_vectors[i]);
  return f;
}

std::array<double, kBinsPerDay> predict_day(const SvrModel& model, int weekday, int week, int year) {
  std::array<double, kBinsPerDay> out{};
  for (int k = 1; k <= kBinsPerDay; ++k) {
    const FeatureVector4 x{k, weekday, week, year};
    x.validate();
    out[static_cast<std::size_t>(k - 1)] = std::max(0.0, predict(model, x));
  }
  return out;
}

double mse(std::span<const double> predicted, std::span<const double> actual) {
  require_dimension("mse", predicted.size(), actual.size());
  if (predicted.empty()) throw InvalidArgument("mse of empty vectors");
  double s = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - actual[i];
    s += d * d;
  }
  return s / static_cast<double>(predicted.size());
}

double normalized_mse(std::span<const double> predicted, std::span<const double> actual) {
  const double raw = mse(predicted, actual);
  const auto [lo, hi] = std::minmax_element(actual.begin(), actual.end());
  const double range = *hi - *lo;
  if (range <= 0.0) throw InvalidArgument("normalized_mse: actual vector is constant");
  return raw / (range * range);
}

}  // namespace cellplan
