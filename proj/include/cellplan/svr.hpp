#pragma once

// Epsilon-insensitive support vector regression over calendar features:
// (interval 1..144, ISO weekday 1..7, ISO week 1..52, year index 1..N).

#include <array>
#include <span>
#include <vector>

#include "cellplan/calendar.hpp"
#include "cellplan/common.hpp"
#include "cellplan/ingest.hpp"
#include "cellplan/kernels.hpp"
#include "cellplan/smo.hpp"

namespace cellplan {

inline constexpr std::size_t kSvrFeatures = 4;

struct FeatureVector4 {
  int interval = 1;  // bin k covers [10(k-1), 10k) minutes after midnight
  int weekday = 1;   // 1 = Monday
  int week = 1;      // ISO week, 53 folded into 52
  int year = 1;      // 1-based index into the available years

  void validate() const;
  std::array<double, kSvrFeatures> as_array() const;

  friend bool operator==(const FeatureVector4&, const FeatureVector4&) = default;
};

FeatureVector4 calendar_features(Date day, int interval, int base_year);

struct SvrSample {
  FeatureVector4 features;
  double label = 0.0;
};

/// Per-component affine map onto [0, 1]; constant components map to 0.
struct FeatureScaling {
  std::array<double, kSvrFeatures> min{};
  std::array<double, kSvrFeatures> max{};

  static FeatureScaling fit(std::span<const SvrSample> samples);
  Vector apply(const FeatureVector4& x) const;
};

struct SvrParams {
  double C = 10.0;
  double gamma = 1.0;
  double epsilon = 0.1;
  SmoOptions smo{};
};

struct SvrModel {
  std::vector<Vector> support_vectors;  // scaled features
  std::vector<double> coefs;            // alpha_i - alpha*_i
  double bias = 0.0;
  KernelSpec kernel;
  double C = 0.0;
  double epsilon = 0.0;
  FeatureScaling scaling;
  // set by callers that know the training series; used to rebuild features
  std::string site_id;
  int base_year = 0;

  double dual_objective = 0.0;
  std::uint64_t iterations = 0;
};

/// One sample per (day, bin); series must be one site with distinct dates.
/// base_year is the calendar year mapped to year index 1.
std::vector<SvrSample> build_features(std::span<const LoadSeries> series, int base_year);
std::vector<SvrSample> build_features(std::span<const LoadSeries> series);

SvrModel train_svr(std::span<const SvrSample> samples, const SvrParams& params);
SvrModel train_svr(std::span<const SvrSample> samples, const SvrParams& params, SmoResult* details);

double predict(const SvrModel& model, const FeatureVector4& x);

/// Predictions for intervals 1..144, clamped below at 0.
std::array<double, kBinsPerDay> predict_day(const SvrModel& model, int weekday, int week, int year);

double mse(std::span<const double> predicted, std::span<const double> actual);

/// MSE after dividing both vectors by the range (max - min) of `actual`.
double normalized_mse(std::span<const double> predicted, std::span<const double> actual);

}  // namespace cellplan
