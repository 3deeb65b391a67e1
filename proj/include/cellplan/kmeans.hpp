#pragma once

// Two-step K-means baseline: Lloyd clustering of labeled training profiles
// into three reference clusters, then nearest-centroid assignment.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cellplan/common.hpp"
#include "cellplan/ingest.hpp"
#include "cellplan/svc.hpp"

namespace cellplan {

inline constexpr std::size_t kClusters = 3;

struct KmeansFit {
  std::array<Vector, kClusters> centroids;
  std::vector<int> assignment;  // cluster index per input point
  /// Inertia after each assignment step.
  std::vector<double> inertia_trace;
  int iterations = 0;
  bool converged = false;
};

struct KmeansOptions {
  int max_iterations = 300;
};

/// Farthest-point seeding (first centre drawn from `seed`), then Lloyd
/// iterations until assignments stop changing. Needs >= 3 distinct points.
KmeansFit kmeans_fit(std::span<const Vector> points, std::uint64_t seed, const KmeansOptions& options = {});

struct KmeansRef {
  std::array<Vector, kClusters> centroids;
  std::array<ClassLabel, kClusters> centroid_class{};
  Granularity granularity = Granularity::Hourly;

  std::size_t dimension() const { return centroids[0].size(); }
};

/// Names each centroid by the majority label of its training members; a
/// non-bijective naming is replaced by the permutation with maximal total
/// agreement (ties: lexicographically smallest label order).
KmeansRef kmeans_align(const std::array<Vector, kClusters>& centroids, std::span<const Vector> points,
                       std::span<const ClassLabel> labels, Granularity granularity = Granularity::Hourly);

/// Nearest centroid; equal distances resolve to the lowest class label.
ClassLabel kmeans_assign(const KmeansRef& ref, std::span<const double> x);
ClassLabel kmeans_assign(const KmeansRef& ref, const Profile& profile);

int nearest_centroid(std::span<const Vector> centroids, std::span<const double> x);
double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace cellplan
