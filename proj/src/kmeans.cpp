#include "cellplan/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <set>

namespace cellplan {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  require_dimension("distance", a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

int nearest_centroid(std::span<const Vector> centroids, std::span<const double> x) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < centroids.size(); ++k) {
    const double d = squared_distance(centroids[k], x);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(k);
    }
  }
  return best;
}

KmeansFit kmeans_fit(std::span<const Vector> points, std::uint64_t seed, const KmeansOptions& options) {
  const std::size_t n = points.size();
  if (n == 0) throw InvalidArgument("k-means needs at least 3 distinct points, got none");
  const std::size_t dim = points[0].size();
  for (std::size_t i = 1; i < n; ++i) require_dimension("k-means point " + std::to_string(i), dim, points[i].size());
  if (std::set<Vector>(points.begin(), points.end()).size() < kClusters)
    throw InvalidArgument("k-means needs at least 3 distinct points");
  if (options.max_iterations < 1) throw InvalidArgument("k-means max_iterations must be >= 1");

  KmeansFit fit;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  // farthest-point seeding
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t chosen = pick(rng);
  for (std::size_t k = 0; k < kClusters; ++k) {
    fit.centroids[k] = points[chosen];
    for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], squared_distance(points[i], points[chosen]));
    chosen = static_cast<std::size_t>(std::max_element(nearest.begin(), nearest.end()) - nearest.begin());
  }

  std::vector<int> previous;
  fit.assignment.assign(n, 0);
  for (int iter = 0;; ++iter) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int k = nearest_centroid(fit.centroids, points[i]);
      fit.assignment[i] = k;
      inertia += squared_distance(points[i], fit.centroids[static_cast<std::size_t>(k)]);
    }
    fit.inertia_trace.push_back(inertia);
    if (!previous.empty() && previous == fit.assignment) {
      fit.converged = true;
      break;
    }
    if (iter == options.max_iterations) break;
    previous = fit.assignment;
    fit.iterations = iter + 1;

    std::array<Vector, kClusters> sums;
    std::array<std::size_t, kClusters> counts{};
    for (auto& s : sums) s.assign(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(fit.assignment[i]);
      counts[k]++;
      for (std::size_t d = 0; d < dim; ++d) sums[k][d] += points[i][d];
    }
    for (std::size_t k = 0; k < kClusters; ++k) {
      if (counts[k] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d) sums[k][d] /= static_cast<double>(counts[k]);
      fit.centroids[k] = std::move(sums[k]);
    }
    // empty clusters restart at the point worst served by its centroid
    for (std::size_t k = 0; k < kClusters; ++k) {
      if (counts[k] != 0) continue;
      std::size_t worst = 0;
      double worst_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = squared_distance(points[i], fit.centroids[static_cast<std::size_t>(fit.assignment[i])]);
        if (d > worst_d) {
          worst_d = d;
          worst = i;
        }
      }
      fit.centroids[k] = points[worst];
      fit.assignment[worst] = static_cast<int>(k);
    }
  }
  return fit;
}

KmeansRef kmeans_align(const std::array<Vector, kClusters>& centroids, std::span<const Vector> points,
                       std::span<const ClassLabel> labels, Granularity granularity) {
  require_dimension("aligned labels", points.size(), labels.size());
  for (const auto& c : centroids) require_dimension("centroid", dimension_of(granularity), c.size());

  std::array<std::array<std::size_t, 3>, kClusters> counts{};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto k = static_cast<std::size_t>(nearest_centroid(centroids, points[i]));
    counts[k][static_cast<std::size_t>(to_int(labels[i]) - 1)]++;
  }
  for (std::size_t k = 0; k < kClusters; ++k) {
    if (counts[k][0] + counts[k][1] + counts[k][2] == 0)
      throw InvalidArgument("cluster " + std::to_string(k) + " has no labeled training profile");
  }

  KmeansRef ref;
  ref.granularity = granularity;
  ref.centroids = centroids;

  std::array<int, kClusters> majority{};
  for (std::size_t k = 0; k < kClusters; ++k)
    majority[k] = static_cast<int>(std::max_element(counts[k].begin(), counts[k].end()) - counts[k].begin());
  std::array<int, kClusters> sorted = majority;
  std::sort(sorted.begin(), sorted.end());
  if (sorted == std::array<int, kClusters>{0, 1, 2}) {
    for (std::size_t k = 0; k < kClusters; ++k) ref.centroid_class[k] = static_cast<ClassLabel>(majority[k] + 1);
    return ref;
  }

  std::array<int, kClusters> perm{0, 1, 2};
  std::array<int, kClusters> best = perm;
  std::size_t best_score = 0;
  bool first = true;
  do {
    std::size_t score = 0;
    for (std::size_t k = 0; k < kClusters; ++k) score += counts[k][static_cast<std::size_t>(perm[k])];
    if (first || score > best_score) {
      best_score = score;
      best = perm;
      first = false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (std::size_t k = 0; k < kClusters; ++k) ref.centroid_class[k] = static_cast<ClassLabel>(best[k] + 1);
  return ref;
}

ClassLabel kmeans_assign(const KmeansRef& ref, std::span<const double> x) {
  require_dimension("k-means input", ref.dimension(), x.size());
  double best_d = std::numeric_limits<double>::infinity();
  ClassLabel best = ClassLabel::EveningPeak;
  for (std::size_t k = 0; k < kClusters; ++k) {
    const double d = squared_distance(ref.centroids[k], x);
    if (d < best_d || (d == best_d && to_int(ref.centroid_class[k]) < to_int(best))) {
      best_d = d;
      best = ref.centroid_class[k];
    }
  }
  return best;
}

ClassLabel kmeans_assign(const KmeansRef& ref, const Profile& profile) {
  if (profile.granularity != ref.granularity)
    throw DimensionError("profile granularity", dimension_of(ref.granularity), dimension_of(profile.granularity));
  return kmeans_assign(ref, profile.values);
}

}  // namespace cellplan
