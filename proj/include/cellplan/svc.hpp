#pragma once

// Soft-margin kernel SVM (binary, SMO-trained) and the one-vs-one
// three-class load-profile classifier built from it.

#include <array>
#include <span>
#include <vector>

#include "cellplan/common.hpp"
#include "cellplan/ingest.hpp"
#include "cellplan/kernels.hpp"
#include "cellplan/smo.hpp"

namespace cellplan {

/// Load classes: 1 always loaded, 2 morning peak, 3 evening peak.
enum class ClassLabel : int { AlwaysLoaded = 1, MorningPeak = 2, EveningPeak = 3 };

inline constexpr std::array<ClassLabel, 3> kAllClasses{ClassLabel::AlwaysLoaded, ClassLabel::MorningPeak,
                                                       ClassLabel::EveningPeak};

constexpr int to_int(ClassLabel c) { return static_cast<int>(c); }
ClassLabel class_from_int(long long value);
std::string class_name(ClassLabel c);

struct TrainingSet {
  std::vector<Vector> X;
  std::vector<int> y;

  std::size_t size() const { return X.size(); }
  std::size_t dimension() const { return X.empty() ? 0 : X.front().size(); }
  /// |X| == |y| >= 2 and a shared dimension.
  void validate() const;
};

struct BinaryModel {
  std::vector<Vector> support_vectors;
  /// alpha_i * y_i per support vector.
  std::vector<double> dual_coefs;
  double bias = 0.0;
  KernelSpec kernel;
  double C = 1.0;

  // training diagnostics
  double dual_objective = 0.0;
  std::uint64_t iterations = 0;

  std::size_t dimension() const { return support_vectors.empty() ? 0 : support_vectors.front().size(); }
};

struct SvcParams {
  double C = 1.0;
  KernelSpec kernel = KernelSpec::rbf(1.0);
  SmoOptions smo{};
};

/// Labels must be -1/+1 with both present.
BinaryModel train_binary(const TrainingSet& data, const SvcParams& params);

/// Also returns the raw SMO result (all alphas, objective trace).
BinaryModel train_binary(const TrainingSet& data, const SvcParams& params, SmoResult* details);

double decision(const BinaryModel& model, std::span<const double> x);

struct PairwiseModel {
  ClassLabel positive;  // decision >= 0 votes for this class
  ClassLabel negative;
  BinaryModel model;
};

struct MulticlassModel {
  std::vector<PairwiseModel> pairwise;  // (1,2), (1,3), (2,3)
  Granularity granularity = Granularity::TenMin;

  std::size_t dimension() const { return pairwise.empty() ? 0 : pairwise.front().model.dimension(); }
};

/// Raised by train_multiclass; names the failing class pair.
class PairTrainingError : public Error {
 public:
  PairTrainingError(ClassLabel a, ClassLabel b, const std::string& cause);
};

/// Labels must be 1/2/3, each class with at least two examples.
MulticlassModel train_multiclass(const TrainingSet& data, const SvcParams& params,
                                 Granularity granularity = Granularity::TenMin);

struct Vote {
  ClassLabel label = ClassLabel::AlwaysLoaded;
  std::array<int, 3> votes{};
  std::array<double, 3> margin{};
};

/// Voting on a raw feature vector (no degenerate routing).
Vote vote(const MulticlassModel& model, std::span<const double> x);

/// Degenerate (constant) profiles map to AlwaysLoaded without voting.
ClassLabel classify(const MulticlassModel& model, const Profile& profile);

struct Evaluation {
  std::array<double, 3> per_class_accuracy{};  // NaN for classes absent from the set
  std::array<std::size_t, 3> class_size{};
  double total_accuracy = 0.0;
  /// confusion[truth-1][predicted-1]
  std::array<std::array<std::size_t, 3>, 3> confusion{};
  std::size_t correct = 0;
  std::size_t total = 0;
};

Evaluation evaluate_labels(std::span<const ClassLabel> truth, std::span<const ClassLabel> predicted);
Evaluation evaluate(const MulticlassModel& model, std::span<const Profile> profiles, std::span<const ClassLabel> truth);

/// Default classification gamma: 1 / number of features.
double default_gamma(std::size_t features);

}  // namespace cellplan
