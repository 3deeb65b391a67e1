#pragma once

// Cross-validation and grid search over (C, gamma[, epsilon]).

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cellplan/svc.hpp"
#include "cellplan/svr.hpp"

namespace cellplan {

enum class Metric { Accuracy, Mse };
enum class SearchMode { Cartesian, Sequential };

std::string to_string(Metric m);

struct GridSpec {
  std::vector<double> C;
  std::vector<double> gamma;
  /// Absolute epsilon values; ignored (use {0}) for classification.
  std::vector<double> epsilon{0.0};
  Metric metric = Metric::Accuracy;
  /// Shuffled k-fold for classification, forward-chaining blocks for
  /// regression.
  int folds = 5;
  /// Regression only: when > 0, validate on the last `holdout` samples and
  /// train on everything before them instead of forward chaining.
  std::size_t holdout = 0;
  SearchMode mode = SearchMode::Cartesian;
  SmoOptions smo{};

  void validate() const;
  std::size_t cells() const { return C.size() * gamma.size() * epsilon.size(); }

  static std::vector<double> default_C();
  static std::vector<double> default_gamma();
  static GridSpec default_svm();
  /// epsilon in {0.01, 0.05, 0.1} * label_range.
  static GridSpec default_svr(double label_range);
};

struct FoldScore {
  double mean = 0.0;
  std::size_t folds_used = 0;
  std::vector<double> per_fold;
  std::vector<std::string> warnings;
};

using ClassPredictor = std::function<int(std::span<const double>)>;
using ClassifierTrainer = std::function<ClassPredictor(const TrainingSet&)>;

/// Shuffles row indices with `seed`, splits them into `folds` contiguous
/// chunks and averages held-out accuracy. Folds whose training part the
/// trainer rejects (missing class) are skipped with a warning.
FoldScore kfold_accuracy(const TrainingSet& data, const ClassifierTrainer& trainer, int folds, std::uint64_t seed);

using LoadPredictor = std::function<double(const FeatureVector4&)>;
using RegressorTrainer = std::function<LoadPredictor(std::span<const SvrSample>)>;

/// Time-ordered samples cut into folds + 1 contiguous blocks; fold k trains
/// on blocks [0, k) and validates on block k. Predictions are clamped at 0.
FoldScore forward_chain_mse(std::span<const SvrSample> samples, const RegressorTrainer& trainer, int folds);
FoldScore holdout_mse(std::span<const SvrSample> samples, const RegressorTrainer& trainer, std::size_t validation);

ClassifierTrainer svm_trainer(double C, double gamma, Granularity granularity, const SmoOptions& smo = {});
RegressorTrainer svr_trainer(const SvrParams& params);

struct GridCell {
  double C = 0.0;
  double gamma = 0.0;
  double epsilon = 0.0;
  double score = 0.0;  // NaN when failed
  bool failed = false;
  std::string error;
};

struct GridResult {
  GridCell best;
  std::vector<GridCell> table;
};

/// Optimum of the table for the metric; ties go to the smallest
/// (C, gamma, epsilon). Throws when every cell failed.
const GridCell& best_cell(std::span<const GridCell> table, Metric metric);

GridResult grid_search_svm(const TrainingSet& data, const GridSpec& grid, std::uint64_t seed,
                           Granularity granularity, unsigned threads = 0);
GridResult grid_search_svr(std::span<const SvrSample> samples, const GridSpec& grid, unsigned threads = 0);

/// "C,gamma,epsilon,metric"
void write_score_table(std::ostream& out, std::span<const GridCell> table);
std::vector<GridCell> read_score_table(std::istream& in);

}  // namespace cellplan
