#include "cellplan/model_select.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>
#include <tuple>

namespace cellplan {

namespace {

void check_candidates(const char* name, const std::vector<double>& values, bool allow_zero) {
  if (values.empty()) throw InvalidArgument(std::string("grid: empty candidate list for ") + name);
  for (double v : values)
    if (!(allow_zero ? v >= 0.0 : v > 0.0) || !std::isfinite(v))
      throw InvalidArgument(std::string("grid: candidates for ") + name + " must be positive");
}

bool is_constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

FoldScore finish(FoldScore s) {
  if (s.folds_used == 0) throw InvalidArgument("cross-validation: every fold was skipped");
  s.mean = std::accumulate(s.per_fold.begin(), s.per_fold.end(), 0.0) / static_cast<double>(s.folds_used);
  return s;
}

double validation_mse(std::span<const SvrSample> validation, const LoadPredictor& predictor) {
  double s = 0.0;
  for (const auto& v : validation) {
    const double d = std::max(0.0, predictor(v.features)) - v.label;
    s += d * d;
  }
  return s / static_cast<double>(validation.size());
}

void evaluate_cells(std::vector<GridCell>& cells, const std::function<double(const GridCell&)>& score,
                    unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(cells.size(), 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        cells[i].score = score(cells[i]);
      } catch (const std::exception& e) {
        cells[i].failed = true;
        cells[i].score = std::numeric_limits<double>::quiet_NaN();
        cells[i].error = e.what();
      }
    }
  };
  if (threads == 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
}

std::vector<GridCell> cartesian(const std::vector<double>& Cs, const std::vector<double>& gammas,
                                const std::vector<double>& epsilons) {
  std::vector<GridCell> cells;
  for (double c : Cs)
    for (double g : gammas)
      for (double e : epsilons) cells.push_back({c, g, e, 0.0, false, {}});
  return cells;
}

GridResult search(const GridSpec& grid, const std::function<double(const GridCell&)>& score, unsigned threads) {
  GridResult result;
  if (grid.mode == SearchMode::Cartesian) {
    result.table = cartesian(grid.C, grid.gamma, grid.epsilon);
    evaluate_cells(result.table, score, threads);
  } else {
    // gamma first at the middle C / epsilon, then C x epsilon at that gamma
    const double c_mid = grid.C[grid.C.size() / 2];
    const double e_mid = grid.epsilon[grid.epsilon.size() / 2];
    auto stage1 = cartesian({c_mid}, grid.gamma, {e_mid});
    evaluate_cells(stage1, score, threads);
    const double g_best = best_cell(stage1, grid.metric).gamma;
    auto stage2 = cartesian(grid.C, {g_best}, grid.epsilon);
    stage2.erase(std::remove_if(stage2.begin(), stage2.end(),
                                [&](const GridCell& c) { return c.C == c_mid && c.epsilon == e_mid; }),
                 stage2.end());
    evaluate_cells(stage2, score, threads);
    result.table = std::move(stage1);
    result.table.insert(result.table.end(), stage2.begin(), stage2.end());
  }
  result.best = best_cell(result.table, grid.metric);
  return result;
}

}  // namespace

std::string to_string(Metric m) { return m == Metric::Accuracy ? "accuracy" : "mse"; }

void GridSpec::validate() const {
  check_candidates("C", C, false);
  check_candidates("gamma", gamma, false);
  check_candidates("epsilon", epsilon, metric == Metric::Accuracy);
  if (holdout == 0 && folds < 2) throw InvalidArgument("grid: folds must be >= 2");
}

std::vector<double> GridSpec::default_C() { return {0.1, 1.0, 10.0, 100.0}; }

std::vector<double> GridSpec::default_gamma() { return {1e-4, 3e-4, 1e-3, 1.4e-3, 3e-3, 1e-2}; }

GridSpec GridSpec::default_svm() {
  GridSpec g;
  g.C = default_C();
  g.gamma = default_gamma();
  g.epsilon = {0.0};
  g.metric = Metric::Accuracy;
  g.folds = 5;
  return g;
}

GridSpec GridSpec::default_svr(double label_range) {
  if (!(label_range > 0.0)) label_range = 1.0;
  GridSpec g;
  g.C = default_C();
  g.gamma = default_gamma();
  g.epsilon = {0.01 * label_range, 0.05 * label_range, 0.1 * label_range};
  g.metric = Metric::Mse;
  g.folds = 3;
  return g;
}

FoldScore kfold_accuracy(const TrainingSet& data, const ClassifierTrainer& trainer, int folds, std::uint64_t seed) {
  data.validate();
  if (folds < 2 || static_cast<std::size_t>(folds) > data.size())
    throw InvalidArgument("k-fold: need 2 <= folds <= number of samples");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  FoldScore score;
  const std::size_t n = data.size();
  const auto k_folds = static_cast<std::size_t>(folds);
  for (std::size_t k = 0; k < k_folds; ++k) {
    const std::size_t lo = k * n / k_folds;
    const std::size_t hi = (k + 1) * n / k_folds;
    TrainingSet train, test;
    for (std::size_t p = 0; p < n; ++p) {
      auto& target = (p >= lo && p < hi) ? test : train;
      target.X.push_back(data.X[order[p]]);
      target.y.push_back(data.y[order[p]]);
    }
    ClassPredictor predictor;
    try {
      predictor = trainer(train);
    } catch (const InvalidArgument& e) {
      score.warnings.push_back("fold " + std::to_string(k) + " skipped: " + e.what());
      continue;
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i)
      if (predictor(test.X[i]) == test.y[i]) ++correct;
    score.per_fold.push_back(static_cast<double>(correct) / static_cast<double>(test.size()));
    score.folds_used++;
  }
  return finish(std::move(score));
}

FoldScore forward_chain_mse(std::span<const SvrSample> samples, const RegressorTrainer& trainer, int folds) {
  if (folds < 1) throw InvalidArgument("forward chaining: folds must be >= 1");
  const std::size_t blocks = static_cast<std::size_t>(folds) + 1;
  if (samples.size() < blocks) throw InvalidArgument("forward chaining: fewer samples than blocks");
  FoldScore score;
  const std::size_t n = samples.size();
  for (std::size_t k = 1; k < blocks; ++k) {
    const std::size_t lo = k * n / blocks;
    const std::size_t hi = (k + 1) * n / blocks;
    const auto predictor = trainer(samples.subspan(0, lo));
    score.per_fold.push_back(validation_mse(samples.subspan(lo, hi - lo), predictor));
    score.folds_used++;
  }
  return finish(std::move(score));
}

FoldScore holdout_mse(std::span<const SvrSample> samples, const RegressorTrainer& trainer, std::size_t validation) {
  if (validation == 0 || validation >= samples.size())
    throw InvalidArgument("holdout: validation size must lie in [1, n)");
  const std::size_t cut = samples.size() - validation;
  const auto predictor = trainer(samples.subspan(0, cut));
  FoldScore score;
  score.per_fold.push_back(validation_mse(samples.subspan(cut), predictor));
  score.folds_used = 1;
  return finish(std::move(score));
}

ClassifierTrainer svm_trainer(double C, double gamma, Granularity granularity, const SmoOptions& smo) {
  return [=](const TrainingSet& train) -> ClassPredictor {
    SvcParams params{C, KernelSpec::rbf(gamma), smo};
    auto model = std::make_shared<const MulticlassModel>(train_multiclass(train, params, granularity));
    return [model](std::span<const double> x) {
      if (is_constant(x)) return to_int(ClassLabel::AlwaysLoaded);
      return to_int(vote(*model, x).label);
    };
  };
}

RegressorTrainer svr_trainer(const SvrParams& params) {
  return [=](std::span<const SvrSample> train) -> LoadPredictor {
    auto model = std::make_shared<const SvrModel>(train_svr(train, params));
    return [model](const FeatureVector4& x) { return predict(*model, x); };
  };
}

const GridCell& best_cell(std::span<const GridCell> table, Metric metric) {
  const GridCell* best = nullptr;
  for (const auto& cell : table) {
    if (cell.failed) continue;
    if (!best) {
      best = &cell;
      continue;
    }
    const bool better = metric == Metric::Accuracy ? cell.score > best->score : cell.score < best->score;
    const bool tie = cell.score == best->score;
    if (better || (tie && std::tie(cell.C, cell.gamma, cell.epsilon) < std::tie(best->C, best->gamma, best->epsilon)))
      best = &cell;
  }
  if (!best) {
    std::string first_error = table.empty() ? "empty grid" : table.front().error;
    throw Error("grid search: every cell failed (" + first_error + ")");
  }
  return *best;
}

GridResult grid_search_svm(const TrainingSet& data, const GridSpec& grid, std::uint64_t seed,
                           Granularity granularity, unsigned threads) {
  grid.validate();
  if (grid.metric != Metric::Accuracy) throw InvalidArgument("SVM grid search uses the accuracy metric");
  return search(grid, [&](const GridCell& cell) {
    return kfold_accuracy(data, svm_trainer(cell.C, cell.gamma, granularity, grid.smo), grid.folds, seed).mean;
  }, threads);
}

GridResult grid_search_svr(std::span<const SvrSample> samples, const GridSpec& grid, unsigned threads) {
  grid.validate();
  if (grid.metric != Metric::Mse) throw InvalidArgument("SVR grid search uses the MSE metric");
  return search(grid, [&](const GridCell& cell) {
    const auto trainer = svr_trainer({cell.C, cell.gamma, cell.epsilon, grid.smo});
    return grid.holdout > 0 ? holdout_mse(samples, trainer, grid.holdout).mean
                            : forward_chain_mse(samples, trainer, grid.folds).mean;
  }, threads);
}

void write_score_table(std::ostream& out, std::span<const GridCell> table) {
  out << "C,gamma,epsilon,metric\n";
  for (const auto& c : table)
    out << format_double(c.C) << ',' << format_double(c.gamma) << ',' << format_double(c.epsilon) << ','
        << format_double(c.score) << '\n';
}

std::vector<GridCell> read_score_table(std::istream& in) {
  std::vector<GridCell> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty() || view.front() == '#' || view.starts_with("C,")) continue;
    const auto f = split(view, ',');
    if (f.size() != 4) throw ParseError("score table line " + std::to_string(line_no) + ": expected 4 fields");
    GridCell c{parse_double(f[0]), parse_double(f[1]), parse_double(f[2]), parse_double(f[3]), false, {}};
    c.failed = std::isnan(c.score);
    out.push_back(c);
  }
  return out;
}

}  // namespace cellplan
