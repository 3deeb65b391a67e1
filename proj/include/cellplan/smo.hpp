#pragma once

// Sequential minimal optimization for the box- and equality-constrained
// quadratic program shared by C-SVC and epsilon-SVR:
//
//   minimize    0.5 a'Qa + p'a
//   subject to  y'a = 0,  0 <= a_t <= C,  y_t in {-1, +1}
//
// Working pairs are chosen as the maximal violating pair; the solver stops
// when the violation gap m(a) - M(a) drops to tol.

#include <cstdint>
#include <list>
#include <span>
#include <unordered_map>
#include <vector>

#include "cellplan/common.hpp"
#include "cellplan/kernels.hpp"

namespace cellplan {

/// Row access to the solver's Q matrix.
class QMatrix {
 public:
  virtual ~QMatrix() = default;
  virtual std::size_t size() const = 0;
  virtual void row(std::size_t i, std::span<double> out) = 0;
  virtual double diagonal(std::size_t i) const = 0;
};

/// Kernel rows over a fixed data set. Materialized densely when it fits the
/// memory budget; otherwise rows are computed on demand and kept in an LRU
/// cache.
class KernelCache {
 public:
  static constexpr std::size_t kDefaultBudgetBytes = std::size_t{512} << 20;

  KernelCache(KernelSpec spec, std::span<const Vector> rows, std::size_t budget_bytes = kDefaultBudgetBytes);

  std::size_t size() const { return rows_.size(); }
  bool dense() const { return dense_.size() != 0; }
  /// The returned span stays valid until the next call to row().
  std::span<const double> row(std::size_t i);
  double diagonal(std::size_t i) const { return diagonal_[i]; }

 private:
  KernelSpec spec_;
  std::span<const Vector> rows_;
  Matrix dense_;
  std::vector<double> diagonal_;
  std::size_t capacity_rows_ = 0;
  std::list<std::pair<std::size_t, std::vector<double>>> lru_;
  std::unordered_map<std::size_t, decltype(lru_)::iterator> index_;
};

inline constexpr std::uint64_t kMinDefaultIterations = 100000;

struct SmoOptions {
  double tol = 1e-3;
  /// Iteration cap = max_passes * n. 0 selects 10 * n passes, but never
  /// fewer than kMinDefaultIterations pair updates.
  std::uint64_t max_passes = 0;
  /// Record the dual objective after every pair update.
  bool record_objective = false;
};

struct SmoResult {
  std::vector<double> alpha;
  std::vector<double> gradient;  // Qa + p at the final iterate
  /// Offset such that the decision value is sum(...) - rho.
  double rho = 0.0;
  /// Dual objective in maximization form: -(0.5 a'Qa + p'a).
  double objective = 0.0;
  std::uint64_t iterations = 0;
  double gap = 0.0;
  std::vector<double> objective_trace;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(std::uint64_t iterations, double gap, double objective);
  std::uint64_t iterations() const { return iterations_; }
  double gap() const { return gap_; }
  double objective() const { return objective_; }

 private:
  std::uint64_t iterations_;
  double gap_;
  double objective_;
};

SmoResult solve_smo(QMatrix& q, std::span<const double> linear, std::span<const signed char> y, double C,
                    const SmoOptions& options = {});

}  // namespace cellplan
