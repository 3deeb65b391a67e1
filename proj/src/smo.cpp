#include "cellplan/smo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cellplan {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool at_upper(double a, double C) { return a >= C; }
bool at_lower(double a) { return a <= 0.0; }

bool in_up(signed char y, double a, double C) { return y > 0 ? !at_upper(a, C) : !at_lower(a); }
bool in_low(signed char y, double a, double C) { return y > 0 ? !at_lower(a) : !at_upper(a, C); }

double dual_objective(std::span<const double> alpha, std::span<const double> grad, std::span<const double> p) {
  // 0.5 a'Qa + p'a = 0.5 * sum a_t (G_t + p_t)
  double f = 0.0;
  for (std::size_t t = 0; t < alpha.size(); ++t) f += alpha[t] * (grad[t] + p[t]);
  return -0.5 * f;
}

}  // namespace

KernelCache::KernelCache(KernelSpec spec, std::span<const Vector> rows, std::size_t budget_bytes)
    : spec_(spec), rows_(rows) {
  spec_.validate();
  const std::size_t n = rows.size();
  diagonal_.resize(n);
  for (std::size_t i = 0; i < n; ++i) diagonal_[i] = eval_kernel(spec_, rows[i], rows[i]);
  const std::size_t row_bytes = std::max<std::size_t>(n, 1) * sizeof(double);
  if (n * row_bytes <= budget_bytes) {
    dense_ = gram_matrix(spec_, rows);
  } else {
    capacity_rows_ = std::max<std::size_t>(2, budget_bytes / row_bytes);
  }
}

std::span<const double> KernelCache::row(std::size_t i) {
  if (dense()) return dense_.row(i);
  if (auto it = index_.find(i); it != index_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    return lru_.front().second;
  }
  std::vector<double> values;
  if (lru_.size() >= capacity_rows_) {
    values = std::move(lru_.back().second);
    index_.erase(lru_.back().first);
    lru_.pop_back();
  }
  values.resize(rows_.size());
  for (std::size_t j = 0; j < rows_.size(); ++j) values[j] = eval_kernel(spec_, rows_[i], rows_[j]);
  lru_.emplace_front(i, std::move(values));
  index_[i] = lru_.begin();
  return lru_.front().second;
}

ConvergenceError::ConvergenceError(std::uint64_t iterations, double gap, double objective)
    : Error("SMO did not converge after " + std::to_string(iterations) + " iterations (violation gap " +
            format_double(gap) + ", dual objective " + format_double(objective) + ")"),
      iterations_(iterations),
      gap_(gap),
      objective_(objective) {}

SmoResult solve_smo(QMatrix& q, std::span<const double> linear, std::span<const signed char> y, double C,
                    const SmoOptions& options) {
  const std::size_t n = q.size();
  require_dimension("SMO linear term", n, linear.size());
  require_dimension("SMO labels", n, y.size());
  if (!(C > 0.0)) throw InvalidArgument("SMO requires C > 0");
  if (!(options.tol > 0.0)) throw InvalidArgument("SMO requires tol > 0");
  for (auto v : y)
    if (v != 1 && v != -1) throw InvalidArgument("SMO labels must be +1 or -1");

  const auto m = static_cast<std::uint64_t>(n);
  const std::uint64_t max_iter =
      options.max_passes ? options.max_passes * m : std::max<std::uint64_t>(10 * m * m, kMinDefaultIterations);

  SmoResult r;
  r.alpha.assign(n, 0.0);
  r.gradient.assign(linear.begin(), linear.end());
  auto& alpha = r.alpha;
  auto& grad = r.gradient;

  std::vector<double> qd(n);
  for (std::size_t t = 0; t < n; ++t) qd[t] = q.diagonal(t);
  std::vector<double> row_i(n), row_j(n);

  if (options.record_objective) r.objective_trace.push_back(dual_objective(alpha, grad, linear));

  while (true) {
    // maximal violating pair
    double g_max = -kInf;
    double g_min = kInf;
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(y[t], alpha[t], C) && v > g_max) {
        g_max = v;
        i = t;
      }
      if (in_low(y[t], alpha[t], C) && v < g_min) {
        g_min = v;
        j = t;
      }
    }
    r.gap = (i == n || j == n) ? 0.0 : g_max - g_min;
    if (i == n || j == n || r.gap <= options.tol) break;
    if (r.iterations >= max_iter) throw ConvergenceError(r.iterations, r.gap, dual_objective(alpha, grad, linear));
    ++r.iterations;

    q.row(i, row_i);
    q.row(j, row_j);
    const double old_i = alpha[i];
    const double old_j = alpha[j];

    if (y[i] != y[j]) {
      double quad = qd[i] + qd[j] + 2.0 * row_i[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = qd[i] + qd[j] - 2.0 * row_i[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += row_i[t] * di + row_j[t] * dj;

    if (options.record_objective) r.objective_trace.push_back(dual_objective(alpha, grad, linear));
  }

  // rho: mean of y*G over free variables, else midpoint of the feasible interval
  double upper = kInf, lower = -kInf, sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (at_upper(alpha[t], C)) {
      if (y[t] < 0)
        upper = std::min(upper, yg);
      else
        lower = std::max(lower, yg);
    } else if (at_lower(alpha[t])) {
      if (y[t] > 0)
        upper = std::min(upper, yg);
      else
        lower = std::max(lower, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  if (n_free > 0)
    r.rho = sum_free / static_cast<double>(n_free);
  else if (std::isfinite(upper) && std::isfinite(lower))
    r.rho = 0.5 * (upper + lower);
  else
    r.rho = std::isfinite(upper) ? upper : (std::isfinite(lower) ? lower : 0.0);
  r.objective = dual_objective(alpha, grad, linear);
  return r;
}

}  // namespace cellplan
