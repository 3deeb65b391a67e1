#include <random>

#include "cellplan/smo.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cellplan;

namespace {

struct DenseQ : QMatrix {
  oracle::Mat Q;
  std::size_t size() const override { return Q.size(); }
  void row(std::size_t i, std::span<double> out) override { std::copy(Q[i].begin(), Q[i].end(), out.begin()); }
  double diagonal(std::size_t i) const override { return Q[i][i]; }
};

}  // namespace

TEST_CASE("SMO reaches the projected-gradient optimum on random convex QPs") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng() % 6;
    std::vector<Vector> B(n, Vector(3));
    for (auto& r : B)
      for (auto& v : r) v = nd(rng);
    std::vector<signed char> y(n);
    std::vector<double> yd(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = i % 2 ? 1 : -1;
      yd[i] = y[i];
      p[i] = nd(rng);
    }
    DenseQ q;
    q.Q.assign(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double dot = 0.0;
        for (int d = 0; d < 3; ++d) dot += B[i][d] * B[j][d];
        q.Q[i][j] = yd[i] * yd[j] * (dot + (i == j ? 0.1 : 0.0));
      }
    const double C = 0.5 + static_cast<double>(rng() % 4);
    SmoOptions opt;
    opt.tol = 1e-6;
    const auto res = solve_smo(q, p, y, C, opt);
    const auto ref = oracle::qp_solve(q.Q, p, yd, C);
    const double want = oracle::qp_objective(q.Q, p, ref);
    CHECK(res.objective == doctest::Approx(want).epsilon(1e-4).scale(1.0));
    CHECK(res.objective >= want - 1e-6);
    double balance = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(res.alpha[i] >= 0.0);
      CHECK(res.alpha[i] <= C);
      balance += yd[i] * res.alpha[i];
    }
    CHECK(std::abs(balance) < 1e-9);
  }
}

TEST_CASE("objective trace is non-decreasing") {
  DenseQ q;
  q.Q = {{2, -1, 0.5}, {-1, 2, -0.3}, {0.5, -0.3, 1.5}};
  std::vector<double> p{-1, -1, -1};
  std::vector<signed char> y{1, 1, -1};
  SmoOptions opt;
  opt.record_objective = true;
  const auto r = solve_smo(q, p, y, 10.0, opt);
  REQUIRE_FALSE(r.objective_trace.empty());
  for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
    CHECK(r.objective_trace[i] >= r.objective_trace[i - 1] - 1e-12);
}

TEST_CASE("iteration cap raises ConvergenceError") {
  DenseQ q;
  const std::size_t n = 40;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  std::vector<Vector> B(n, Vector(2));
  for (auto& r : B)
    for (auto& v : r) v = nd(rng);
  q.Q.assign(n, std::vector<double>(n));
  std::vector<signed char> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = i % 2 ? 1 : -1;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) q.Q[i][j] = y[i] * y[j] * (B[i][0] * B[j][0] + B[i][1] * B[j][1]);
  std::vector<double> p(n, -1.0);
  SmoOptions opt;
  opt.tol = 1e-14;
  opt.max_passes = 1;
  CHECK_THROWS_AS(solve_smo(q, p, y, 1000.0, opt), ConvergenceError);
}

TEST_CASE("input validation") {
  DenseQ q;
  q.Q = {{1, 0}, {0, 1}};
  std::vector<double> p{-1, -1};
  std::vector<signed char> y{1, 1};
  CHECK_THROWS_AS(solve_smo(q, p, std::vector<signed char>{1}, 1.0), DimensionError);
  CHECK_THROWS_AS(solve_smo(q, p, y, 0.0), InvalidArgument);
}

TEST_CASE("kernel cache rows agree between dense and LRU modes") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  std::vector<Vector> rows(30, Vector(4));
  for (auto& r : rows)
    for (auto& v : r) v = nd(rng);
  KernelCache dense(KernelSpec::rbf(0.3), rows);
  KernelCache lru(KernelSpec::rbf(0.3), rows, 3 * 30 * sizeof(double));
  CHECK(dense.dense());
  CHECK_FALSE(lru.dense());
  for (int k = 0; k < 200; ++k) {
    const std::size_t i = rng() % rows.size();
    const auto a = dense.row(i);
    const std::vector<double> copy(a.begin(), a.end());
    const auto b = lru.row(i);
    for (std::size_t j = 0; j < rows.size(); ++j) REQUIRE(copy[j] == b[j]);
    CHECK(lru.diagonal(i) == 1.0);
  }
}
