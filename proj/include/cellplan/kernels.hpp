#pragma once

#include <span>
#include <string>
#include <vector>

#include "cellplan/common.hpp"

namespace cellplan {

enum class KernelKind { Rbf, Linear };

std::string to_string(KernelKind kind);
KernelKind parse_kernel_kind(std::string_view text);

struct KernelSpec {
  KernelKind kind = KernelKind::Rbf;
  double gamma = 1.0;  // RBF only

  static KernelSpec rbf(double gamma);
  static KernelSpec linear();

  void validate() const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// Linear: x.y; RBF: exp(-gamma * |x - y|^2).
double eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

/// Dense row-major square matrix.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// G[i][j] = k(X[i], X[j]); the upper triangle is computed and mirrored.
Matrix gram_matrix(const KernelSpec& spec, std::span<const Vector> rows);

}  // namespace cellplan
