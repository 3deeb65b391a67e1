#include "cellplan/kernels.hpp"

#include <cmath>

namespace cellplan {

std::string to_string(KernelKind kind) { return kind == KernelKind::Rbf ? "rbf" : "linear"; }

KernelKind parse_kernel_kind(std::string_view text) {
  text = trim(text);
  if (text == "rbf") return KernelKind::Rbf;
  if (text == "linear") return KernelKind::Linear;
  throw InvalidArgument("unknown kernel '" + std::string(text) + "'");
}

KernelSpec KernelSpec::rbf(double gamma) {
  KernelSpec k{KernelKind::Rbf, gamma};
  k.validate();
  return k;
}

KernelSpec KernelSpec::linear() { return {KernelKind::Linear, 0.0}; }

void KernelSpec::validate() const {
  if (kind == KernelKind::Rbf && !(gamma > 0.0 && std::isfinite(gamma)))
    throw InvalidArgument("RBF kernel requires gamma > 0");
}

double eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  require_dimension("kernel", x.size(), y.size());
  if (spec.kind == KernelKind::Linear) {
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
    return dot;
  }
  double dist2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    dist2 += d * d;
  }
  return std::exp(-spec.gamma * dist2);
}

Matrix gram_matrix(const KernelSpec& spec, std::span<const Vector> rows) {
  spec.validate();
  const std::size_t n = rows.size();
  for (std::size_t i = 1; i < n; ++i) require_dimension("gram matrix row " + std::to_string(i), rows[0].size(), rows[i].size());
  Matrix g(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = eval_kernel(spec, rows[i], rows[j]);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

}  // namespace cellplan
