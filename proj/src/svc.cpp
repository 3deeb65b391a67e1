#include "cellplan/svc.hpp"

#include <cmath>
#include <limits>

namespace cellplan {

namespace {

class SvcQ final : public QMatrix {
 public:
  SvcQ(KernelCache& cache, std::span<const signed char> y) : cache_(cache), y_(y) {}

  std::size_t size() const override { return y_.size(); }
  double diagonal(std::size_t i) const override { return cache_.diagonal(i); }
  void row(std::size_t i, std::span<double> out) override {
    const auto k = cache_.row(i);
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = (y_[i] == y_[t] ? k[t] : -k[t]);
  }

 private:
  KernelCache& cache_;
  std::span<const signed char> y_;
};

}  // namespace

ClassLabel class_from_int(long long value) {
  if (value < 1 || value > 3) throw InvalidArgument("class label must be 1, 2 or 3, got " + std::to_string(value));
  return static_cast<ClassLabel>(value);
}

std::string class_name(ClassLabel c) {
  switch (c) {
    case ClassLabel::AlwaysLoaded: return "always-loaded";
    case ClassLabel::MorningPeak: return "morning-peak";
    case ClassLabel::EveningPeak: return "evening-peak";
  }
  return "unknown";
}

void TrainingSet::validate() const {
  require_dimension("training labels", X.size(), y.size());
  if (X.size() < 2) throw InvalidArgument("training set needs at least 2 examples");
  for (std::size_t i = 1; i < X.size(); ++i)
    require_dimension("training vector " + std::to_string(i), X[0].size(), X[i].size());
  if (X[0].empty()) throw InvalidArgument("training vectors are empty");
}

BinaryModel train_binary(const TrainingSet& data, const SvcParams& params) {
  return train_binary(data, params, nullptr);
}

BinaryModel train_binary(const TrainingSet& data, const SvcParams& params, SmoResult* details) {
  data.validate();
  params.kernel.validate();
  if (!(params.C > 0.0)) throw InvalidArgument("C must be positive");
  std::vector<signed char> y(data.size());
  bool pos = false, neg = false;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.y[i] == 1) {
      y[i] = 1;
      pos = true;
    } else if (data.y[i] == -1) {
      y[i] = -1;
      neg = true;
    } else {
      throw InvalidArgument("binary labels must be -1 or +1");
    }
  }
  if (!pos || !neg) throw InvalidArgument("binary training needs both classes; got a single-class set");

  KernelCache cache(params.kernel, data.X);
  SvcQ q(cache, y);
  const std::vector<double> linear(data.size(), -1.0);
  SmoResult r = solve_smo(q, linear, y, params.C, params.smo);

  BinaryModel m;
  m.kernel = params.kernel;
  m.C = params.C;
  m.bias = -r.rho;
  m.dual_objective = r.objective;
  m.iterations = r.iterations;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (r.alpha[i] > 0.0) {
      m.support_vectors.push_back(data.X[i]);
      m.dual_coefs.push_back(r.alpha[i] * y[i]);
    }
  }
  if (details) *details = std::move(r);
  return m;
}

double decision(const BinaryModel& model, std::span<const double> x) {
  require_dimension("SVM decision input", model.dimension(), x.size());
  double f = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
    f += model.dual_coefs[i] * eval_kernel(model.kernel, x, model.support_vectors[i]);
  return f;
}

PairTrainingError::PairTrainingError(ClassLabel a, ClassLabel b, const std::string& cause)
    : Error("training class pair (" + std::to_string(to_int(a)) + "," + std::to_string(to_int(b)) + ") failed: " + cause) {}

MulticlassModel train_multiclass(const TrainingSet& data, const SvcParams& params, Granularity granularity) {
  data.validate();
  require_dimension("multiclass training vectors", dimension_of(granularity), data.dimension());
  std::array<std::size_t, 3> counts{};
  for (int label : data.y) counts[static_cast<std::size_t>(to_int(class_from_int(label)) - 1)]++;
  for (std::size_t c = 0; c < 3; ++c)
    if (counts[c] < 2)
      throw InvalidArgument("three-class model needs at least 2 examples of class " + std::to_string(c + 1) +
                            " (found " + std::to_string(counts[c]) + ")");

  MulticlassModel out;
  out.granularity = granularity;
  constexpr std::array<std::pair<ClassLabel, ClassLabel>, 3> pairs{
      {{ClassLabel::AlwaysLoaded, ClassLabel::MorningPeak},
       {ClassLabel::AlwaysLoaded, ClassLabel::EveningPeak},
       {ClassLabel::MorningPeak, ClassLabel::EveningPeak}}};
  for (const auto& [a, b] : pairs) {
    TrainingSet subset;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.y[i] == to_int(a) || data.y[i] == to_int(b)) {
        subset.X.push_back(data.X[i]);
        subset.y.push_back(data.y[i] == to_int(a) ? 1 : -1);
      }
    }
    try {
      out.pairwise.push_back({a, b, train_binary(subset, params)});
    } catch (const Error& e) {
      throw PairTrainingError(a, b, e.what());
    }
  }
  return out;
}

Vote vote(const MulticlassModel& model, std::span<const double> x) {
  require_dimension("classifier input", model.dimension(), x.size());
  Vote v;
  for (const auto& pm : model.pairwise) {
    const double d = decision(pm.model, x);
    const ClassLabel winner = d >= 0.0 ? pm.positive : pm.negative;
    const auto k = static_cast<std::size_t>(to_int(winner) - 1);
    v.votes[k] += 1;
    v.margin[k] += std::fabs(d);
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < 3; ++k) {
    if (v.votes[k] > v.votes[best] || (v.votes[k] == v.votes[best] && v.margin[k] > v.margin[best])) best = k;
  }
  v.label = static_cast<ClassLabel>(best + 1);
  return v;
}

ClassLabel classify(const MulticlassModel& model, const Profile& profile) {
  if (profile.granularity != model.granularity)
    throw DimensionError("profile granularity", dimension_of(model.granularity), dimension_of(profile.granularity));
  require_dimension("profile", model.dimension(), profile.values.size());
  if (profile.degenerate) return ClassLabel::AlwaysLoaded;
  return vote(model, profile.values).label;
}

Evaluation evaluate_labels(std::span<const ClassLabel> truth, std::span<const ClassLabel> predicted) {
  require_dimension("evaluation labels", truth.size(), predicted.size());
  if (truth.empty()) throw InvalidArgument("cannot evaluate an empty labeled set");
  Evaluation e;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto t = static_cast<std::size_t>(to_int(truth[i]) - 1);
    const auto p = static_cast<std::size_t>(to_int(predicted[i]) - 1);
    e.confusion[t][p]++;
    e.class_size[t]++;
    if (t == p) e.correct++;
  }
  e.total = truth.size();
  for (std::size_t c = 0; c < 3; ++c)
    e.per_class_accuracy[c] = e.class_size[c] == 0 ? std::numeric_limits<double>::quiet_NaN()
                                                   : static_cast<double>(e.confusion[c][c]) /
                                                         static_cast<double>(e.class_size[c]);
  e.total_accuracy = static_cast<double>(e.correct) / static_cast<double>(e.total);
  return e;
}

Evaluation evaluate(const MulticlassModel& model, std::span<const Profile> profiles, std::span<const ClassLabel> truth) {
  require_dimension("evaluation set", profiles.size(), truth.size());
  std::vector<ClassLabel> predicted;
  predicted.reserve(profiles.size());
  for (const auto& p : profiles) predicted.push_back(classify(model, p));
  return evaluate_labels(truth, predicted);
}

double default_gamma(std::size_t features) {
  if (features == 0) throw InvalidArgument("default_gamma: zero features");
  return 1.0 / static_cast<double>(features);
}

}  // namespace cellplan
