#include "cellplan/model_io.hpp"

#include <istream>
#include <ostream>

#include "json.hpp"

namespace cellplan {

using nlohmann::json;

namespace {

constexpr const char* kFormatTag = "cellplan-model";

json header(ModelType type, std::size_t dim) {
  return json{{"format", kFormatTag}, {"format_version", kModelFormatVersion}, {"model_type", to_string(type)},
              {"feature_dim", dim}};
}

ModelType parse_type(const std::string& s) {
  if (s == "svm-binary") return ModelType::SvmBinary;
  if (s == "svm-multiclass") return ModelType::SvmMulticlass;
  if (s == "kmeans") return ModelType::Kmeans;
  if (s == "svr") return ModelType::Svr;
  throw ParseError("unknown model_type '" + s + "'");
}

json read_document(std::istream& in) {
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != kFormatTag) throw ParseError("not a cellplan model document");
  const int version = doc.value("format_version", 0);
  if (version != kModelFormatVersion)
    throw ParseError("unsupported model format_version " + std::to_string(version));
  return doc;
}

json expect(std::istream& in, ModelType type) {
  json doc = read_document(in);
  const auto actual = parse_type(doc.at("model_type").get<std::string>());
  if (actual != type) throw ParseError("expected a " + to_string(type) + " model, found " + to_string(actual));
  return doc;
}

json kernel_json(const KernelSpec& k) { return {{"kind", to_string(k.kind)}, {"gamma", k.gamma}}; }

KernelSpec kernel_from(const json& j) {
  KernelSpec k{parse_kernel_kind(j.at("kind").get<std::string>()), j.at("gamma").get<double>()};
  k.validate();
  return k;
}

json binary_json(const BinaryModel& m) {
  return {{"kernel", kernel_json(m.kernel)},
          {"C", m.C},
          {"bias", m.bias},
          {"dual_coefs", m.dual_coefs},
          {"support_vectors", m.support_vectors},
          {"dual_objective", m.dual_objective},
          {"iterations", m.iterations}};
}

BinaryModel binary_from(const json& j) {
  BinaryModel m;
  m.kernel = kernel_from(j.at("kernel"));
  m.C = j.at("C").get<double>();
  m.bias = j.at("bias").get<double>();
  m.dual_coefs = j.at("dual_coefs").get<std::vector<double>>();
  m.support_vectors = j.at("support_vectors").get<std::vector<Vector>>();
  m.dual_objective = j.value("dual_objective", 0.0);
  m.iterations = j.value("iterations", std::uint64_t{0});
  require_dimension("model dual_coefs", m.support_vectors.size(), m.dual_coefs.size());
  return m;
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model document: ") + e.what());
  }
}

}  // namespace

std::string to_string(ModelType t) {
  switch (t) {
    case ModelType::SvmBinary: return "svm-binary";
    case ModelType::SvmMulticlass: return "svm-multiclass";
    case ModelType::Kmeans: return "kmeans";
    case ModelType::Svr: return "svr";
  }
  return "unknown";
}

void save_model(std::ostream& out, const BinaryModel& m) {
  json doc = header(ModelType::SvmBinary, m.dimension());
  doc["model"] = binary_json(m);
  out << doc.dump() << '\n';
}

void save_model(std::ostream& out, const MulticlassModel& m) {
  json doc = header(ModelType::SvmMulticlass, m.dimension());
  doc["granularity"] = to_string(m.granularity);
  doc["classes"] = {1, 2, 3};
  json pairs = json::array();
  for (const auto& p : m.pairwise)
    pairs.push_back({{"positive", to_int(p.positive)}, {"negative", to_int(p.negative)}, {"model", binary_json(p.model)}});
  doc["pairwise"] = std::move(pairs);
  out << doc.dump() << '\n';
}

void save_model(std::ostream& out, const KmeansRef& m) {
  json doc = header(ModelType::Kmeans, m.dimension());
  doc["granularity"] = to_string(m.granularity);
  json cs = json::array();
  for (std::size_t k = 0; k < kClusters; ++k) cs.push_back({{"class", to_int(m.centroid_class[k])}, {"centroid", m.centroids[k]}});
  doc["centroids"] = std::move(cs);
  out << doc.dump() << '\n';
}

void save_model(std::ostream& out, const SvrModel& m) {
  json doc = header(ModelType::Svr, kSvrFeatures);
  doc["model"] = {{"kernel", kernel_json(m.kernel)},
                  {"C", m.C},
                  {"epsilon", m.epsilon},
                  {"bias", m.bias},
                  {"coefs", m.coefs},
                  {"support_vectors", m.support_vectors},
                  {"scaling_min", m.scaling.min},
                  {"scaling_max", m.scaling.max},
                  {"site_id", m.site_id},
                  {"base_year", m.base_year},
                  {"dual_objective", m.dual_objective},
                  {"iterations", m.iterations}};
  out << doc.dump() << '\n';
}

ModelHeader peek_model(std::istream& in) {
  const json doc = read_document(in);
  return guarded([&] {
    return ModelHeader{parse_type(doc.at("model_type").get<std::string>()), doc.at("feature_dim").get<std::size_t>(),
                       doc.at("format_version").get<int>()};
  });
}

BinaryModel load_binary_model(std::istream& in) {
  const json doc = expect(in, ModelType::SvmBinary);
  return guarded([&] { return binary_from(doc.at("model")); });
}

MulticlassModel load_multiclass_model(std::istream& in) {
  const json doc = expect(in, ModelType::SvmMulticlass);
  return guarded([&] {
    MulticlassModel m;
    m.granularity = parse_granularity(doc.at("granularity").get<std::string>());
    for (const auto& p : doc.at("pairwise"))
      m.pairwise.push_back({class_from_int(p.at("positive").get<int>()), class_from_int(p.at("negative").get<int>()),
                            binary_from(p.at("model"))});
    if (m.pairwise.size() != 3) throw ParseError("multiclass model needs exactly 3 pairwise models");
    require_dimension("multiclass model", dimension_of(m.granularity), m.dimension());
    return m;
  });
}

KmeansRef load_kmeans_model(std::istream& in) {
  const json doc = expect(in, ModelType::Kmeans);
  return guarded([&] {
    KmeansRef m;
    m.granularity = parse_granularity(doc.at("granularity").get<std::string>());
    const auto& cs = doc.at("centroids");
    if (cs.size() != kClusters) throw ParseError("k-means model needs exactly 3 centroids");
    for (std::size_t k = 0; k < kClusters; ++k) {
      m.centroid_class[k] = class_from_int(cs[k].at("class").get<int>());
      m.centroids[k] = cs[k].at("centroid").get<Vector>();
      require_dimension("k-means centroid", dimension_of(m.granularity), m.centroids[k].size());
    }
    return m;
  });
}

SvrModel load_svr_model(std::istream& in) {
  const json doc = expect(in, ModelType::Svr);
  return guarded([&] {
    const auto& j = doc.at("model");
    SvrModel m;
    m.kernel = kernel_from(j.at("kernel"));
    m.C = j.at("C").get<double>();
    m.epsilon = j.at("epsilon").get<double>();
    m.bias = j.at("bias").get<double>();
    m.coefs = j.at("coefs").get<std::vector<double>>();
    m.support_vectors = j.at("support_vectors").get<std::vector<Vector>>();
    m.scaling.min = j.at("scaling_min").get<std::array<double, kSvrFeatures>>();
    m.scaling.max = j.at("scaling_max").get<std::array<double, kSvrFeatures>>();
    m.site_id = j.value("site_id", std::string{});
    m.base_year = j.value("base_year", 0);
    m.dual_objective = j.value("dual_objective", 0.0);
    m.iterations = j.value("iterations", std::uint64_t{0});
    require_dimension("SVR coefs", m.support_vectors.size(), m.coefs.size());
    for (const auto& sv : m.support_vectors) require_dimension("SVR support vector", kSvrFeatures, sv.size());
    return m;
  });
}

}  // namespace cellplan
