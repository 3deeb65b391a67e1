#include <sstream>

#include "cellplan/kmeans.hpp"
#include "cellplan/model_io.hpp"
#include "cellplan/synthgen.hpp"
#include "doctest.h"

using namespace cellplan;

namespace {

std::vector<LabeledSeries> stations() { return gen_station_set(default_templates(), 30, 12); }

}  // namespace

TEST_CASE("multiclass model round trip is bit exact") {
  TrainingSet d;
  for (const auto& s : stations()) {
    d.X.push_back(normalize(s.series).values);
    d.y.push_back(to_int(s.label));
  }
  const auto m = train_multiclass(d, {10.0, KernelSpec::rbf(1.0 / 144), {}});
  std::stringstream io;
  save_model(io, m);
  const std::string text = io.str();
  std::istringstream peek(text);
  const auto h = peek_model(peek);
  CHECK(h.type == ModelType::SvmMulticlass);
  CHECK(h.feature_dim == 144);
  std::istringstream in(text);
  const auto back = load_multiclass_model(in);
  for (const auto& x : d.X)
    for (std::size_t k = 0; k < 3; ++k) REQUIRE(decision(back.pairwise[k].model, x) == decision(m.pairwise[k].model, x));
}

TEST_CASE("binary, k-means and SVR models round trip") {
  TrainingSet b{{{0.0}, {1.0}, {2.0}, {3.0}}, {-1, -1, 1, 1}};
  const auto bm = train_binary(b, {1.0, KernelSpec::linear(), {}});
  std::stringstream bio;
  save_model(bio, bm);
  CHECK(decision(load_binary_model(bio), Vector{1.7}) == decision(bm, Vector{1.7}));

  std::vector<Vector> pts;
  std::vector<ClassLabel> labels;
  for (const auto& s : stations()) {
    pts.push_back(aggregate_hourly(s.series).values);
    labels.push_back(s.label);
  }
  const auto ref = kmeans_align(kmeans_fit(pts, 1).centroids, pts, labels);
  std::stringstream kio;
  save_model(kio, ref);
  const auto kb = load_kmeans_model(kio);
  CHECK(kb.centroids == ref.centroids);
  CHECK(kb.centroid_class == ref.centroid_class);

  std::vector<SvrSample> s;
  for (int i = 1; i <= 144; i += 7) s.push_back({{i, 2, 3, 1}, static_cast<double>(i % 13)});
  const auto sm = train_svr(s, {5.0, 3.0, 0.5, {}});
  std::stringstream sio;
  save_model(sio, sm);
  const auto sb = load_svr_model(sio);
  for (const auto& x : s) REQUIRE(predict(sb, x.features) == predict(sm, x.features));
}

TEST_CASE("loading rejects the wrong type and malformed documents") {
  TrainingSet b{{{0.0}, {1.0}}, {-1, 1}};
  std::stringstream io;
  save_model(io, train_binary(b, {}));
  CHECK_THROWS_AS(load_svr_model(io), ParseError);
  std::istringstream junk("{not json");
  CHECK_THROWS_AS(load_binary_model(junk), ParseError);
  std::istringstream other("{\"format\":\"something\"}");
  CHECK_THROWS_AS(peek_model(other), ParseError);
  std::istringstream future("{\"format\":\"cellplan-model\",\"format_version\":99}");
  CHECK_THROWS_AS(peek_model(future), ParseError);
}
