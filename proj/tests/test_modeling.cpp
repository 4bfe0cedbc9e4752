#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "frap/errors.hpp"
#include "frap/modeling.hpp"
#include "support.hpp"

using namespace frap;

namespace {

FeatureVector fv(std::string id, std::initializer_list<std::pair<std::uint32_t, double>> entries) {
  std::vector<SparseVector::Entry> out;
  for (auto [l, c] : entries) out.push_back({Label{l}, c});
  return {std::move(id), 0, SparseVector::from_entries(std::move(out))};
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

// Distances between points scattered in unit discs around centres 100 apart,
// so every row is close to the rows of its own block.
Matrix block_matrix(const std::vector<std::size_t>& sizes, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    for (std::size_t i = 0; i < sizes[b]; ++i) pts.emplace_back(100.0 * static_cast<double>(b) + jitter(rng), jitter(rng));
  }
  const std::size_t n = pts.size();
  Matrix m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      m[i][j] = m[j][i] = std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second);
    }
  }
  return m;
}

std::shared_ptr<LabelMap> map_with(std::size_t n) {
  auto map = std::make_shared<LabelMap>();
  for (std::size_t i = 0; i < n; ++i) map->intern("k" + std::to_string(i));
  return map;
}

}  // namespace

TEST_SUITE("modeling") {
  TEST_CASE("pairwise matrix") {
    const std::vector<FeatureVector> same{fv("a", {{0, 1}, {1, 2}}), fv("b", {{0, 1}, {1, 2}})};
    const auto z = pairwise_distance_matrix(same, MetricKind::SymmetricKLD, 1e-4);
    CHECK(z == Matrix{{0, 0}, {0, 0}});

    const std::vector<FeatureVector> three{fv("a", {{0, 1}}), fv("b", {{0, 1}}), fv("c", {{1, 4}, {2, 1}})};
    for (auto kind : {MetricKind::SymmetricKLD, MetricKind::Hellinger, MetricKind::Euclidean}) {
      const auto m = pairwise_distance_matrix(three, kind, 1e-4);
      int zeros = 0;
      for (std::size_t i = 0; i < 3; ++i) {
        CHECK(m[i][i] == 0);
        for (std::size_t j = 0; j < 3; ++j) {
          CHECK(m[i][j] == m[j][i]);
          if (i != j && m[i][j] == 0) ++zeros;
        }
      }
      CHECK(zeros == 2);
    }
    CHECK_THROWS_AS(pairwise_distance_matrix(std::span(three).first(1), MetricKind::Euclidean, 1e-4), Error);
  }

  TEST_CASE("kmeans on separated duplicates") {
    const std::vector<Point> pts{{0, 0}, {0, 0}, {0, 0}, {10, 10}, {10, 10}, {10, 10}};
    const auto r = kmeans(pts, 2, 42);
    REQUIRE(r.centroids.size() == 2);
    CHECK(r.assignment[0] == r.assignment[2]);
    CHECK(r.assignment[3] == r.assignment[5]);
    CHECK(r.assignment[0] != r.assignment[3]);
    CHECK(r.centroids[r.assignment[0]] == Point{0, 0});
    CHECK(r.centroids[r.assignment[3]] == Point{10, 10});
    CHECK(r.converged);
  }

  TEST_CASE("kmeans is a fixed point at distinct points") {
    const std::vector<Point> pts{{0, 0}, {1, 5}, {3, 2}, {9, 9}};
    const auto r = kmeans_from(pts, pts);
    CHECK(r.centroids.size() == 4);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(r.assignment[i] == i);
  }

  TEST_CASE("duplicate points starve a centroid") {
    const std::vector<Point> pts{{0, 0}, {0, 0}, {4, 4}};
    const auto r = kmeans_from(pts, pts);
    CHECK(r.centroids.size() == 2);
    CHECK(r.assignment == std::vector<std::size_t>{0, 0, 1});
  }

  TEST_CASE("kmeans validates k and is seeded") {
    const std::vector<Point> pts{{0}, {1}, {5}, {6}, {20}};
    CHECK(code_of([&] { kmeans(pts, 0, 1); }) == ErrorCode::InvalidK);
    CHECK(code_of([&] { kmeans(pts, 6, 1); }) == ErrorCode::InvalidK);
    const auto a = kmeans(pts, 3, 99), b = kmeans(pts, 3, 99);
    CHECK(a.assignment == b.assignment);
    CHECK(a.centroids == b.centroids);
  }

  TEST_CASE("select_k on identical behaviour") {
    const Matrix zero(3, std::vector<double>(3, 0.0));
    const auto s = select_k(zero);
    CHECK(s.k == 1);
    CHECK(s.populated == 1);
  }

  TEST_CASE("select_k finds one outlier") {
    std::mt19937_64 rng(8);
    const auto m = block_matrix({9, 1}, rng);
    const auto s = select_k(m);
    CHECK(s.k == 2);
    CHECK(s.groups.back() == std::vector<std::size_t>{9});
  }

  TEST_CASE("select_k keeps mutually distant rows apart") {
    Matrix m(4, std::vector<double>(4, 0.0));
    const double d[4][4] = {{0, 10, 20, 30}, {10, 0, 15, 25}, {20, 15, 0, 12}, {30, 25, 12, 0}};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m[i][j] = d[i][j];
    CHECK(select_k(m, 1e-3).k == 4);
  }

  TEST_CASE("select_k recovers block counts") {
    std::mt19937_64 rng(21);
    for (std::size_t blocks = 1; blocks <= 3; ++blocks) {
      std::vector<std::size_t> sizes(blocks);
      for (auto& s : sizes) s = 2 + rng() % 5;
      CHECK(select_k(block_matrix(sizes, rng)).k == blocks);
    }
  }

  TEST_CASE("build_model drops the outlier") {
    ModelParams params;
    params.window_size = 10;
    std::vector<FeatureVector> vs{fv("a", {{0, 5}, {1, 5}}), fv("b", {{0, 5}, {1, 5}}), fv("c", {{0, 5}, {1, 5}}),
                                  fv("z", {{2, 10}})};
    BuildReport report;
    const auto model = build_model(vs, params, map_with(3), &report);
    CHECK(model.vectors.size() == 3);
    REQUIRE(model.clusters.size() == 1);
    CHECK(model.clusters[0].radius == 0);
    REQUIRE(report.discarded.size() == 1);
    CHECK(report.discarded[0].instance_id == "z");
    CHECK(model.universe.size() == 2);
  }

  TEST_CASE("build_model radius covers every member") {
    ModelParams params;
    params.window_size = 10;
    params.slack = 1.5;
    std::vector<FeatureVector> vs{fv("a", {{0, 5}, {1, 5}}), fv("b", {{0, 6}, {1, 4}}), fv("c", {{0, 4}, {1, 6}})};
    const auto model = build_model(vs, params, map_with(2));
    REQUIRE(model.clusters.size() == 1);
    double far = 0;
    for (auto i : model.clusters[0].members) {
      far = std::max(far, model.distance_to(model.vectors[i].counts, model.clusters[0]));
    }
    CHECK(model.clusters[0].radius == doctest::Approx(1.5 * far));
    CHECK(model.clusters[0].centroid.get(Label{0}) == doctest::Approx(5.0));
  }

  TEST_CASE("two distant vectors cannot form a model") {
    ModelParams params;
    params.window_size = 10;
    std::vector<FeatureVector> vs{fv("a", {{0, 5}}), fv("b", {{1, 5}})};
    CHECK(code_of([&] { build_model(vs, params, map_with(2)); }) == ErrorCode::AllSingletons);
  }

  TEST_CASE("model text round trip") {
    ModelParams params;
    params.window_size = 12;
    params.metric = MetricKind::Hellinger;
    params.slack = 1.25;
    params.seed = 77;
    std::vector<FeatureVector> vs{fv("a", {{0, 5}, {1, 5}}), fv("b", {{0, 6}, {1, 4}}), fv("c", {{0, 4}, {1, 7}}),
                                  fv("z", {{2, 10}})};
    const auto model = build_model(vs, params, map_with(3));
    const auto text = serialize_model(model);
    CHECK(text.rfind("FRAP-MODEL 1\n", 0) == 0);

    testing::TempDir dir;
    save_model(model, dir / "m.frap");
    const auto loaded = load_model(dir / "m.frap");
    CHECK(serialize_model(loaded) == text);
    CHECK(loaded.params == model.params);
    CHECK(loaded.clusters.size() == model.clusters.size());
    CHECK(loaded.clusters[0].radius == model.clusters[0].radius);
    CHECK(loaded.label_map->size() == model.label_map->size());
    CHECK(loaded.vectors == model.vectors);
  }

  TEST_CASE("identical inputs give identical model bytes") {
    ModelParams params;
    params.window_size = 3;
    std::vector<FeatureVector> vs{fv("a", {{0, 5}, {1, 5}}), fv("b", {{0, 6}, {1, 4}}), fv("c", {{0, 4}, {1, 7}})};
    CHECK(serialize_model(build_model(vs, params, map_with(2))) == serialize_model(build_model(vs, params, map_with(2))));
  }

  TEST_CASE("bad header or body") {
    testing::TempDir dir;
    {
      std::ofstream(dir / "bad.frap") << "NOT-A-MODEL 1\n";
      std::ofstream(dir / "v2.frap") << "FRAP-MODEL 2\n";
      std::ofstream(dir / "cut.frap") << "FRAP-MODEL 1\nmetric kld\nwindow_size";
    }
    CHECK(code_of([&] { load_model(dir / "bad.frap"); }) == ErrorCode::VersionMismatch);
    CHECK(code_of([&] { load_model(dir / "v2.frap"); }) == ErrorCode::VersionMismatch);
    CHECK(code_of([&] { load_model(dir / "cut.frap"); }) == ErrorCode::VersionMismatch);
    CHECK(code_of([&] { load_model(dir / "absent.frap"); }) == ErrorCode::IoFailure);
  }
}
