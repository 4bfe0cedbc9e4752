#include <algorithm>
#include <random>
#include <thread>

#include "doctest.h"
#include "frap/errors.hpp"
#include "frap/features.hpp"
#include "support.hpp"

using namespace frap;

namespace {

std::vector<std::uint32_t> ids(const VertexLabels& labels) {
  std::vector<std::uint32_t> out;
  for (auto l : labels) out.push_back(l.id);
  return out;
}

}  // namespace

TEST_SUITE("features") {
  TEST_CASE("initial labels follow vertex types") {
    LabelMap map;
    const auto g = compact(testing::walkthrough_edges());
    CHECK(ids(initial_labels(g, map)) == std::vector<std::uint32_t>{2, 0, 1, 2, 3, 3});

    LabelMap same;
    std::vector<ProvenanceEdge> edges{testing::make_edge(1, "used", "a", "entity:file", "b", "entity:file"),
                                      testing::make_edge(2, "used", "b", "entity:file", "c", "entity:file")};
    const auto labels = initial_labels(compact(edges), same);
    CHECK(std::all_of(labels.begin(), labels.end(), [&](Label l) { return l == labels[0]; }));

    LabelMap empty;
    CHECK(initial_labels(compact(std::span<const ProvenanceEdge>{}), empty).empty());
  }

  TEST_CASE("first round reproduces the relabeling walkthrough") {
    LabelMap map;
    const auto g = compact(testing::walkthrough_edges());
    const auto round0 = initial_labels(g, map);
    const auto round1 = wl_iteration(g, round0, true, map);
    CHECK(ids(round1) == std::vector<std::uint32_t>{16, 14, 15, 17, 18, 18});

    const std::vector<std::pair<std::string, std::uint32_t>> expected{
        {"0;1:c|2:a", 4},     {"0;3:f|3:f", 5}, {"1;0:c", 6},  {"1;2:b|2:d", 7}, {"2;NULL", 8},
        {"2;0:a|1:b|2:b", 9}, {"2;1:d", 10},    {"2;2:b", 11}, {"3;NULL", 12},    {"3;0:f", 13},
        {"4,5", 14},          {"7,6", 15},      {"8,9", 16},   {"11,10", 17},     {"13,12", 18},
    };
    CHECK(map.size() == 19);
    for (const auto& [key, id] : expected) {
      CAPTURE(key);
      REQUIRE(map.find(key));
      CHECK(map.find(key)->id == id);
    }
  }

  TEST_CASE("second round drops edge tokens and keeps duplicates") {
    LabelMap map;
    const auto g = compact(testing::walkthrough_edges());
    const auto round1 = wl_iteration(g, initial_labels(g, map), true, map);
    wl_iteration(g, round1, false, map);
    CHECK(map.find("14;18|18"));
    CHECK(map.find("16;NULL"));
    CHECK(map.find("16;14|15|17"));
  }

  TEST_CASE("one iteration counts both rounds") {
    LabelMap map;
    const auto fv = extract_features(compact(testing::walkthrough_edges()), 1, map, "walk", 0);
    const std::vector<SparseVector::Entry> expected{{{0}, 1},  {{1}, 1},  {{2}, 2},  {{3}, 2}, {{14}, 1},
                                                    {{15}, 1}, {{16}, 1}, {{17}, 1}, {{18}, 2}};
    CHECK(std::vector<SparseVector::Entry>(fv.counts.entries().begin(), fv.counts.entries().end()) == expected);
    CHECK(fv.counts.total() == 12);
  }

  TEST_CASE("zero iterations give the type histogram") {
    LabelMap map;
    const auto fv = extract_features(compact(testing::walkthrough_edges()), 0, map, "walk", 0);
    CHECK(fv.counts.total() == 6);
    CHECK(fv.counts.get(Label{2}) == 2);
    CHECK(fv.counts.get(Label{3}) == 2);
  }

  TEST_CASE("totals are rounds times vertices") {
    std::mt19937_64 rng(3);
    LabelMap map;
    for (int i = 0; i < 30; ++i) {
      const auto edges = testing::random_graph(rng, 8, 12);
      const auto g = compact(edges);
      for (unsigned it : {0u, 1u, 4u}) {
        const auto fv = extract_features(g, it, map, "g", 0);
        CHECK(fv.counts.total() == doctest::Approx(double((it + 1) * g.vertex_count())));
      }
    }
  }

  TEST_CASE("isolated-looking vertices with equal labels relabel equally") {
    LabelMap map;
    std::vector<ProvenanceEdge> edges{testing::make_edge(1, "used", "p", "activity:process", "a", "entity:file"),
                                      testing::make_edge(2, "used", "p", "activity:process", "b", "entity:file")};
    const auto g = compact(edges);
    const auto r1 = wl_iteration(g, initial_labels(g, map), true, map);
    CHECK(r1[1] == r1[2]);
  }

  TEST_CASE("window and edge-span extraction agree") {
    const auto edges = testing::walkthrough_edges();
    LabelMap map;
    const auto a = extract_features(WindowGraph::init(edges, edges.size()), 4, map, "x", 0);
    const auto b = extract_features(compact(edges), 4, map, "x", 0);
    CHECK(a == b);
  }

  TEST_CASE("intern is idempotent and injective") {
    LabelMap map;
    const auto a = map.intern("alpha");
    CHECK(map.intern("alpha") == a);
    CHECK(map.intern("beta") != a);
    CHECK(map.key_of(a) == "alpha");
    CHECK(map.size() == 2);
  }

  TEST_CASE("parallel interns of one key allocate once") {
    LabelMap map;
    map.intern("warmup");
    std::vector<Label> seen(1000);
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < 8; ++t) {
      threads.emplace_back([&, t] {
        for (std::size_t i = t; i < seen.size(); i += 8) seen[i] = map.intern("shared-key");
      });
    }
    for (auto& t : threads) t.join();
    CHECK(map.size() == 2);
    CHECK(std::all_of(seen.begin(), seen.end(), [](Label l) { return l.id == 1; }));
  }

  TEST_CASE("label map rebuilds from keys") {
    auto map = LabelMap::from_keys({"a", "b", "c"});
    CHECK(map->find("c")->id == 2);
    CHECK_THROWS_AS(LabelMap::from_keys({"a", "a"}), Error);
  }

  TEST_CASE("feature vector text form round trips") {
    LabelMap map;
    const auto fv = extract_features(compact(testing::walkthrough_edges()), 2, map, "web-1", 3);
    const auto line = format_feature_vector(fv);
    CHECK(line.rfind("web-1,3,0:1,", 0) == 0);
    CHECK(parse_feature_vector(line) == fv);
  }

  TEST_CASE("sparse vectors merge duplicates and drop zeros") {
    const auto v = SparseVector::from_entries({{{3}, 1}, {{1}, 2}, {{3}, 2}, {{7}, 0}});
    CHECK(v.size() == 2);
    CHECK(v.get(Label{3}) == 3);
    CHECK(v.get(Label{7}) == 0);
    CHECK(v.total() == 5);
  }
}
