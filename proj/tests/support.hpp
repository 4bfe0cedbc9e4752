#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "frap/ingest.hpp"

namespace frap::testing {

inline ProvenanceEdge make_edge(std::uint64_t seq, std::string relation, std::string src_id, std::string_view src_type,
                                std::string dst_id, std::string_view dst_type) {
  ProvenanceEdge e;
  e.edge_id = "e" + std::to_string(seq);
  e.relation = std::move(relation);
  e.src_id = std::move(src_id);
  e.src_type = VertexType::parse(src_type);
  e.dst_id = std::move(dst_id);
  e.dst_type = VertexType::parse(dst_type);
  e.seq = seq;
  return e;
}

// The six-vertex graph of the relabeling walkthrough. Type keys sort so that a
// fresh map hands out 0 = v1, 1 = v2, 2 = {s, v3}, 3 = {v4, t}; vertices appear
// in the order s, v1, v2, v3, v4, t.
inline std::vector<ProvenanceEdge> walkthrough_edges() {
  const char* s = "entity:file";
  const char* v1 = "activity:process";
  const char* v2 = "agent:user";
  const char* v3 = "entity:file";
  const char* v4 = "entity:socket";
  const char* t = "entity:socket";
  return {
      make_edge(1, "a", "s", s, "v1", v1),   make_edge(2, "b", "s", s, "v2", v2),
      make_edge(3, "b", "s", s, "v3", v3),   make_edge(4, "c", "v2", v2, "v1", v1),
      make_edge(5, "d", "v3", v3, "v2", v2), make_edge(6, "f", "v1", v1, "v4", v4),
      make_edge(7, "f", "v1", v1, "t", t),
  };
}

// Random provenance graph over at most `max_vertices` vertices. Every vertex is
// an endpoint of some edge, since windows are edge-induced.
inline std::vector<ProvenanceEdge> random_graph(std::mt19937_64& rng, std::size_t max_vertices, std::size_t max_edges,
                                                std::size_t type_count = 3, std::size_t relation_count = 2) {
  static const char* kTypes[] = {"activity:process", "entity:file", "entity:socket", "agent:user", "entity:pipe"};
  static const char* kRelations[] = {"used", "wasGeneratedBy", "wasInformedBy"};
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  const std::size_t n = 2 + pick(max_vertices - 1);
  std::vector<std::string> types(n);
  for (auto& t : types) t = kTypes[pick(type_count)];
  const std::size_t m = 1 + pick(max_edges);
  std::vector<ProvenanceEdge> edges;
  for (std::size_t i = 0; i < m; ++i) {
    const auto a = pick(n), b = pick(n);
    edges.push_back(make_edge(i + 1, kRelations[pick(relation_count)], "n" + std::to_string(a), types[a],
                              "n" + std::to_string(b), types[b]));
  }
  return edges;
}

// Re-sequences edges after a reorder so seq stays increasing.
inline std::vector<ProvenanceEdge> resequence(std::vector<ProvenanceEdge> edges) {
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i].seq = i + 1;
    edges[i].edge_id = "e" + std::to_string(i + 1);
  }
  return edges;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("frap-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace frap::testing
