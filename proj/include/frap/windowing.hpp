#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>

#include "frap/ingest.hpp"

namespace frap {

struct SizerOptions {
  std::size_t novelty_threshold = 500;
  std::size_t hard_cap = 100000;
};

/// Learns the window size from type-triple novelty. Two counters: every edge
/// seen, and edges since the last never-before-seen triple. Whichever rule
/// fires first (quiet period reaches the novelty threshold, or the total
/// reaches the hard cap) declares the size as the total count.
class WindowSizer {
 public:
  explicit WindowSizer(SizerOptions options = {});

  /// Returns the declared size on the edge that triggers it.
  std::optional<std::size_t> observe(const ProvenanceEdge& edge);

  /// Declares the size as everything seen so far if no rule has fired.
  std::size_t finish();

  std::optional<std::size_t> declared() const { return declared_; }
  std::size_t edges_seen() const { return edges_seen_; }
  std::size_t since_last_novel() const { return since_last_novel_; }
  std::size_t distinct_triples() const { return seen_.size(); }
  const SizerOptions& options() const { return options_; }

 private:
  SizerOptions options_;
  std::size_t edges_seen_ = 0;
  std::size_t since_last_novel_ = 0;
  std::unordered_set<TypeTriple, TypeTripleHash> seen_;
  std::optional<std::size_t> declared_;
};

/// Runs a sizer over a whole stream; falls back to the stream length when the
/// stream ends before a size is declared.
std::size_t size_window(std::span<const ProvenanceEdge> edges, SizerOptions options = {});

/// The induced graph of the edges currently inside the sliding window.
class WindowGraph {
 public:
  struct VertexEntry {
    VertexType type;
    std::size_t incidence = 0;  // edge endpoints referencing the vertex
  };

  /// Throws InsufficientEdges when fewer than `window_size` edges are given.
  static WindowGraph init(std::span<const ProvenanceEdge> edges, std::size_t window_size,
                          std::size_t step = 1);

  /// Evicts the oldest `step` edges and appends `incoming`. Fewer than `step`
  /// incoming edges marks the window terminal.
  void advance(std::span<const ProvenanceEdge> incoming);

  const std::deque<ProvenanceEdge>& edges() const { return edges_; }
  const std::map<std::string, VertexEntry>& vertices() const { return vertices_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t step() const { return step_; }
  std::size_t advances() const { return advances_; }
  bool terminal() const { return terminal_; }
  bool empty() const { return edges_.empty(); }

 private:
  WindowGraph(std::size_t capacity, std::size_t step) : capacity_(capacity), step_(step) {}

  void add_edge(const ProvenanceEdge& edge);
  void evict_oldest();
  void touch(const std::string& id, const VertexType& type);
  void release(const std::string& id);

  std::size_t capacity_;
  std::size_t step_;
  std::size_t advances_ = 0;
  bool terminal_ = false;
  std::deque<ProvenanceEdge> edges_;
  std::map<std::string, VertexEntry> vertices_;
};

}  // namespace frap
