#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "frap/ingest.hpp"
#include "frap/windowing.hpp"

namespace frap {

/// Compact label id; only meaningful relative to one LabelMap.
struct Label {
  std::uint32_t id = 0;

  friend auto operator<=>(const Label&, const Label&) = default;
};

/// Insert-only, thread-safe association from structural keys to dense labels.
/// Ids are handed out in arrival order starting at 0.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(const LabelMap&) = delete;
  LabelMap& operator=(const LabelMap&) = delete;

  /// Atomic get-or-insert.
  Label intern(std::string_view key);

  /// Interns `keys` in order under a single lock; returns one label per key.
  std::vector<Label> intern_all(std::span<const std::string> keys);

  std::optional<Label> find(std::string_view key) const;
  std::string key_of(Label label) const;
  std::size_t size() const;

  /// Keys ordered by label id.
  std::vector<std::string> keys() const;

  /// Rebuilds a map whose key i receives label i. Throws InvalidArgument on
  /// duplicate or empty keys.
  static std::unique_ptr<LabelMap> from_keys(std::vector<std::string> keys);

 private:
  struct KeyHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
  };

  Label insert_locked(std::string_view key);

  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::uint32_t, KeyHash, std::equal_to<>> index_;
  std::vector<std::string> keys_;
};

/// Sorted sparse association label -> value with no zero entries. Holds
/// integer counts for feature vectors and real means for centroids.
class SparseVector {
 public:
  using Entry = std::pair<Label, double>;

  SparseVector() = default;
  /// Sorts, sums duplicate labels and drops zeros.
  static SparseVector from_entries(std::vector<Entry> entries);

  double get(Label label) const;
  double total() const;
  std::span<const Entry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::vector<Entry> entries_;
};

struct FeatureVector {
  std::string instance_id;
  std::size_t window_index = 0;
  SparseVector counts;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// `instance_id,window_index,label:count,...` in label order.
std::string format_feature_vector(const FeatureVector& fv);
FeatureVector parse_feature_vector(std::string_view line);

/// Index-based view of a window used by relabeling. Relation ids are assigned
/// in lexicographic order of the relation tokens.
struct CompactGraph {
  struct Arc {
    std::uint32_t neighbor;
    std::uint32_t relation;
  };

  std::vector<std::string> vertex_types;  // `kind:subtype` per vertex
  std::vector<std::vector<Arc>> in_arcs;
  std::vector<std::vector<Arc>> out_arcs;
  std::vector<std::string> relations;

  std::size_t vertex_count() const { return vertex_types.size(); }
};

CompactGraph compact(const WindowGraph& window);
CompactGraph compact(std::span<const ProvenanceEdge> edges);

/// One label per vertex, indexed like CompactGraph::vertex_types.
using VertexLabels = std::vector<Label>;

VertexLabels initial_labels(const CompactGraph& graph, LabelMap& map);
VertexLabels initial_labels(const WindowGraph& window, LabelMap& map);

/// One synchronous relabeling round. Every new label is computed from `labels`
/// (the previous round) and the results are published together.
VertexLabels wl_iteration(const CompactGraph& graph, const VertexLabels& labels,
                          bool with_edge_labels, LabelMap& map);

/// Labels of every round 0..iterations; edge relations only enter round 1.
std::vector<VertexLabels> wl_rounds(const CompactGraph& graph, unsigned iterations, LabelMap& map);

FeatureVector extract_features(const CompactGraph& graph, unsigned iterations, LabelMap& map,
                               std::string instance_id, std::size_t window_index);
FeatureVector extract_features(const WindowGraph& window, unsigned iterations, LabelMap& map,
                               std::string instance_id, std::size_t window_index);

}  // namespace frap

template <>
struct std::hash<frap::Label> {
  std::size_t operator()(const frap::Label& l) const noexcept { return std::hash<std::uint32_t>{}(l.id); }
};
