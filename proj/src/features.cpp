#include "frap/features.hpp"

#include <algorithm>
#include <charconv>
#include <mutex>
#include <numeric>

#include "frap/errors.hpp"

namespace frap {

// ---------------------------------------------------------------------------
// LabelMap

Label LabelMap::insert_locked(std::string_view key) {
  if (auto it = index_.find(key); it != index_.end()) return Label{it->second};
  const auto id = static_cast<std::uint32_t>(keys_.size());
  keys_.emplace_back(key);
  index_.emplace(keys_.back(), id);
  return Label{id};
}

Label LabelMap::intern(std::string_view key) {
  {
    std::shared_lock lock(mutex_);
    if (auto it = index_.find(key); it != index_.end()) return Label{it->second};
  }
  std::unique_lock lock(mutex_);
  return insert_locked(key);
}

std::vector<Label> LabelMap::intern_all(std::span<const std::string> keys) {
  std::vector<Label> out(keys.size());
  bool missing = false;
  {
    std::shared_lock lock(mutex_);
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (auto it = index_.find(std::string_view(keys[i])); it != index_.end()) {
        out[i] = Label{it->second};
      } else {
        missing = true;
      }
    }
  }
  if (!missing) return out;
  std::unique_lock lock(mutex_);
  for (std::size_t i = 0; i < keys.size(); ++i) out[i] = insert_locked(keys[i]);
  return out;
}

std::optional<Label> LabelMap::find(std::string_view key) const {
  std::shared_lock lock(mutex_);
  if (auto it = index_.find(key); it != index_.end()) return Label{it->second};
  return std::nullopt;
}

std::string LabelMap::key_of(Label label) const {
  std::shared_lock lock(mutex_);
  if (label.id >= keys_.size()) throw Error(ErrorCode::InvalidArgument, "unknown label");
  return keys_[label.id];
}

std::size_t LabelMap::size() const {
  std::shared_lock lock(mutex_);
  return keys_.size();
}

std::vector<std::string> LabelMap::keys() const {
  std::shared_lock lock(mutex_);
  return keys_;
}

std::unique_ptr<LabelMap> LabelMap::from_keys(std::vector<std::string> keys) {
  auto map = std::make_unique<LabelMap>();
  map->keys_.reserve(keys.size());
  for (auto& key : keys) {
    if (key.empty()) throw Error(ErrorCode::InvalidArgument, "empty label key");
    const auto id = static_cast<std::uint32_t>(map->keys_.size());
    if (!map->index_.emplace(key, id).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate label key '" + key + "'");
    }
    map->keys_.push_back(std::move(key));
  }
  return map;
}

// ---------------------------------------------------------------------------
// SparseVector

SparseVector SparseVector::from_entries(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  SparseVector v;
  for (const auto& [label, value] : entries) {
    if (!v.entries_.empty() && v.entries_.back().first == label) {
      v.entries_.back().second += value;
    } else {
      v.entries_.emplace_back(label, value);
    }
  }
  std::erase_if(v.entries_, [](const Entry& e) { return e.second == 0.0; });
  return v;
}

double SparseVector::get(Label label) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), label,
                             [](const Entry& e, Label l) { return e.first < l; });
  return (it != entries_.end() && it->first == label) ? it->second : 0.0;
}

double SparseVector::total() const {
  double sum = 0.0;
  for (const auto& e : entries_) sum += e.second;
  return sum;
}

std::string format_feature_vector(const FeatureVector& fv) {
  std::string out = fv.instance_id + "," + std::to_string(fv.window_index);
  char buf[64];
  for (const auto& [label, count] : fv.counts.entries()) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, count);
    out += ',';
    out += std::to_string(label.id);
    out += ':';
    out.append(buf, ptr);
  }
  return out;
}

FeatureVector parse_feature_vector(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    parts.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (parts.size() < 2) throw Error(ErrorCode::MalformedRecord, "feature vector needs id and window index");
  FeatureVector fv;
  fv.instance_id = std::string(parts[0]);
  auto parse_num = [](std::string_view s, auto& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error(ErrorCode::MalformedRecord, "bad number '" + std::string(s) + "'");
    }
  };
  parse_num(parts[1], fv.window_index);
  std::vector<SparseVector::Entry> entries;
  for (std::size_t i = 2; i < parts.size(); ++i) {
    const auto colon = parts[i].find(':');
    if (colon == std::string_view::npos) throw Error(ErrorCode::MalformedRecord, "bad entry");
    Label label;
    double count = 0;
    parse_num(parts[i].substr(0, colon), label.id);
    parse_num(parts[i].substr(colon + 1), count);
    entries.emplace_back(label, count);
  }
  fv.counts = SparseVector::from_entries(std::move(entries));
  return fv;
}

// ---------------------------------------------------------------------------
// Graph compaction

namespace {

template <typename EdgeRange>
CompactGraph compact_edges(const EdgeRange& edges) {
  CompactGraph g;
  std::unordered_map<std::string_view, std::uint32_t> vertex_index;
  std::vector<std::string_view> relation_tokens;

  auto vertex = [&](const std::string& id, const VertexType& type) {
    auto [it, inserted] = vertex_index.try_emplace(id, static_cast<std::uint32_t>(g.vertex_types.size()));
    if (inserted) g.vertex_types.push_back(type.key());
    return it->second;
  };
  for (const auto& e : edges) relation_tokens.push_back(e.relation);
  std::sort(relation_tokens.begin(), relation_tokens.end());
  relation_tokens.erase(std::unique(relation_tokens.begin(), relation_tokens.end()), relation_tokens.end());
  g.relations.assign(relation_tokens.begin(), relation_tokens.end());

  struct Pending {
    std::uint32_t src, dst, rel;
  };
  std::vector<Pending> arcs;
  arcs.reserve(edges.size());
  for (const auto& e : edges) {
    const auto s = vertex(e.src_id, e.src_type);
    const auto d = vertex(e.dst_id, e.dst_type);
    const auto rel = static_cast<std::uint32_t>(
        std::lower_bound(relation_tokens.begin(), relation_tokens.end(), std::string_view(e.relation)) -
        relation_tokens.begin());
    arcs.push_back({s, d, rel});
  }
  g.in_arcs.resize(g.vertex_types.size());
  g.out_arcs.resize(g.vertex_types.size());
  for (const auto& a : arcs) {
    g.out_arcs[a.src].push_back({a.dst, a.rel});
    g.in_arcs[a.dst].push_back({a.src, a.rel});
  }
  return g;
}

constexpr std::uint32_t kNoRelation = UINT32_MAX;

using Element = std::pair<std::uint32_t, std::uint32_t>;  // (neighbor label, relation)

void append_uint(std::string& out, std::uint32_t v) {
  char buf[16];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

// List key text: `<owner>;<label>[:<relation>]|...`, or `<owner>;NULL` when empty.
std::string list_key(std::uint32_t owner, const std::vector<Element>& elems,
                     const std::vector<std::string>& relations) {
  std::string key;
  append_uint(key, owner);
  key.push_back(';');
  if (elems.empty()) {
    key += "NULL";
    return key;
  }
  for (std::size_t i = 0; i < elems.size(); ++i) {
    if (i) key.push_back('|');
    append_uint(key, elems[i].first);
    if (elems[i].second != kNoRelation) {
      key.push_back(':');
      key += relations[elems[i].second];
    }
  }
  return key;
}

std::string pair_key(std::uint32_t a, std::uint32_t b) {
  std::string key;
  append_uint(key, a);
  key.push_back(',');
  append_uint(key, b);
  return key;
}

}  // namespace

CompactGraph compact(const WindowGraph& window) { return compact_edges(window.edges()); }
CompactGraph compact(std::span<const ProvenanceEdge> edges) { return compact_edges(edges); }

// ---------------------------------------------------------------------------
// Relabeling
//
// New keys of a round are interned in structural order (owner label, then the
// element list compared lexicographically, empty list first), list keys before
// pair keys. Label allocation therefore depends only on the graph, never on
// vertex iteration order.

VertexLabels initial_labels(const CompactGraph& graph, LabelMap& map) {
  std::vector<std::string> distinct(graph.vertex_types);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const auto labels = map.intern_all(distinct);

  VertexLabels out(graph.vertex_count());
  for (std::size_t v = 0; v < graph.vertex_count(); ++v) {
    const auto pos = std::lower_bound(distinct.begin(), distinct.end(), graph.vertex_types[v]) - distinct.begin();
    out[v] = labels[static_cast<std::size_t>(pos)];
  }
  return out;
}

VertexLabels initial_labels(const WindowGraph& window, LabelMap& map) {
  return initial_labels(compact(window), map);
}

VertexLabels wl_iteration(const CompactGraph& graph, const VertexLabels& labels, bool with_edge_labels,
                          LabelMap& map) {
  const std::size_t n = graph.vertex_count();
  if (labels.size() != n) throw Error(ErrorCode::InvalidArgument, "label assignment does not cover the graph");

  // Update phase: every list is built from the previous round's labels.
  std::vector<std::vector<Element>> lists(2 * n);  // [2v] in-list, [2v+1] out-list
  for (std::size_t v = 0; v < n; ++v) {
    for (int dir = 0; dir < 2; ++dir) {
      const auto& arcs = dir == 0 ? graph.in_arcs[v] : graph.out_arcs[v];
      auto& list = lists[2 * v + dir];
      list.reserve(arcs.size());
      for (const auto& arc : arcs) {
        list.emplace_back(labels[arc.neighbor].id, with_edge_labels ? arc.relation : kNoRelation);
      }
      std::sort(list.begin(), list.end());
    }
  }

  std::vector<std::uint32_t> order(2 * n);
  std::iota(order.begin(), order.end(), 0u);
  auto owner = [&](std::uint32_t slot) { return labels[slot / 2].id; };
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (owner(a) != owner(b)) return owner(a) < owner(b);
    return lists[a] < lists[b];
  });

  std::vector<std::string> keys;
  std::vector<std::uint32_t> key_of_slot(2 * n);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto slot = order[i];
    if (i == 0 || owner(order[i - 1]) != owner(slot) || lists[order[i - 1]] != lists[slot]) {
      keys.push_back(list_key(owner(slot), lists[slot], graph.relations));
    }
    key_of_slot[slot] = static_cast<std::uint32_t>(keys.size() - 1);
  }
  const auto list_labels = map.intern_all(keys);

  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs(n);
  for (std::size_t v = 0; v < n; ++v) {
    pairs[v] = {list_labels[key_of_slot[2 * v]].id, list_labels[key_of_slot[2 * v + 1]].id};
  }
  auto distinct = pairs;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<std::string> pair_keys;
  pair_keys.reserve(distinct.size());
  for (const auto& [a, b] : distinct) pair_keys.push_back(pair_key(a, b));
  const auto pair_labels = map.intern_all(pair_keys);

  // Swap phase: publish all new labels at once.
  VertexLabels next(n);
  for (std::size_t v = 0; v < n; ++v) {
    const auto pos = std::lower_bound(distinct.begin(), distinct.end(), pairs[v]) - distinct.begin();
    next[v] = pair_labels[static_cast<std::size_t>(pos)];
  }
  return next;
}

std::vector<VertexLabels> wl_rounds(const CompactGraph& graph, unsigned iterations, LabelMap& map) {
  std::vector<VertexLabels> rounds;
  rounds.reserve(iterations + 1);
  rounds.push_back(initial_labels(graph, map));
  for (unsigned r = 1; r <= iterations; ++r) {
    rounds.push_back(wl_iteration(graph, rounds.back(), r == 1, map));
  }
  return rounds;
}

FeatureVector extract_features(const CompactGraph& graph, unsigned iterations, LabelMap& map,
                               std::string instance_id, std::size_t window_index) {
  std::unordered_map<std::uint32_t, double> counts;
  VertexLabels labels = initial_labels(graph, map);
  for (const auto& l : labels) counts[l.id] += 1.0;
  for (unsigned r = 1; r <= iterations; ++r) {
    labels = wl_iteration(graph, labels, r == 1, map);
    for (const auto& l : labels) counts[l.id] += 1.0;
  }
  std::vector<SparseVector::Entry> entries;
  entries.reserve(counts.size());
  for (const auto& [id, c] : counts) entries.emplace_back(Label{id}, c);
  return FeatureVector{std::move(instance_id), window_index, SparseVector::from_entries(std::move(entries))};
}

FeatureVector extract_features(const WindowGraph& window, unsigned iterations, LabelMap& map,
                               std::string instance_id, std::size_t window_index) {
  return extract_features(compact(window), iterations, map, std::move(instance_id), window_index);
}

}  // namespace frap
