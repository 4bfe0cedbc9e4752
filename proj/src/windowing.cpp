#include "frap/windowing.hpp"

#include "frap/errors.hpp"

namespace frap {

WindowSizer::WindowSizer(SizerOptions options) : options_(options) {
  if (options_.novelty_threshold == 0 || options_.hard_cap == 0) {
    throw Error(ErrorCode::InvalidArgument, "novelty_threshold and hard_cap must be positive");
  }
}

std::optional<std::size_t> WindowSizer::observe(const ProvenanceEdge& edge) {
  if (declared_) throw Error(ErrorCode::ObserveAfterDeclaration, "window size already declared");
  ++edges_seen_;
  if (seen_.insert(edge_triple(edge)).second) {
    since_last_novel_ = 0;
  } else {
    ++since_last_novel_;
  }
  if (since_last_novel_ == options_.novelty_threshold || edges_seen_ == options_.hard_cap) {
    declared_ = edges_seen_;
  }
  return declared_;
}

std::size_t WindowSizer::finish() {
  if (!declared_) declared_ = edges_seen_;
  return *declared_;
}

std::size_t size_window(std::span<const ProvenanceEdge> edges, SizerOptions options) {
  WindowSizer sizer(options);
  for (const auto& edge : edges) {
    if (auto w = sizer.observe(edge)) return *w;
  }
  return sizer.finish();
}

WindowGraph WindowGraph::init(std::span<const ProvenanceEdge> edges, std::size_t window_size,
                              std::size_t step) {
  if (window_size == 0) throw Error(ErrorCode::InvalidArgument, "window size must be positive");
  if (step == 0) throw Error(ErrorCode::InvalidArgument, "step must be positive");
  if (edges.size() < window_size) {
    throw Error(ErrorCode::InsufficientEdges, "need " + std::to_string(window_size) +
                                                  " edges, have " + std::to_string(edges.size()));
  }
  WindowGraph window(window_size, step);
  for (std::size_t i = 0; i < window_size; ++i) window.add_edge(edges[i]);
  return window;
}

void WindowGraph::advance(std::span<const ProvenanceEdge> incoming) {
  for (std::size_t i = 0; i < step_ && !edges_.empty(); ++i) evict_oldest();
  for (const auto& edge : incoming) add_edge(edge);
  // Incoming beyond capacity pushes out further old edges.
  while (edges_.size() > capacity_) evict_oldest();
  if (incoming.size() < step_) terminal_ = true;
  ++advances_;
}

void WindowGraph::add_edge(const ProvenanceEdge& edge) {
  edges_.push_back(edge);
  touch(edge.src_id, edge.src_type);
  touch(edge.dst_id, edge.dst_type);
}

void WindowGraph::evict_oldest() {
  const auto& edge = edges_.front();
  release(edge.src_id);
  release(edge.dst_id);
  edges_.pop_front();
}

void WindowGraph::touch(const std::string& id, const VertexType& type) {
  auto [it, inserted] = vertices_.try_emplace(id, VertexEntry{type, 0});
  ++it->second.incidence;
}

void WindowGraph::release(const std::string& id) {
  auto it = vertices_.find(id);
  if (it == vertices_.end()) return;
  if (--it->second.incidence == 0) vertices_.erase(it);
}

}  // namespace frap
