#include "frap/detection.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "frap/errors.hpp"

namespace frap {

std::string format_verdict(const Verdict& v) {
  std::string out = v.instance_id + "," + std::to_string(v.window_index) + ",";
  if (v.outcome == Outcome::Anomalous) {
    out += "anomalous";
  } else {
    out += v.reclustered ? "normal-reclustered" : "normal";
  }
  out += "," + std::to_string(v.cluster) + ",";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v.distance, std::chars_format::general, 10);
  out.append(buf, ptr);
  return out;
}

FitResult fit_test(const Model& model, const SparseVector& fv) {
  FitResult nearest{false, 0, std::numeric_limits<double>::infinity()};
  FitResult covering{false, 0, std::numeric_limits<double>::infinity()};
  for (std::size_t c = 0; c < model.clusters.size(); ++c) {
    const double d = model.distance_to(fv, model.clusters[c]);
    if (d < nearest.distance) nearest = {false, c, d};
    if (d <= model.clusters[c].radius && d < covering.distance) covering = {true, c, d};
  }
  return covering.fits ? covering : nearest;
}

Verdict detect(const Model& model, const FeatureVector& fv) {
  Verdict v;
  v.instance_id = fv.instance_id;
  v.window_index = fv.window_index;
  const auto fit = fit_test(model, fv.counts);
  v.cluster = fit.cluster;
  v.distance = fit.distance;
  if (fit.fits) {
    v.outcome = Outcome::Normal;
    return v;
  }

  v.reclustered = true;
  std::vector<FeatureVector> points = model.vectors;
  points.push_back(fv);
  const std::size_t candidate = points.size() - 1;
  const auto partition = two_phase_cluster(points, model.params);
  for (const auto& group : partition.groups) {
    if (std::find(group.begin(), group.end(), candidate) == group.end()) continue;
    v.outcome = group.size() - 1 >= 2 ? Outcome::Normal : Outcome::Anomalous;
    break;
  }
  return v;
}

InstanceMonitor::InstanceMonitor(std::shared_ptr<const Model> model, std::string instance_id, MonitorOptions options)
    : model_(std::move(model)), instance_id_(std::move(instance_id)), options_(options) {
  if (!model_) throw Error(ErrorCode::InvalidArgument, "monitor needs a model");
  if (model_->params.window_size == 0) throw Error(ErrorCode::InvalidArgument, "model has no window size");
  if (options_.step == 0) throw Error(ErrorCode::InvalidArgument, "step must be positive");
  if (options_.consecutive_alarm == 0) options_.consecutive_alarm = 1;
}

void InstanceMonitor::replace_model(std::shared_ptr<const Model> model) {
  if (!model || model->params.window_size != model_->params.window_size) {
    throw Error(ErrorCode::InvalidArgument, "replacement model must keep the window size");
  }
  pending_model_ = std::move(model);
}

std::optional<Verdict> InstanceMonitor::push(const ProvenanceEdge& edge) {
  ++edges_seen_;
  buffer_.push_back(edge);
  const std::size_t w = model_->params.window_size;
  if (!window_) {
    if (buffer_.size() < w) return std::nullopt;
    window_ = WindowGraph::init(buffer_, w, options_.step);
  } else {
    if (buffer_.size() < options_.step) return std::nullopt;
    window_->advance(buffer_);
  }
  buffer_.clear();
  return evaluate();
}

Verdict InstanceMonitor::evaluate() {
  if (pending_model_) model_ = std::move(pending_model_);
  const auto& model = *model_;
  auto fv = extract_features(*window_, model.params.iterations, *model.label_map, instance_id_, windows_);
  auto v = detect(model, fv);
  v.timestamp = window_->edges().back().seq;
  ++windows_;

  if (v.outcome == Outcome::Anomalous) {
    if (++consecutive_ >= options_.consecutive_alarm) alarm_ = true;
  } else {
    consecutive_ = 0;
  }
  history_.push_back(v);
  while (history_.size() > options_.history) history_.pop_front();
  return v;
}

std::vector<Verdict> monitor(std::shared_ptr<const Model> model, std::span<const ProvenanceEdge> edges,
                             const std::string& instance_id, MonitorOptions options) {
  std::vector<Verdict> verdicts;
  if (edges.size() < model->params.window_size) {
    warn("instance '" + instance_id + "' has " + std::to_string(edges.size()) + " edges, window needs " +
         std::to_string(model->params.window_size) + "; no verdicts");
    return verdicts;
  }
  InstanceMonitor mon(std::move(model), instance_id, options);
  for (const auto& e : edges) {
    if (auto v = mon.push(e)) verdicts.push_back(std::move(*v));
  }
  return verdicts;
}

bool revision_trigger(std::span<const Verdict> verdicts, double theta) {
  std::set<std::string> all;
  std::set<std::string> anomalous;
  for (const auto& v : verdicts) {
    all.insert(v.instance_id);
    if (v.outcome == Outcome::Anomalous) anomalous.insert(v.instance_id);
  }
  if (all.empty()) return false;
  return static_cast<double>(anomalous.size()) / static_cast<double>(all.size()) > theta;
}

Model revise(const Model& model, std::vector<FeatureVector> confirmed, std::uint64_t seed) {
  if (confirmed.empty()) throw Error(ErrorCode::InvalidArgument, "revision needs at least one confirmed vector");
  std::vector<FeatureVector> vectors = model.vectors;
  for (auto& v : confirmed) vectors.push_back(std::move(v));
  auto params = model.params;
  params.seed = seed;
  return build_model(std::move(vectors), params, model.label_map);
}

}  // namespace frap
