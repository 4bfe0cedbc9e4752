#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frap/features.hpp"
#include "frap/modeling.hpp"
#include "frap/windowing.hpp"

namespace frap {

enum class Outcome { Normal, Anomalous };

struct Verdict {
  std::string instance_id;
  std::size_t window_index = 0;
  Outcome outcome = Outcome::Normal;
  std::size_t cluster = 0;  // covering cluster when Normal by fit, else the nearest
  double distance = 0.0;
  bool reclustered = false;     // the re-cluster fallback ran
  std::uint64_t timestamp = 0;  // seq of the newest edge in the window

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

/// `instance_id,window_index,outcome,nearest_cluster,distance` where outcome is
/// `normal`, `normal-reclustered` or `anomalous`.
std::string format_verdict(const Verdict& v);

struct FitResult {
  bool fits = false;
  std::size_t cluster = 0;
  double distance = 0.0;
};

/// Nearest cluster whose radius covers `fv` (d <= radius), or the nearest
/// cluster overall when none does. Ties go to the lowest cluster index.
FitResult fit_test(const Model& model, const SparseVector& fv);

/// Fit test, then the re-cluster fallback: both clustering phases are rerun
/// over the model vectors plus `fv`, and `fv` is Normal when it shares a
/// cluster with at least two model vectors. The model is not modified.
Verdict detect(const Model& model, const FeatureVector& fv);

struct MonitorOptions {
  std::size_t step = 1;
  std::size_t consecutive_alarm = 1;  // consecutive Anomalous windows that raise the instance alarm
  std::size_t history = 1024;
};

/// Streaming monitor for one instance. Emits a verdict once the first W edges
/// have arrived and then after every `step` further edges.
class InstanceMonitor {
 public:
  InstanceMonitor(std::shared_ptr<const Model> model, std::string instance_id, MonitorOptions options = {});

  std::optional<Verdict> push(const ProvenanceEdge& edge);

  /// Takes effect at the next window boundary. The window size must match.
  void replace_model(std::shared_ptr<const Model> model);

  bool alarm() const { return alarm_; }
  std::size_t windows() const { return windows_; }
  std::size_t edges_seen() const { return edges_seen_; }
  const std::deque<Verdict>& history() const { return history_; }
  const std::string& instance_id() const { return instance_id_; }

 private:
  Verdict evaluate();

  std::shared_ptr<const Model> model_;
  std::shared_ptr<const Model> pending_model_;
  std::string instance_id_;
  MonitorOptions options_;
  std::optional<WindowGraph> window_;
  std::vector<ProvenanceEdge> buffer_;
  std::size_t windows_ = 0;
  std::size_t edges_seen_ = 0;
  std::size_t consecutive_ = 0;
  bool alarm_ = false;
  std::deque<Verdict> history_;
};

/// Runs a monitor over a finite stream. A stream shorter than the window
/// yields no verdicts and logs a warning.
std::vector<Verdict> monitor(std::shared_ptr<const Model> model, std::span<const ProvenanceEdge> edges,
                             const std::string& instance_id, MonitorOptions options = {});

/// True when more than `theta` of the distinct instances seen in `verdicts`
/// have at least one Anomalous verdict.
bool revision_trigger(std::span<const Verdict> verdicts, double theta);

/// Rebuilds the model over its vectors plus the confirmed false positives,
/// reusing its parameters and label map. Throws InvalidArgument on an empty set.
Model revise(const Model& model, std::vector<FeatureVector> confirmed, std::uint64_t seed);

}  // namespace frap
