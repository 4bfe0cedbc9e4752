#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "frap/ingest.hpp"

namespace frap {

/// How a motif vertex reference maps to concrete vertex ids.
enum class VertexPolicy {
  PerMotif,   // fresh for each motif instance
  PerEdge,    // fresh for each emitted edge (e.g. allocations in a loop)
  PerStream,  // one vertex shared by the whole instance stream
};

struct VertexTemplate {
  std::string ref;
  VertexType type;
  VertexPolicy policy = VertexPolicy::PerMotif;
  // When positive, each motif instance draws subtype "<subtype>-<k>" with k uniform in [0, variants).
  std::size_t variants = 0;
};

struct EdgeTemplate {
  std::string relation;
  std::string src;
  std::string dst;
  std::size_t repeat_min = 1;  // emitted a uniform number of times in [min, max]
  std::size_t repeat_max = 1;
};

struct MotifTemplate {
  std::string name;
  std::vector<VertexTemplate> vertices;
  std::vector<EdgeTemplate> edges;
};

struct Scenario {
  std::string name;
  std::size_t instances = 0;
  std::vector<MotifTemplate> normal_motifs;
  std::vector<double> weights;  // one per normal motif
  std::optional<MotifTemplate> anomaly;
  std::vector<std::size_t> anomalous;  // instance indices that carry the anomaly
  std::size_t length = 0;              // edges per instance
  std::size_t anomaly_offset = 0;      // anomaly starts at the first motif boundary at or after this edge
  std::size_t anomaly_repetitions = 1;
  std::uint64_t seed = 0;
};

/// Throws InvalidScenario.
void validate(const Scenario& scenario);

/// Deterministic in (scenario, index).
std::vector<ProvenanceEdge> generate_instance(const Scenario& scenario, std::size_t index);

/// Writes `<dir>/<scenario>-<index>.prov` for every instance and returns the paths.
std::vector<std::filesystem::path> generate_scenario(const Scenario& scenario, const std::filesystem::path& dir);

std::string instance_file_name(const Scenario& scenario, std::size_t index);

/// Includes `table1`, `homogeneous` and `novel`.
std::vector<Scenario> builtin_scenarios();
std::optional<Scenario> find_builtin(const std::string& name);

/// JSON scenario definitions for custom experiments.
Scenario parse_scenario(const std::string& json_text);
std::string scenario_to_json(const Scenario& scenario);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace frap
