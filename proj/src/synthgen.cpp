#include "frap/synthgen.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "frap/errors.hpp"
#include "json.hpp"

namespace frap {

namespace {

// Own sampling helpers: std distributions are not portable across standard libraries.
std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t pick_weighted(std::mt19937_64& rng, const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double target = unit(rng) * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    target -= weights[i];
    if (target < 0.0) return i;
  }
  return weights.size() - 1;
}

void validate_motif(const MotifTemplate& m) {
  if (m.name.empty()) throw Error(ErrorCode::InvalidScenario, "motif without a name");
  if (m.edges.empty()) throw Error(ErrorCode::InvalidScenario, "motif '" + m.name + "' has no edges");
  std::map<std::string, int> refs;
  for (const auto& v : m.vertices) {
    if (v.ref.empty() || !refs.emplace(v.ref, 0).second) {
      throw Error(ErrorCode::InvalidScenario, "motif '" + m.name + "' has an empty or duplicate vertex ref");
    }
  }
  for (const auto& e : m.edges) {
    if (!is_plain_token(e.relation)) throw Error(ErrorCode::InvalidScenario, "bad relation '" + e.relation + "'");
    if (!refs.contains(e.src) || !refs.contains(e.dst)) {
      throw Error(ErrorCode::InvalidScenario, "motif '" + m.name + "' references an undeclared vertex");
    }
    if (e.repeat_min < 1 || e.repeat_max < e.repeat_min) {
      throw Error(ErrorCode::InvalidScenario, "motif '" + m.name + "' has a bad repeat range");
    }
  }
}

class Emitter {
 public:
  Emitter(std::mt19937_64& rng, std::size_t limit) : rng_(rng), limit_(limit) {}

  bool full() const { return edges.size() >= limit_; }

  void emit(const MotifTemplate& motif) {
    const std::size_t instance = motif_counter_++;
    std::map<std::string, const VertexTemplate*> refs;
    std::map<std::string, VertexType> types;
    for (const auto& v : motif.vertices) {
      refs[v.ref] = &v;
      VertexType t = v.type;
      if (v.variants > 0) t.subtype += "-" + std::to_string(below(rng_, v.variants));
      types.emplace(v.ref, std::move(t));
    }
    const std::string prefix = motif.name + "-" + std::to_string(instance) + ".";

    for (const auto& et : motif.edges) {
      const std::size_t span = et.repeat_max - et.repeat_min + 1;
      const std::size_t times = et.repeat_min + static_cast<std::size_t>(below(rng_, span));
      for (std::size_t r = 0; r < times && !full(); ++r) {
        ProvenanceEdge e;
        e.seq = edges.size() + 1;
        e.edge_id = "e" + std::to_string(e.seq);
        e.relation = et.relation;
        const auto& src = *refs.at(et.src);
        const auto& dst = *refs.at(et.dst);
        e.src_id = vertex_id(prefix, src, e.seq);
        e.src_type = types.at(et.src);
        e.dst_id = vertex_id(prefix, dst, e.seq);
        e.dst_type = types.at(et.dst);
        edges.push_back(std::move(e));
      }
    }
  }

  std::vector<ProvenanceEdge> edges;

 private:
  static std::string vertex_id(const std::string& prefix, const VertexTemplate& v, std::uint64_t seq) {
    switch (v.policy) {
      case VertexPolicy::PerStream: return v.ref;
      case VertexPolicy::PerEdge: return prefix + v.ref + "-" + std::to_string(seq);
      case VertexPolicy::PerMotif: break;
    }
    return prefix + v.ref;
  }

  std::mt19937_64& rng_;
  std::size_t limit_;
  std::size_t motif_counter_ = 0;
};

std::size_t min_edges(const MotifTemplate& m) {
  std::size_t n = 0;
  for (const auto& e : m.edges) n += e.repeat_min;
  return n;
}

}  // namespace

void validate(const Scenario& s) {
  if (s.instances == 0) throw Error(ErrorCode::InvalidScenario, "scenario has no instances");
  if (s.length == 0) throw Error(ErrorCode::InvalidScenario, "stream length must be positive");
  if (s.normal_motifs.empty()) throw Error(ErrorCode::InvalidScenario, "scenario has no normal motifs");
  if (s.weights.size() != s.normal_motifs.size()) {
    throw Error(ErrorCode::InvalidScenario, "one weight per normal motif required");
  }
  double total = 0.0;
  for (double w : s.weights) {
    if (!(w >= 0.0)) throw Error(ErrorCode::InvalidScenario, "negative motif weight");
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidScenario, "motif weights sum to zero");
  for (const auto& m : s.normal_motifs) validate_motif(m);
  if (s.anomaly) validate_motif(*s.anomaly);
  for (auto i : s.anomalous) {
    if (i >= s.instances) throw Error(ErrorCode::InvalidScenario, "anomalous index " + std::to_string(i) + " out of range");
  }
  if (!s.anomalous.empty()) {
    if (!s.anomaly) throw Error(ErrorCode::InvalidScenario, "anomalous instances without an anomaly motif");
    if (s.anomaly_repetitions == 0) throw Error(ErrorCode::InvalidScenario, "anomaly repetitions must be positive");
    if (s.anomaly_offset >= s.length) {
      throw Error(ErrorCode::InvalidScenario, "anomaly offset " + std::to_string(s.anomaly_offset) +
                                                  " beyond stream length " + std::to_string(s.length));
    }
  }
}

std::vector<ProvenanceEdge> generate_instance(const Scenario& s, std::size_t index) {
  validate(s);
  if (index >= s.instances) throw Error(ErrorCode::InvalidScenario, "instance index out of range");

  std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);

  // Plan enough motif instances to fill the stream, then permute them.
  std::size_t shortest = SIZE_MAX;
  for (const auto& m : s.normal_motifs) shortest = std::min(shortest, min_edges(m));
  const std::size_t slots = s.length / std::max<std::size_t>(shortest, 1) + 1;
  std::vector<std::size_t> plan(slots);
  for (auto& p : plan) p = pick_weighted(rng, s.weights);
  for (std::size_t i = plan.size(); i > 1; --i) std::swap(plan[i - 1], plan[below(rng, i)]);

  const bool anomalous = std::find(s.anomalous.begin(), s.anomalous.end(), index) != s.anomalous.end();
  bool injected = false;
  Emitter out(rng, s.length);
  for (auto p : plan) {
    if (out.full()) break;
    if (anomalous && !injected && out.edges.size() >= s.anomaly_offset) {
      for (std::size_t r = 0; r < s.anomaly_repetitions && !out.full(); ++r) out.emit(*s.anomaly);
      injected = true;
    }
    out.emit(s.normal_motifs[p]);
  }
  return std::move(out.edges);
}

std::string instance_file_name(const Scenario& scenario, std::size_t index) {
  return scenario.name + "-" + std::to_string(index) + ".prov";
}

std::vector<std::filesystem::path> generate_scenario(const Scenario& scenario, const std::filesystem::path& dir) {
  validate(scenario);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());
  std::vector<std::filesystem::path> paths;
  for (std::size_t i = 0; i < scenario.instances; ++i) {
    auto path = dir / instance_file_name(scenario, i);
    write_instance(path, generate_instance(scenario, i));
    paths.push_back(std::move(path));
  }
  return paths;
}

// ---------------------------------------------------------------------------
// Built-in scenarios: a request-serving web application.

namespace {

VertexTemplate vt(std::string ref, std::string_view type, VertexPolicy policy = VertexPolicy::PerMotif,
                  std::size_t variants = 0) {
  return {std::move(ref), VertexType::parse(type), policy, variants};
}

MotifTemplate request_motif() {
  return {"request",
          {vt("w", "activity:process"), vt("sock", "entity:socket"), vt("page", "entity:file"),
           vt("log", "entity:file"), vt("resp", "entity:socket")},
          {{"used", "w", "sock"},
           {"used", "w", "page"},
           {"wasGeneratedBy", "log", "w"},
           {"wasGeneratedBy", "resp", "w"}}};
}

MotifTemplate static_motif() {
  return {"static",
          {vt("w", "activity:process"), vt("sock", "entity:socket"), vt("asset", "entity:file"),
           vt("resp", "entity:socket")},
          {{"used", "w", "sock"}, {"used", "w", "asset"}, {"wasGeneratedBy", "resp", "w"}}};
}

MotifTemplate session_motif() {
  return {"session",
          {vt("w", "activity:process"), vt("sock", "entity:socket"), vt("old", "entity:file"),
           vt("new", "entity:file"), vt("resp", "entity:socket")},
          {{"used", "w", "sock"},
           {"used", "w", "old"},
           {"wasGeneratedBy", "new", "w"},
           {"wasDerivedFrom", "new", "old"},
           {"wasGeneratedBy", "resp", "w"}}};
}

// Operator maintenance touching one of many configuration kinds: rare, scattered labels.
MotifTemplate admin_motif() {
  return {"admin",
          {vt("w", "activity:process"), vt("conf", "entity:config", VertexPolicy::PerMotif, 100),
           vt("op", "agent:operator")},
          {{"used", "w", "conf"}, {"wasAssociatedWith", "w", "op"}}};
}

// Unbounded allocation loop ahead of an out-of-memory crash.
MotifTemplate memory_growth_motif() {
  return {"memgrowth",
          {vt("w", "activity:process"), vt("sock", "entity:socket"), vt("mem", "entity:memory", VertexPolicy::PerEdge)},
          {{"used", "w", "sock"}, {"wasGeneratedBy", "mem", "w", 100, 140}}};
}

// Batch export job: a behaviour absent from the web workload.
MotifTemplate export_motif() {
  return {"export",
          {vt("w", "activity:process"), vt("db", "entity:file"), vt("dump", "entity:archive"),
           vt("svc", "agent:service")},
          {{"used", "w", "db"},
           {"wasGeneratedBy", "dump", "w"},
           {"wasDerivedFrom", "dump", "db"},
           {"wasAssociatedWith", "w", "svc"}}};
}

}  // namespace

std::vector<Scenario> builtin_scenarios() {
  Scenario table1;
  table1.name = "table1";
  table1.instances = 10;
  table1.normal_motifs = {request_motif(), static_motif(), session_motif(), admin_motif()};
  table1.weights = {0.55, 0.25, 0.1, 0.5};
  table1.anomaly = memory_growth_motif();
  table1.anomalous = {7};
  table1.length = 1200;
  table1.anomaly_offset = 150;
  table1.anomaly_repetitions = 4;
  table1.seed = 2017;

  Scenario homogeneous = table1;
  homogeneous.name = "homogeneous";
  homogeneous.anomaly.reset();
  homogeneous.anomalous.clear();

  Scenario novel = table1;
  novel.name = "novel";
  novel.instances = 3;
  novel.normal_motifs = {export_motif()};
  novel.weights = {1.0};
  novel.anomaly.reset();
  novel.anomalous.clear();

  return {table1, homogeneous, novel};
}

std::optional<Scenario> find_builtin(const std::string& name) {
  for (auto& s : builtin_scenarios()) {
    if (s.name == name) return s;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using nlohmann::json;

std::string_view policy_name(VertexPolicy p) {
  switch (p) {
    case VertexPolicy::PerMotif: return "motif";
    case VertexPolicy::PerEdge: return "edge";
    case VertexPolicy::PerStream: return "stream";
  }
  return "motif";
}

VertexPolicy parse_policy(const std::string& s) {
  if (s == "motif") return VertexPolicy::PerMotif;
  if (s == "edge") return VertexPolicy::PerEdge;
  if (s == "stream") return VertexPolicy::PerStream;
  throw Error(ErrorCode::InvalidScenario, "unknown vertex policy '" + s + "'");
}

json motif_json(const MotifTemplate& m) {
  json j;
  j["name"] = m.name;
  j["vertices"] = json::array();
  for (const auto& v : m.vertices) {
    json jv{{"ref", v.ref}, {"type", v.type.key()}, {"policy", policy_name(v.policy)}};
    if (v.variants > 0) jv["variants"] = v.variants;
    j["vertices"].push_back(std::move(jv));
  }
  j["edges"] = json::array();
  for (const auto& e : m.edges) {
    j["edges"].push_back({{"relation", e.relation},
                          {"src", e.src},
                          {"dst", e.dst},
                          {"repeat_min", e.repeat_min},
                          {"repeat_max", e.repeat_max}});
  }
  return j;
}

MotifTemplate motif_from(const json& j) {
  MotifTemplate m;
  m.name = j.at("name").get<std::string>();
  for (const auto& v : j.at("vertices")) {
    m.vertices.push_back({v.at("ref").get<std::string>(), VertexType::parse(v.at("type").get<std::string>()),
                          parse_policy(v.value("policy", std::string("motif"))),
                          v.value("variants", std::size_t{0})});
  }
  for (const auto& e : j.at("edges")) {
    EdgeTemplate t{e.at("relation").get<std::string>(), e.at("src").get<std::string>(),
                   e.at("dst").get<std::string>()};
    t.repeat_min = e.value("repeat_min", std::size_t{1});
    t.repeat_max = e.value("repeat_max", t.repeat_min);
    m.edges.push_back(std::move(t));
  }
  return m;
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["instances"] = s.instances;
  j["normal_motifs"] = json::array();
  for (const auto& m : s.normal_motifs) j["normal_motifs"].push_back(motif_json(m));
  j["weights"] = s.weights;
  if (s.anomaly) j["anomaly"] = motif_json(*s.anomaly);
  j["anomalous"] = s.anomalous;
  j["length"] = s.length;
  j["anomaly_offset"] = s.anomaly_offset;
  j["anomaly_repetitions"] = s.anomaly_repetitions;
  j["seed"] = s.seed;
  return j.dump(2);
}

Scenario parse_scenario(const std::string& json_text) {
  try {
    const auto j = json::parse(json_text);
    Scenario s;
    s.name = j.at("name").get<std::string>();
    s.instances = j.at("instances").get<std::size_t>();
    for (const auto& m : j.at("normal_motifs")) s.normal_motifs.push_back(motif_from(m));
    s.weights = j.at("weights").get<std::vector<double>>();
    if (j.contains("anomaly")) s.anomaly = motif_from(j.at("anomaly"));
    s.anomalous = j.value("anomalous", std::vector<std::size_t>{});
    s.length = j.at("length").get<std::size_t>();
    s.anomaly_offset = j.value("anomaly_offset", std::size_t{0});
    s.anomaly_repetitions = j.value("anomaly_repetitions", std::size_t{1});
    s.seed = j.value("seed", std::uint64_t{0});
    validate(s);
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidScenario, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidScenario) throw;
    throw Error(ErrorCode::InvalidScenario, e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace frap
