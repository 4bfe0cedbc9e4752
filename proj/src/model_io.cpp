#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "frap/errors.hpp"
#include "frap/modeling.hpp"

namespace frap {

namespace {

constexpr std::string_view kMagic = "FRAP-MODEL 1";

std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_entries(std::ostream& out, const SparseVector& v) {
  out << v.size();
  for (const auto& [label, value] : v.entries()) out << ' ' << label.id << ':' << fmt_double(value);
  out << '\n';
}

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorCode::VersionMismatch, "corrupt model file: " + what);
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string line() {
    std::string s;
    if (!std::getline(in_, s)) corrupt("unexpected end of file");
    return s;
  }

  // Reads `<tag> <rest>` and returns rest.
  std::string tagged(std::string_view tag) {
    auto s = line();
    if (s.size() < tag.size() + 1 || s.compare(0, tag.size(), tag) != 0 || s[tag.size()] != ' ') {
      corrupt("expected '" + std::string(tag) + "'");
    }
    return s.substr(tag.size() + 1);
  }

  template <typename T>
  static T number(std::string_view s) {
    T v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) corrupt("bad number '" + std::string(s) + "'");
    return v;
  }

  SparseVector entries(std::string_view tag) {
    std::istringstream ss(tagged(tag));
    std::size_t n = 0;
    std::string tok;
    if (!(ss >> tok)) corrupt("missing entry count");
    n = number<std::size_t>(tok);
    std::vector<SparseVector::Entry> entries;
    entries.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!(ss >> tok)) corrupt("short entry list");
      const auto colon = tok.find(':');
      if (colon == std::string::npos) corrupt("bad entry '" + tok + "'");
      entries.emplace_back(Label{number<std::uint32_t>(std::string_view(tok).substr(0, colon))},
                           number<double>(std::string_view(tok).substr(colon + 1)));
    }
    if (ss >> tok) corrupt("trailing entries");
    return SparseVector::from_entries(std::move(entries));
  }

 private:
  std::istream& in_;
};

}  // namespace

void write_model(std::ostream& out, const Model& model) {
  const auto& p = model.params;
  out << kMagic << '\n';
  out << "metric " << to_string(p.metric) << '\n';
  out << "epsilon " << fmt_double(p.epsilon) << '\n';
  out << "iterations " << p.iterations << '\n';
  out << "window_size " << p.window_size << '\n';
  out << "step " << p.step << '\n';
  out << "novelty_threshold " << p.novelty_threshold << '\n';
  out << "hard_cap " << p.hard_cap << '\n';
  out << "slack " << fmt_double(p.slack) << '\n';
  out << "merge_tol " << fmt_double(p.merge_tol) << '\n';
  out << "merge_gap " << fmt_double(p.merge_gap) << '\n';
  out << "seed " << p.seed << '\n';
  out << "max_iters " << p.max_iters << '\n';

  const auto keys = model.label_map ? model.label_map->keys() : std::vector<std::string>{};
  out << "labels " << keys.size() << '\n';
  for (const auto& k : keys) out << k << '\n';

  out << "vectors " << model.vectors.size() << '\n';
  for (const auto& v : model.vectors) {
    out << "instance " << v.instance_id << '\n';
    out << "window " << v.window_index << '\n';
    out << "counts ";
    write_entries(out, v.counts);
  }

  out << "clusters " << model.clusters.size() << '\n';
  for (const auto& c : model.clusters) {
    out << "radius " << fmt_double(c.radius) << '\n';
    out << "members " << c.members.size();
    for (auto m : c.members) out << ' ' << m;
    out << '\n';
    out << "centroid ";
    write_entries(out, c.centroid);
  }
  out << "end\n";
}

Model read_model(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic) || magic != kMagic) {
    throw Error(ErrorCode::VersionMismatch, "expected header '" + std::string(kMagic) + "'");
  }
  Reader r(in);
  Model m;
  auto& p = m.params;
  p.metric = [&] {
    try {
      return parse_metric(r.tagged("metric"));
    } catch (const Error&) {
      corrupt("unknown metric");
    }
  }();
  p.epsilon = Reader::number<double>(r.tagged("epsilon"));
  p.iterations = Reader::number<unsigned>(r.tagged("iterations"));
  p.window_size = Reader::number<std::size_t>(r.tagged("window_size"));
  p.step = Reader::number<std::size_t>(r.tagged("step"));
  p.novelty_threshold = Reader::number<std::size_t>(r.tagged("novelty_threshold"));
  p.hard_cap = Reader::number<std::size_t>(r.tagged("hard_cap"));
  p.slack = Reader::number<double>(r.tagged("slack"));
  p.merge_tol = Reader::number<double>(r.tagged("merge_tol"));
  p.merge_gap = Reader::number<double>(r.tagged("merge_gap"));
  p.seed = Reader::number<std::uint64_t>(r.tagged("seed"));
  p.max_iters = Reader::number<std::size_t>(r.tagged("max_iters"));

  const auto n_labels = Reader::number<std::size_t>(r.tagged("labels"));
  std::vector<std::string> keys;
  keys.reserve(n_labels);
  for (std::size_t i = 0; i < n_labels; ++i) keys.push_back(r.line());
  try {
    m.label_map = LabelMap::from_keys(std::move(keys));
  } catch (const Error& e) {
    corrupt(e.what());
  }

  const auto n_vectors = Reader::number<std::size_t>(r.tagged("vectors"));
  for (std::size_t i = 0; i < n_vectors; ++i) {
    FeatureVector v;
    v.instance_id = r.tagged("instance");
    v.window_index = Reader::number<std::size_t>(r.tagged("window"));
    v.counts = r.entries("counts");
    m.vectors.push_back(std::move(v));
  }

  const auto n_clusters = Reader::number<std::size_t>(r.tagged("clusters"));
  for (std::size_t i = 0; i < n_clusters; ++i) {
    Cluster c;
    c.radius = Reader::number<double>(r.tagged("radius"));
    std::istringstream ss(r.tagged("members"));
    std::string tok;
    if (!(ss >> tok)) corrupt("missing member count");
    const auto count = Reader::number<std::size_t>(tok);
    for (std::size_t j = 0; j < count; ++j) {
      if (!(ss >> tok)) corrupt("short member list");
      const auto idx = Reader::number<std::size_t>(tok);
      if (idx >= m.vectors.size()) corrupt("member index out of range");
      c.members.push_back(idx);
    }
    c.centroid = r.entries("centroid");
    m.clusters.push_back(std::move(c));
  }
  if (r.line() != "end") corrupt("missing end marker");

  std::vector<const SparseVector*> ptrs;
  for (const auto& v : m.vectors) ptrs.push_back(&v.counts);
  m.universe = label_union(ptrs);
  return m;
}

std::string serialize_model(const Model& model) {
  std::ostringstream out;
  write_model(out, model);
  return out.str();
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  write_model(out, model);
  if (!out) throw Error(ErrorCode::IoFailure, "write failed on " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return read_model(in);
}

}  // namespace frap
