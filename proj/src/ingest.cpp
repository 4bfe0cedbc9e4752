#include "frap/ingest.hpp"

#include <charconv>

#include "frap/errors.hpp"

namespace frap {

namespace {

constexpr std::size_t kFieldCount = 7;

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    // Skip leading whitespace of the field.
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    std::string field;
    if (pos < line.size() && line[pos] == '"') {
      ++pos;
      bool closed = false;
      while (pos < line.size()) {
        if (line[pos] == '"') {
          if (pos + 1 < line.size() && line[pos + 1] == '"') {
            field.push_back('"');
            pos += 2;
            continue;
          }
          ++pos;
          closed = true;
          break;
        }
        field.push_back(line[pos++]);
      }
      if (!closed) throw Error(ErrorCode::MalformedRecord, "unterminated quoted field");
      const auto comma = line.find(',', pos);
      const auto rest = line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
      if (!trim(rest).empty()) throw Error(ErrorCode::MalformedRecord, "text after closing quote");
      fields.push_back(std::move(field));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    } else {
      const auto comma = line.find(',', pos);
      const auto raw = line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
      fields.emplace_back(trim(raw));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
  }
  return fields;
}

bool needs_quotes(std::string_view s) {
  if (s.empty()) return true;
  if (s.front() == ' ' || s.front() == '\t' || s.back() == ' ' || s.back() == '\t') return true;
  return s.find_first_of(",\"\r\n") != std::string_view::npos || s.front() == '#';
}

std::string quote_if_needed(std::string_view s) {
  if (!needs_quotes(s)) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string_view to_string(VertexKind kind) {
  switch (kind) {
    case VertexKind::Entity: return "entity";
    case VertexKind::Activity: return "activity";
    case VertexKind::Agent: return "agent";
  }
  return "entity";
}

bool is_plain_token(std::string_view token) {
  if (token.empty()) return false;
  for (char c : token) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') return false;
    if (c == ',' || c == ':' || c == ';' || c == '|' || c == '"' || c == '#') return false;
  }
  return true;
}

VertexType VertexType::parse(std::string_view text) {
  text = trim(text);
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::MalformedRecord, "vertex type '" + std::string(text) + "' is not kind:subtype");
  }
  const auto kind = text.substr(0, colon);
  const auto subtype = text.substr(colon + 1);
  VertexType type;
  if (kind == "entity") {
    type.kind = VertexKind::Entity;
  } else if (kind == "activity") {
    type.kind = VertexKind::Activity;
  } else if (kind == "agent") {
    type.kind = VertexKind::Agent;
  } else {
    throw Error(ErrorCode::UnknownVertexKind, "'" + std::string(kind) + "'");
  }
  if (!is_plain_token(subtype)) {
    throw Error(ErrorCode::MalformedRecord, "bad vertex subtype '" + std::string(subtype) + "'");
  }
  type.subtype = std::string(subtype);
  return type;
}

std::string VertexType::key() const {
  std::string out(to_string(kind));
  out.push_back(':');
  out += subtype;
  return out;
}

std::size_t TypeTripleHash::operator()(const TypeTriple& t) const noexcept {
  const std::hash<std::string> h;
  std::size_t seed = h(t.relation);
  seed ^= h(t.src) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
  seed ^= h(t.dst) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
  return seed;
}

ProvenanceEdge parse_record(std::string_view line) {
  auto fields = split_fields(trim(line));
  if (fields.size() != kFieldCount) {
    throw Error(ErrorCode::MalformedRecord,
                "expected 7 fields, got " + std::to_string(fields.size()));
  }
  static constexpr const char* kNames[kFieldCount] = {"edge_id", "relation", "src_id", "src_type",
                                                      "dst_id",  "dst_type", "seq"};
  for (std::size_t i = 0; i < kFieldCount; ++i) {
    if (fields[i].empty()) throw Error(ErrorCode::MalformedRecord, std::string("empty ") + kNames[i]);
  }
  if (!is_plain_token(fields[1])) {
    throw Error(ErrorCode::MalformedRecord, "bad relation token '" + fields[1] + "'");
  }

  ProvenanceEdge edge;
  edge.edge_id = std::move(fields[0]);
  edge.relation = std::move(fields[1]);
  edge.src_id = std::move(fields[2]);
  edge.src_type = VertexType::parse(fields[3]);
  edge.dst_id = std::move(fields[4]);
  edge.dst_type = VertexType::parse(fields[5]);

  const auto& seq = fields[6];
  const auto* end = seq.data() + seq.size();
  auto [ptr, ec] = std::from_chars(seq.data(), end, edge.seq);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::MalformedRecord, "seq '" + seq + "' is not a non-negative integer");
  }
  return edge;
}

std::string format_record(const ProvenanceEdge& edge) {
  std::string out;
  out += quote_if_needed(edge.edge_id);
  out += ',';
  out += edge.relation;
  out += ',';
  out += quote_if_needed(edge.src_id);
  out += ',';
  out += edge.src_type.key();
  out += ',';
  out += quote_if_needed(edge.dst_id);
  out += ',';
  out += edge.dst_type.key();
  out += ',';
  out += std::to_string(edge.seq);
  return out;
}

TypeTriple edge_triple(const ProvenanceEdge& edge) {
  return TypeTriple{edge.relation, edge.src_type.key(), edge.dst_type.key()};
}

EdgeReader::EdgeReader(std::istream& in, std::string source_name)
    : in_(&in), source_(std::move(source_name)) {}

std::optional<ProvenanceEdge> EdgeReader::next() {
  while (std::getline(*in_, buffer_)) {
    ++line_no_;
    const auto line = trim(buffer_);
    if (line.empty() || line.front() == '#') continue;

    ProvenanceEdge edge;
    try {
      edge = parse_record(line);
    } catch (const Error& e) {
      throw Error(e.code(), source_ + ":" + std::to_string(line_no_) + ": " + e.what());
    }
    if (last_seq_ && edge.seq <= *last_seq_) {
      throw Error(ErrorCode::NonMonotonicSeq, source_ + ":" + std::to_string(line_no_) + ": seq " +
                                                  std::to_string(edge.seq) + " after " +
                                                  std::to_string(*last_seq_));
    }
    last_seq_ = edge.seq;
    return edge;
  }
  if (in_->bad()) throw Error(ErrorCode::IoFailure, "read failed on " + source_);
  return std::nullopt;
}

InstanceStream::InstanceStream(const std::filesystem::path& path)
    : file_(path), reader_(file_, path.string()) {
  if (!file_) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
}

std::vector<ProvenanceEdge> read_edges(std::istream& in, std::string source_name) {
  EdgeReader reader(in, std::move(source_name));
  std::vector<ProvenanceEdge> edges;
  while (auto edge = reader.next()) edges.push_back(std::move(*edge));
  return edges;
}

std::vector<ProvenanceEdge> read_instance(const std::filesystem::path& path) {
  InstanceStream stream(path);
  std::vector<ProvenanceEdge> edges;
  while (auto edge = stream.next()) edges.push_back(std::move(*edge));
  return edges;
}

void write_instance(const std::filesystem::path& path, const std::vector<ProvenanceEdge>& edges) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  for (const auto& edge : edges) out << format_record(edge) << '\n';
  if (!out) throw Error(ErrorCode::IoFailure, "write failed on " + path.string());
}

std::string instance_name(const std::filesystem::path& path) {
  return path.stem().string();
}

}  // namespace frap
