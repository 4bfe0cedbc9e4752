#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace frap {

enum class VertexKind { Entity, Activity, Agent };

std::string_view to_string(VertexKind kind);

/// Vertex type as `kind:subtype`, e.g. `activity:process`.
struct VertexType {
  VertexKind kind = VertexKind::Entity;
  std::string subtype;

  /// Throws UnknownVertexKind for a bad kind token, MalformedRecord otherwise.
  static VertexType parse(std::string_view text);
  std::string key() const;

  friend bool operator==(const VertexType&, const VertexType&) = default;
};

struct ProvenanceEdge {
  std::string edge_id;
  std::string relation;
  std::string src_id;
  VertexType src_type;
  std::string dst_id;
  VertexType dst_type;
  std::uint64_t seq = 0;

  friend bool operator==(const ProvenanceEdge&, const ProvenanceEdge&) = default;
};

/// (relation, source type, destination type). Vertex ids play no part.
struct TypeTriple {
  std::string relation;
  std::string src;
  std::string dst;

  friend bool operator==(const TypeTriple&, const TypeTriple&) = default;
};

struct TypeTripleHash {
  std::size_t operator()(const TypeTriple& t) const noexcept;
};

/// True when `token` can be used as a relation or subtype: non-empty, with no
/// whitespace and none of `,:;|"#`.
bool is_plain_token(std::string_view token);

/// Parses `edge_id,relation,src_id,src_kind:src_subtype,dst_id,dst_kind:dst_subtype,seq`.
/// Fields are trimmed; a field may be double-quoted (with `""` as an escaped quote)
/// to carry commas or edge whitespace in identifiers.
ProvenanceEdge parse_record(std::string_view line);

/// Canonical single-line form; parse_record(format_record(e)) == e.
std::string format_record(const ProvenanceEdge& edge);

TypeTriple edge_triple(const ProvenanceEdge& edge);

/// Pull-style reader over one instance stream. Skips blank and `#` lines and
/// enforces strictly increasing seq.
class EdgeReader {
 public:
  explicit EdgeReader(std::istream& in, std::string source_name = "<stream>");

  std::optional<ProvenanceEdge> next();
  std::size_t line_number() const { return line_no_; }

 private:
  std::istream* in_;
  std::string source_;
  std::size_t line_no_ = 0;
  std::optional<std::uint64_t> last_seq_;
  std::string buffer_;
};

/// Owns the file handle for EdgeReader.
class InstanceStream {
 public:
  explicit InstanceStream(const std::filesystem::path& path);

  std::optional<ProvenanceEdge> next() { return reader_.next(); }

 private:
  std::ifstream file_;
  EdgeReader reader_;
};

std::vector<ProvenanceEdge> read_edges(std::istream& in, std::string source_name = "<stream>");
std::vector<ProvenanceEdge> read_instance(const std::filesystem::path& path);
void write_instance(const std::filesystem::path& path, const std::vector<ProvenanceEdge>& edges);

/// `<dir>/web-3.prov` -> `web-3`.
std::string instance_name(const std::filesystem::path& path);

}  // namespace frap
