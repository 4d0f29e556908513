// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sake {

// One directed edge (head, relation, tail). Labels are normalized.
struct Triplet {
  std::string head;
  std::string relation;
  std::string tail;

  auto operator<=>(const Triplet&) const = default;
  bool operator==(const Triplet&) const = default;
};

struct KgStats {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::size_t relation_count = 0;

  bool operator==(const KgStats&) const = default;
};

enum class TripletFormat { tsv, csv };

TripletFormat parse_triplet_format(std::string_view name);

class IngestError : public std::runtime_error {
 public:
  IngestError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyGraphError : public std::runtime_error {
 public:
  EmptyGraphError() : std::runtime_error("knowledge graph has no triplets") {}
};

using EdgeId = std::size_t;

// Immutable knowledge graph G = (V, R, E).
//
// Edges are stored once, sorted lexicographically by (head, relation, tail),
// and an EdgeId is the position in that order. Every edge id appears in
// exactly one head bucket and one tail bucket; bucket contents are ascending.
// Entities and relations are kept as sorted vectors.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  // Labels are normalized; duplicates collapse. Throws std::invalid_argument
  // on a label that is empty after normalization.
  static KnowledgeGraph from_triplets(std::vector<Triplet> triplets);

  const std::vector<std::string>& entities() const { return entities_; }
  const std::vector<std::string>& relations() const { return relations_; }
  const std::vector<Triplet>& edges() const { return edges_; }

  std::span<const EdgeId> out_edges(const std::string& entity) const;
  std::span<const EdgeId> in_edges(const std::string& entity) const;

  bool contains_entity(const std::string& label) const;
  bool empty() const { return edges_.empty(); }

  KgStats stats() const;

  // Exactly { (h,r,t) in E : h in heads and t in tails }, ordered by
  // (head, relation, tail).
  std::vector<Triplet> edges_between(const std::set<std::string>& heads,
                                     const std::set<std::string>& tails) const;

  friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
    return a.edges_ == b.edges_ && a.entities_ == b.entities_;
  }

 private:
  std::vector<std::string> entities_;
  std::vector<std::string> relations_;
  std::vector<Triplet> edges_;
  std::unordered_map<std::string, std::vector<EdgeId>> head_index_;
  std::unordered_map<std::string, std::vector<EdgeId>> tail_index_;
};

// Reads one triplet per line. Blank lines and lines starting with '#' are
// skipped. Throws IngestError on a malformed record and EmptyGraphError when
// no records are found.
KnowledgeGraph ingest_kg(std::istream& in, TripletFormat format);
KnowledgeGraph ingest_kg_file(const std::filesystem::path& path,
                              TripletFormat format);

// TSV, one edge per line, in edge order. ingest_kg(write_kg(kg)) == kg.
void write_kg(std::ostream& out, const KnowledgeGraph& kg);

}  // namespace sake
