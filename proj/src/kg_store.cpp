// SPDX-License-Identifier: Apache-2.0
#include "sake/kg_store.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "sake/labels.hpp"

namespace sake {

namespace {

const std::vector<EdgeId> kNoEdges;

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    if (c < 0x80) {
      extra = 0;
    } else if ((c >> 5) == 0x6) {
      extra = 1;
    } else if ((c >> 4) == 0xE) {
      extra = 2;
    } else if ((c >> 3) == 0x1E) {
      extra = 3;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    }
    i += extra + 1;
  }
  return true;
}

std::vector<std::string> split_tsv(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

// RFC 4180 field splitting for a single physical line.
std::vector<std::string> split_csv(std::string_view line, std::size_t lineno) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      if (!trim(field).empty()) {
        throw IngestError(lineno, "unexpected quote inside unquoted field");
      }
      field.clear();
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else {
      if (was_quoted && !is_space(c)) {
        throw IngestError(lineno, "text after closing quote");
      }
      if (!was_quoted) field.push_back(c);
    }
  }
  if (quoted) throw IngestError(lineno, "unterminated quoted field");
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace

TripletFormat parse_triplet_format(std::string_view name) {
  if (name == "tsv") return TripletFormat::tsv;
  if (name == "csv") return TripletFormat::csv;
  throw std::invalid_argument("unknown triplet format '" + std::string(name) +
                              "' (expected tsv or csv)");
}

KnowledgeGraph KnowledgeGraph::from_triplets(std::vector<Triplet> triplets) {
  for (auto& t : triplets) {
    t.head = normalize_label(t.head);
    t.relation = normalize_label(t.relation);
    t.tail = normalize_label(t.tail);
    if (t.head.empty() || t.relation.empty() || t.tail.empty()) {
      throw std::invalid_argument("triplet has an empty label");
    }
  }
  std::sort(triplets.begin(), triplets.end());
  triplets.erase(std::unique(triplets.begin(), triplets.end()), triplets.end());

  KnowledgeGraph kg;
  kg.edges_ = std::move(triplets);

  std::set<std::string> entities;
  std::set<std::string> relations;
  for (EdgeId id = 0; id < kg.edges_.size(); ++id) {
    const auto& e = kg.edges_[id];
    entities.insert(e.head);
    entities.insert(e.tail);
    relations.insert(e.relation);
    kg.head_index_[e.head].push_back(id);
    kg.tail_index_[e.tail].push_back(id);
  }
  kg.entities_.assign(entities.begin(), entities.end());
  kg.relations_.assign(relations.begin(), relations.end());
  return kg;
}

std::span<const EdgeId> KnowledgeGraph::out_edges(
    const std::string& entity) const {
  const auto it = head_index_.find(entity);
  return it == head_index_.end() ? std::span<const EdgeId>(kNoEdges)
                                 : std::span<const EdgeId>(it->second);
}

std::span<const EdgeId> KnowledgeGraph::in_edges(
    const std::string& entity) const {
  const auto it = tail_index_.find(entity);
  return it == tail_index_.end() ? std::span<const EdgeId>(kNoEdges)
                                 : std::span<const EdgeId>(it->second);
}

bool KnowledgeGraph::contains_entity(const std::string& label) const {
  return std::binary_search(entities_.begin(), entities_.end(), label);
}

KgStats KnowledgeGraph::stats() const {
  return {entities_.size(), edges_.size(), relations_.size()};
}

std::vector<Triplet> KnowledgeGraph::edges_between(
    const std::set<std::string>& heads,
    const std::set<std::string>& tails) const {
  std::vector<EdgeId> ids;
  if (heads.empty() || tails.empty()) return {};

  // Walk whichever side has fewer incident edges.
  std::size_t out_degree = 0;
  std::size_t in_degree = 0;
  for (const auto& h : heads) out_degree += out_edges(h).size();
  for (const auto& t : tails) in_degree += in_edges(t).size();

  if (out_degree <= in_degree) {
    for (const auto& h : heads) {
      for (EdgeId id : out_edges(h)) {
        if (tails.contains(edges_[id].tail)) ids.push_back(id);
      }
    }
  } else {
    for (const auto& t : tails) {
      for (EdgeId id : in_edges(t)) {
        if (heads.contains(edges_[id].head)) ids.push_back(id);
      }
    }
  }
  // Edge ids follow lexicographic triplet order.
  std::sort(ids.begin(), ids.end());
  std::vector<Triplet> result;
  result.reserve(ids.size());
  for (EdgeId id : ids) result.push_back(edges_[id]);
  return result;
}

KnowledgeGraph ingest_kg(std::istream& in, TripletFormat format) {
  std::vector<Triplet> triplets;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (lineno == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (trim(view).empty() || trim(view).starts_with('#')) continue;
    if (!valid_utf8(view)) throw IngestError(lineno, "invalid UTF-8");

    auto fields = format == TripletFormat::tsv ? split_tsv(view)
                                               : split_csv(view, lineno);
    if (fields.size() != 3) {
      throw IngestError(lineno, "expected 3 fields, found " +
                                    std::to_string(fields.size()));
    }
    Triplet t{normalize_label(fields[0]), normalize_label(fields[1]),
              normalize_label(fields[2])};
    if (t.head.empty() || t.relation.empty() || t.tail.empty()) {
      throw IngestError(lineno, "empty label");
    }
    triplets.push_back(std::move(t));
  }
  if (in.bad()) throw std::runtime_error("read error while ingesting triplets");
  if (triplets.empty()) throw EmptyGraphError();
  return KnowledgeGraph::from_triplets(std::move(triplets));
}

KnowledgeGraph ingest_kg_file(const std::filesystem::path& path,
                              TripletFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return ingest_kg(in, format);
}

void write_kg(std::ostream& out, const KnowledgeGraph& kg) {
  for (const auto& e : kg.edges()) {
    out << e.head << '\t' << e.relation << '\t' << e.tail << '\n';
  }
}

}  // namespace sake
