// SPDX-License-Identifier: Apache-2.0
#include "sake/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>

#include "sake/labels.hpp"

namespace sake {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Embedding Encoder::encode_one(const std::string& text) const {
  auto out = encode(std::span<const std::string>(&text, 1));
  if (out.size() != 1) throw EncoderError(text, "encoder returned no vector");
  return std::move(out.front());
}

bool l2_normalize(Embedding& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq == 0.0 || !std::isfinite(sq)) {
    std::fill(v.begin(), v.end(), 0.0);
    return false;
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

HashEncoder::HashEncoder(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension_ == 0) throw std::invalid_argument("encoder dimension is 0");
}

std::string HashEncoder::name() const {
  return "hash-d" + std::to_string(dimension_) + "-s" + std::to_string(seed_);
}

std::vector<Embedding> HashEncoder::encode(
    std::span<const std::string> texts) const {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    Embedding v(dimension_, 0.0);
    if (!text.empty()) {
      auto add = [&](std::string_view feature) {
        const std::uint64_t h = splitmix64(fnv1a(feature) ^ seed_);
        const double sign = (h >> 63) ? -1.0 : 1.0;
        v[h % dimension_] += sign;
      };
      const std::string padded = "#" + text + "#";
      for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
        add(std::string_view(padded).substr(i, 3));
      }
      add(padded);
      if (!l2_normalize(v)) {
        // All features cancelled out; fall back to a single seeded bucket.
        v[splitmix64(fnv1a(text) + seed_ + 1) % dimension_] = 1.0;
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

TableEncoder::TableEncoder(std::size_t dimension,
                           std::map<std::string, Embedding> table,
                           std::uint64_t fallback_seed)
    : dimension_(dimension), fallback_(dimension, fallback_seed) {
  for (auto& [label, vec] : table) {
    if (vec.size() != dimension_) {
      throw EncoderError(label, "table vector has dimension " +
                                    std::to_string(vec.size()) +
                                    ", expected " + std::to_string(dimension_));
    }
    if (!l2_normalize(vec)) throw EncoderError(label, "zero vector in table");
    table_.emplace(normalize_label(label), std::move(vec));
  }
}

TableEncoder TableEncoder::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const auto doc = nlohmann::json::parse(in);
  const auto dim = doc.at("dimension").get<std::size_t>();
  std::map<std::string, Embedding> table;
  for (const auto& [label, vec] : doc.at("vectors").items()) {
    table.emplace(label, vec.get<Embedding>());
  }
  return TableEncoder(dim, std::move(table),
                      doc.value("fallback_seed", std::uint64_t{0}));
}

std::vector<Embedding> TableEncoder::encode(
    std::span<const std::string> texts) const {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    const auto it = table_.find(text);
    out.push_back(it != table_.end() ? it->second : fallback_.encode_one(text));
  }
  return out;
}

EntityIndex::EntityIndex(std::vector<std::string> labels,
                         std::size_t dimension, std::vector<double> rows,
                         std::string encoder_name)
    : labels_(std::move(labels)),
      dimension_(dimension),
      rows_(std::move(rows)),
      encoder_name_(std::move(encoder_name)) {
  if (rows_.size() != labels_.size() * dimension_) {
    throw std::invalid_argument("index rows do not match label count");
  }
  if (!std::is_sorted(labels_.begin(), labels_.end()) ||
      std::adjacent_find(labels_.begin(), labels_.end()) != labels_.end()) {
    throw std::invalid_argument("index labels must be sorted and unique");
  }
}

std::span<const double> EntityIndex::row(std::size_t i) const {
  return std::span<const double>(rows_).subspan(i * dimension_, dimension_);
}

std::optional<std::size_t> EntityIndex::find(const std::string& label) const {
  const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

EntityIndex build_index(const KnowledgeGraph& kg, const Encoder& encoder) {
  if (kg.entities().empty()) {
    throw std::invalid_argument("cannot index an empty knowledge graph");
  }
  const auto& labels = kg.entities();
  const std::size_t dim = encoder.dimension();
  const auto vectors = encoder.encode(labels);
  if (vectors.size() != labels.size()) {
    throw EncoderError(labels.front(), "encoder returned " +
                                           std::to_string(vectors.size()) +
                                           " vectors for " +
                                           std::to_string(labels.size()) +
                                           " labels");
  }
  std::vector<double> rows;
  rows.reserve(labels.size() * dim);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& v = vectors[i];
    if (v.size() != dim) {
      throw EncoderError(labels[i], "vector has dimension " +
                                        std::to_string(v.size()) +
                                        ", expected " + std::to_string(dim));
    }
    for (double x : v) {
      if (!std::isfinite(x)) throw EncoderError(labels[i], "non-finite value");
    }
    rows.insert(rows.end(), v.begin(), v.end());
  }
  return EntityIndex(labels, dim, std::move(rows), encoder.name());
}

NeighborList top_p_similar(const EntityIndex& index, const std::string& query,
                           const Encoder& encoder, std::size_t p) {
  const auto normalized = normalize_label(query);
  if (normalized.empty()) {
    return {{}, "empty query label"};
  }
  if (p == 0) return {};
  const auto vec = encoder.encode_one(normalized);
  if (vec.size() != index.dimension()) {
    throw EncoderError(normalized, "query dimension does not match index");
  }
  return top_p_similar(index, normalized, vec, p);
}

NeighborList top_p_similar(const EntityIndex& index,
                           const std::string& normalized_query,
                           std::span<const double> query_vector,
                           std::size_t p) {
  NeighborList result;
  if (std::all_of(query_vector.begin(), query_vector.end(),
                  [](double x) { return x == 0.0; })) {
    result.warning = "query '" + normalized_query + "' encodes to zero vector";
    return result;
  }
  if (p == 0) return result;

  const auto seed = index.find(normalized_query);
  std::vector<std::size_t> order;
  std::vector<double> scores(index.size());
  order.reserve(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    scores[i] = std::clamp(dot(query_vector, index.row(i)), -1.0, 1.0);
    if (seed && *seed == i) continue;
    order.push_back(i);
  }
  const std::size_t k = std::min(p, order.size());
  // Labels are sorted, so the row index breaks ties lexicographically.
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  result.neighbors.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    result.neighbors.push_back({index.labels()[order[i]], scores[order[i]]});
  }
  return result;
}

}  // namespace sake
