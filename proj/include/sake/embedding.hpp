// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sake/kg_store.hpp"

namespace sake {

using Embedding = std::vector<double>;

class EncoderError : public std::runtime_error {
 public:
  EncoderError(std::string label, const std::string& what)
      : std::runtime_error("encoding '" + label + "': " + what),
        label_(std::move(label)) {}

  const std::string& label() const { return label_; }

 private:
  std::string label_;
};

// Maps a label to a dense vector of fixed dimension. Implementations must be
// deterministic and return unit-norm vectors (all-zero only for the empty
// label). encode() must be safe to call concurrently.
class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::string name() const = 0;
  virtual std::vector<Embedding> encode(
      std::span<const std::string> texts) const = 0;

  Embedding encode_one(const std::string& text) const;
};

// Feature-hashing encoder: character trigrams of the padded label plus the
// whole label are hashed (seeded) into `dimension` signed buckets, then the
// vector is L2-normalized. Labels sharing substrings land close together.
class HashEncoder final : public Encoder {
 public:
  static constexpr std::size_t kDefaultDimension = 64;

  explicit HashEncoder(std::size_t dimension = kDefaultDimension,
                       std::uint64_t seed = 0);

  std::size_t dimension() const override { return dimension_; }
  std::string name() const override;
  std::vector<Embedding> encode(
      std::span<const std::string> texts) const override;

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

// Fixed lookup table of precomputed vectors (normalized on load); labels not
// in the table fall back to a HashEncoder of the same dimension.
class TableEncoder final : public Encoder {
 public:
  TableEncoder(std::size_t dimension, std::map<std::string, Embedding> table,
               std::uint64_t fallback_seed = 0);

  // JSON: {"dimension": d, "vectors": {"label": [..d numbers..], ...}}
  static TableEncoder load(const std::filesystem::path& path);

  std::size_t dimension() const override { return dimension_; }
  std::string name() const override { return "table"; }
  std::vector<Embedding> encode(
      std::span<const std::string> texts) const override;

 private:
  std::size_t dimension_;
  std::map<std::string, Embedding> table_;
  HashEncoder fallback_;
};

// Scales v to unit length in place; returns false (and leaves v zero) when
// v has zero norm.
bool l2_normalize(Embedding& v);

double dot(std::span<const double> a, std::span<const double> b);

// Materialized w(V): one unit vector per entity, rows aligned with labels,
// labels sorted ascending and unique.
class EntityIndex {
 public:
  EntityIndex() = default;
  EntityIndex(std::vector<std::string> labels, std::size_t dimension,
              std::vector<double> rows, std::string encoder_name);

  std::size_t size() const { return labels_.size(); }
  std::size_t dimension() const { return dimension_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& encoder_name() const { return encoder_name_; }
  std::span<const double> row(std::size_t i) const;
  const std::vector<double>& data() const { return rows_; }
  std::optional<std::size_t> find(const std::string& label) const;

  friend bool operator==(const EntityIndex&, const EntityIndex&) = default;

 private:
  std::vector<std::string> labels_;
  std::size_t dimension_ = 0;
  std::vector<double> rows_;
  std::string encoder_name_;
};

// Throws std::invalid_argument on an empty graph; EncoderError propagates.
EntityIndex build_index(const KnowledgeGraph& kg, const Encoder& encoder);

struct Neighbor {
  std::string label;
  double score = 0.0;

  bool operator==(const Neighbor&) const = default;
};

struct NeighborList {
  std::vector<Neighbor> neighbors;
  std::optional<std::string> warning;
};

inline constexpr std::size_t kDefaultGroupSize = 3;

// Exact top-p search by cosine similarity over the whole index. Order: score
// descending, then label ascending. A query equal (after normalization) to an
// indexed label never returns that label. p larger than the candidate count
// returns every candidate. A query encoding to the zero vector returns no
// neighbors and sets `warning`.
NeighborList top_p_similar(const EntityIndex& index, const std::string& query,
                           const Encoder& encoder, std::size_t p);

// Same search with a precomputed, unit-norm query vector.
NeighborList top_p_similar(const EntityIndex& index,
                           const std::string& normalized_query,
                           std::span<const double> query_vector,
                           std::size_t p);

}  // namespace sake
