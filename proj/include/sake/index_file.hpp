// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>

#include "sake/embedding.hpp"
#include "sake/kg_store.hpp"

namespace sake {

// On-disk index: one JSON document holding the edge list and, optionally,
// the entity embedding matrix.
//   {"format": "sake-index", "version": 1,
//    "stats": {...}, "edges": [[h, r, t], ...],
//    "embedding": {"encoder", "dimension", "labels", "vectors"}}
struct IndexBundle {
  KnowledgeGraph kg;
  std::optional<EntityIndex> entities;
};

void save_index(const std::filesystem::path& path, const KnowledgeGraph& kg,
                const EntityIndex* entities);
IndexBundle load_index(const std::filesystem::path& path);

}  // namespace sake
