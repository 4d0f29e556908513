// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sake/embedding.hpp"
#include "sake/kg_store.hpp"

namespace sake {

// A query entity (seed) plus its nearest KG neighbors. members[0] is the
// seed; members are unique.
struct EntityGroup {
  int index = 0;  // 1-based
  std::string seed;
  std::vector<std::string> members;

  bool operator==(const EntityGroup&) const = default;
};

enum class ToolKind { entity_groups, kg_triplets };

inline constexpr std::string_view kEntityGroupsOpen = "<entity_groups>";
inline constexpr std::string_view kEntityGroupsClose = "</entity_groups>";
inline constexpr std::string_view kTripletsOpen = "<kg_triplets>";
inline constexpr std::string_view kTripletsClose = "</kg_triplets>";

struct ToolOutput {
  ToolKind kind = ToolKind::entity_groups;
  std::string rendered;
  std::variant<std::vector<EntityGroup>, std::vector<Triplet>> payload;
  std::vector<std::string> warnings;

  const std::vector<EntityGroup>& groups() const {
    return std::get<std::vector<EntityGroup>>(payload);
  }
  const std::vector<Triplet>& triplets() const {
    return std::get<std::vector<Triplet>>(payload);
  }
};

// Block grammar (byte-exact):
//   <entity_groups>\nGroup 1 (seed): seed | m2 | m3\n...</entity_groups>
//   <kg_triplets>\n(h, r, t)\n...</kg_triplets>
// An empty payload renders as the opening tag, a newline, and the closing tag.
std::string render_entity_groups(const std::vector<EntityGroup>& groups);
std::string render_triplets(const std::vector<Triplet>& triplets);

// Inverse of the renderers. Throws std::invalid_argument on text that does not
// follow the grammar.
std::vector<EntityGroup> parse_entity_groups(std::string_view block);
std::vector<Triplet> parse_triplets(std::string_view block);

// Tool 1: one group per input entity, in input order, numbered from 1.
ToolOutput tool1_construct_groups(const std::vector<std::string>& entities,
                                  const EntityIndex& index,
                                  const Encoder& encoder, std::size_t p);

// Tool 2: every edge whose head lies in one selected group and tail in a
// different selected group, deduplicated and sorted. Out-of-range selections
// are dropped with a warning.
ToolOutput tool2_retrieve_triplets(const std::vector<EntityGroup>& groups,
                                   const std::set<int>& selected,
                                   const KnowledgeGraph& kg);

}  // namespace sake
