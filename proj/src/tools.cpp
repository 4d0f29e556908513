// SPDX-License-Identifier: Apache-2.0
#include "sake/tools.hpp"

#include <algorithm>
#include <charconv>

#include "sake/labels.hpp"

namespace sake {

namespace {

std::string_view strip_block(std::string_view block, std::string_view open,
                             std::string_view close) {
  if (!block.starts_with(open) || !block.ends_with(close) ||
      block.size() < open.size() + close.size() + 1 ||
      block[open.size()] != '\n') {
    throw std::invalid_argument("not a " + std::string(open) + " block");
  }
  block.remove_prefix(open.size() + 1);
  block.remove_suffix(close.size());
  return block;
}

std::vector<std::string_view> lines_of(std::string_view body) {
  std::vector<std::string_view> lines;
  while (!body.empty()) {
    const auto nl = body.find('\n');
    if (nl == std::string_view::npos) {
      throw std::invalid_argument("block line missing trailing newline");
    }
    lines.push_back(body.substr(0, nl));
    body.remove_prefix(nl + 1);
  }
  return lines;
}

std::vector<std::string> split_on(std::string_view s, std::string_view sep) {
  std::vector<std::string> parts;
  while (true) {
    const auto pos = s.find(sep);
    if (pos == std::string_view::npos) {
      parts.emplace_back(s);
      return parts;
    }
    parts.emplace_back(s.substr(0, pos));
    s.remove_prefix(pos + sep.size());
  }
}

}  // namespace

std::string render_entity_groups(const std::vector<EntityGroup>& groups) {
  std::string out(kEntityGroupsOpen);
  out += '\n';
  for (const auto& g : groups) {
    out += "Group ";
    out += std::to_string(g.index);
    out += " (";
    out += g.seed;
    out += "): ";
    for (std::size_t i = 0; i < g.members.size(); ++i) {
      if (i > 0) out += " | ";
      out += g.members[i];
    }
    out += '\n';
  }
  out += kEntityGroupsClose;
  return out;
}

std::string render_triplets(const std::vector<Triplet>& triplets) {
  std::string out(kTripletsOpen);
  out += '\n';
  for (const auto& t : triplets) {
    out += '(';
    out += t.head;
    out += ", ";
    out += t.relation;
    out += ", ";
    out += t.tail;
    out += ")\n";
  }
  out += kTripletsClose;
  return out;
}

std::vector<EntityGroup> parse_entity_groups(std::string_view block) {
  std::vector<EntityGroup> groups;
  for (auto line : lines_of(
           strip_block(block, kEntityGroupsOpen, kEntityGroupsClose))) {
    if (!line.starts_with("Group ")) {
      throw std::invalid_argument("group line must start with 'Group '");
    }
    line.remove_prefix(6);
    EntityGroup g;
    const auto [ptr, ec] =
        std::from_chars(line.data(), line.data() + line.size(), g.index);
    if (ec != std::errc{}) throw std::invalid_argument("bad group number");
    line.remove_prefix(static_cast<std::size_t>(ptr - line.data()));
    if (!line.starts_with(" (")) throw std::invalid_argument("missing seed");
    line.remove_prefix(2);
    // Labels carry no whitespace, so the first ": " ends the seed.
    const auto colon = line.find(": ");
    if (colon == std::string_view::npos || colon == 0 ||
        line[colon - 1] != ')') {
      throw std::invalid_argument("malformed seed");
    }
    g.seed = std::string(line.substr(0, colon - 1));
    g.members = split_on(line.substr(colon + 2), " | ");
    groups.push_back(std::move(g));
  }
  return groups;
}

std::vector<Triplet> parse_triplets(std::string_view block) {
  std::vector<Triplet> triplets;
  for (auto line :
       lines_of(strip_block(block, kTripletsOpen, kTripletsClose))) {
    if (!line.starts_with('(') || !line.ends_with(')')) {
      throw std::invalid_argument("triplet line must be parenthesized");
    }
    auto parts = split_on(line.substr(1, line.size() - 2), ", ");
    if (parts.size() != 3) {
      throw std::invalid_argument("triplet line needs 3 fields");
    }
    triplets.push_back(
        {std::move(parts[0]), std::move(parts[1]), std::move(parts[2])});
  }
  return triplets;
}

ToolOutput tool1_construct_groups(const std::vector<std::string>& entities,
                                  const EntityIndex& index,
                                  const Encoder& encoder, std::size_t p) {
  ToolOutput out;
  out.kind = ToolKind::entity_groups;
  std::vector<EntityGroup> groups;
  groups.reserve(entities.size());
  for (const auto& raw : entities) {
    EntityGroup g;
    g.index = static_cast<int>(groups.size()) + 1;
    g.seed = normalize_label(raw);
    g.members.push_back(g.seed);
    if (!g.seed.empty()) {
      auto found = top_p_similar(index, g.seed, encoder, p);
      if (found.warning) out.warnings.push_back(*found.warning);
      for (auto& n : found.neighbors) g.members.push_back(std::move(n.label));
    }
    groups.push_back(std::move(g));
  }
  out.rendered = render_entity_groups(groups);
  out.payload = std::move(groups);
  return out;
}

ToolOutput tool2_retrieve_triplets(const std::vector<EntityGroup>& groups,
                                   const std::set<int>& selected,
                                   const KnowledgeGraph& kg) {
  ToolOutput out;
  out.kind = ToolKind::kg_triplets;
  std::vector<int> valid;
  for (int s : selected) {
    if (s >= 1 && static_cast<std::size_t>(s) <= groups.size()) {
      valid.push_back(s);
    } else {
      out.warnings.push_back("dropped out-of-range group index " +
                             std::to_string(s));
    }
  }
  std::vector<std::set<std::string>> members;
  members.reserve(valid.size());
  for (int s : valid) {
    auto& bucket = members.emplace_back();
    for (const auto& m : groups[static_cast<std::size_t>(s - 1)].members) {
      bucket.insert(normalize_label(m));
    }
  }

  std::set<Triplet> found;
  for (std::size_t i = 0; i < valid.size(); ++i) {
    for (std::size_t j = i + 1; j < valid.size(); ++j) {
      for (auto& t : kg.edges_between(members[i], members[j])) {
        found.insert(std::move(t));
      }
      for (auto& t : kg.edges_between(members[j], members[i])) {
        found.insert(std::move(t));
      }
    }
  }
  std::vector<Triplet> triplets(found.begin(), found.end());
  out.rendered = render_triplets(triplets);
  out.payload = std::move(triplets);
  return out;
}

}  // namespace sake
