// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sake/embedding.hpp"
#include "sake/kg_store.hpp"
#include "sake/policy.hpp"
#include "sake/prompt.hpp"
#include "sake/tools.hpp"

namespace sake {

enum class SegmentKind { model_turn, tool_output };

struct Segment {
  SegmentKind kind = SegmentKind::model_turn;
  int id = 1;  // turn id (1..3) for model turns, tool id (1..2) for tools
  std::string text;
  std::vector<std::string> tokens;
  std::vector<double> logprobs;  // model turns only, aligned with tokens
  std::optional<StopReason> stop_reason;  // model turns only

  bool operator==(const Segment&) const = default;
};

struct RolloutConfig {
  std::size_t p = kDefaultGroupSize;
  std::size_t max_tokens_per_turn = 1024;
  PipelineVariant variant = PipelineVariant::full;
  // Stop markers for turns 1..3. Turn 3 runs to end-of-sequence by default.
  std::vector<std::string> turn1_stop{std::string(kExtractClose)};
  std::vector<std::string> turn2_stop{std::string(kFilterClose)};
  std::vector<std::string> turn3_stop{};
  // Entity list used by the precomputed_retrieval variant.
  std::vector<std::string> precomputed_entities;

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  bool operator==(const RolloutConfig&) const = default;
};

struct Trajectory {
  std::string id;
  std::string query;
  std::size_t prompt_tokens = 0;  // tokens of the rendered system prompt
  std::vector<Segment> segments;
  std::vector<std::uint8_t> mask;  // 1 on model tokens, 0 on tool tokens
  std::vector<std::string> parsed_entities;
  std::set<int> parsed_group_selection;
  std::vector<EntityGroup> groups;
  std::vector<Triplet> triplets;
  std::optional<std::string> answer;
  RolloutConfig config;
  std::vector<std::string> warnings;

  std::size_t token_count() const;
  std::size_t policy_calls() const;
  // Concatenation of the model turns only; rewards are computed on this.
  std::string model_text() const;
  // Every segment, in order.
  std::string text() const;

  bool operator==(const Trajectory&) const = default;
};

// Checks the segment/mask invariants; returns an explanation on failure.
std::optional<std::string> check_mask(const Trajectory& t);

// Entities between the first <extract_entities> and the next
// </extract_entities>, split on '|', normalized, empties dropped.
std::vector<std::string> parse_entities(std::string_view turn_text);

// Group indices from the first <filtered_groups> block. Pieces that are not
// integers in 1..group_count are dropped.
std::set<int> parse_group_selection(std::string_view turn_text,
                                    std::size_t group_count);

// Content of the last <answer>...</answer> pair, lowercased and trimmed.
std::optional<std::string> extract_answer(std::string_view rollout_text);

class RolloutError : public std::runtime_error {
 public:
  RolloutError(const std::string& what, Trajectory partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}

  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

struct RolloutResources {
  const KnowledgeGraph& kg;
  const EntityIndex& index;
  const Encoder& encoder;
};

// Runs one rollout. Policy failures raise RolloutError carrying what was
// produced so far.
Trajectory run_rollout(const Policy& policy, const std::string& query,
                       const RolloutResources& resources,
                       const RolloutConfig& config, std::string id = {});

// Context the policy sees before generating the next turn.
std::string policy_context(const Trajectory& t);

}  // namespace sake
