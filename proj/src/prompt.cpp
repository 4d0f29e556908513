// SPDX-License-Identifier: Apache-2.0
#include "sake/prompt.hpp"

#include <stdexcept>

namespace sake {

namespace {

constexpr std::string_view kIntro =
    "You are a biomedical reasoning assistant. To answer questions, you "
    "follow a structured retrieval and reasoning process using a knowledge "
    "graph. Follow these steps exactly.\n\n";

constexpr std::string_view kExtraction =
    "Think about the question. Identify the key substantive biomedical "
    "concepts --- these are specific biological entities, diseases, "
    "molecules, or processes. Do NOT extract relational or intent words (for "
    "example, do not extract \"treatment\", \"cause\", \"effect\", \"role\", "
    "\"relationship\", \"association\", \"mechanism\", \"involvement\", "
    "\"function\").\n\n"
    "Format your response as:\n\n"
    "<think> [your reasoning about which concepts are substantive] </think>\n\n"
    "<extract_entities> concept_1 | concept_2 | ... </extract_entities>\n\n";

constexpr std::string_view kFiltering =
    "You will receive entity groups: for each concept you extracted, a set of "
    "semantically related terms from the knowledge graph.\n\n"
    "Review the groups. Keep the groups that are relevant to answering the "
    "question. Reference groups by their number.\n\n"
    "Format your response as:\n\n"
    "<think> [your reasoning about which groups to keep and why] </think>\n\n"
    "<filtered_groups> 1 | 2 | ... </filtered_groups>\n\n";

constexpr std::string_view kReasoningBullets =
    "Use these triplets to reason associatively:\n"
    "- Identify which triplet relationships are relevant to the question\n"
    "- If a direct answer is not present, construct new triplets by "
    "substituting semantically similar terms from the entity groups into "
    "existing triplet patterns. For example: if (hormone, treats, "
    "mental_disorder) is retrieved and melatonin is in the hormone group and "
    "insomnia is in the mental_disorder group, construct (melatonin, treats, "
    "insomnia) by analogy.\n"
    "- Build a rationale connecting the retrieved knowledge to the question\n\n"
    "Your answer must be a single word: yes, no, maybe, a, or b.\n\n"
    "Format your response as:\n\n"
    "<associative_reasoning> your reasoning </associative_reasoning>\n\n"
    "<answer> your answer </answer>\n\n";

constexpr std::string_view kDirectAnswer =
    "Use these triplets to answer the question directly.\n\n"
    "Your answer must be a single word: yes, no, maybe, a, or b.\n\n"
    "Format your response as:\n\n"
    "<answer> your answer </answer>\n\n";

constexpr std::string_view kFallback =
    "If no knowledge graph triplets are found, reason using the entity groups "
    "alone combined with your general knowledge.\n\n";

}  // namespace

std::string_view to_string(PipelineVariant v) {
  switch (v) {
    case PipelineVariant::full:
      return "full";
    case PipelineVariant::no_filtering:
      return "no_filtering";
    case PipelineVariant::precomputed_retrieval:
      return "precomputed_retrieval";
    case PipelineVariant::no_extrapolation:
      return "no_extrapolation";
  }
  return "full";
}

PipelineVariant parse_variant(std::string_view name) {
  for (auto v : {PipelineVariant::full, PipelineVariant::no_filtering,
                 PipelineVariant::precomputed_retrieval,
                 PipelineVariant::no_extrapolation}) {
    if (to_string(v) == name) return v;
  }
  throw std::invalid_argument("unknown pipeline variant '" + std::string(name) +
                              "'");
}

std::string render_system_prompt(std::string_view question,
                                 PipelineVariant variant) {
  std::string p(kIntro);
  switch (variant) {
    case PipelineVariant::full:
      p += "--- STEP 1: Entity Extraction ---\n\n";
      p += kExtraction;
      p += "--- STEP 2: Group Filtering ---\n\n";
      p += kFiltering;
      p += "--- STEP 3: Associative Reasoning ---\n\n";
      p += "You will receive knowledge graph triplets connecting terms across "
           "your selected groups.\n\n";
      p += kReasoningBullets;
      break;
    case PipelineVariant::no_filtering:
      p += "--- STEP 1: Entity Extraction ---\n\n";
      p += kExtraction;
      p += "--- STEP 2: Associative Reasoning ---\n\n";
      p += "You will receive entity groups: for each concept you extracted, a "
           "set of semantically related terms from the knowledge graph. You "
           "will then receive knowledge graph triplets connecting terms across "
           "all groups.\n\n";
      p += kReasoningBullets;
      break;
    case PipelineVariant::precomputed_retrieval:
      p += "--- Associative Reasoning ---\n\n";
      p += "You are given entity groups, each a set of semantically related "
           "terms from the knowledge graph, and knowledge graph triplets "
           "connecting terms across the groups.\n\n";
      p += kReasoningBullets;
      break;
    case PipelineVariant::no_extrapolation:
      p += "--- STEP 1: Entity Extraction ---\n\n";
      p += kExtraction;
      p += "--- STEP 2: Group Filtering ---\n\n";
      p += kFiltering;
      p += "--- STEP 3: Answer ---\n\n";
      p += "You will receive knowledge graph triplets connecting terms across "
           "your selected groups.\n\n";
      p += kDirectAnswer;
      break;
  }
  p += kFallback;
  p += "Question: ";
  p += question;
  p += '\n';
  return p;
}

}  // namespace sake
