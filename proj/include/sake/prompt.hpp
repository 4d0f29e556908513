// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace sake {

// Pipeline shapes. `full` is the three-turn pipeline; the others drop or
// replace one stage.
enum class PipelineVariant {
  full,
  no_filtering,           // Tool 1 groups go straight to Tool 2
  precomputed_retrieval,  // both tool blocks precede a single model turn
  no_extrapolation,       // final turn answers without associative reasoning
};

std::string_view to_string(PipelineVariant v);
PipelineVariant parse_variant(std::string_view name);

inline constexpr std::string_view kExtractOpen = "<extract_entities>";
inline constexpr std::string_view kExtractClose = "</extract_entities>";
inline constexpr std::string_view kFilterOpen = "<filtered_groups>";
inline constexpr std::string_view kFilterClose = "</filtered_groups>";
inline constexpr std::string_view kReasoningOpen = "<associative_reasoning>";
inline constexpr std::string_view kReasoningClose = "</associative_reasoning>";
inline constexpr std::string_view kAnswerOpen = "<answer>";
inline constexpr std::string_view kAnswerClose = "</answer>";

// System prompt for the given variant with the question substituted. The
// result ends with "Question: <question>\n"; model turns and tool blocks are
// appended directly after it.
std::string render_system_prompt(std::string_view question,
                                 PipelineVariant variant);

}  // namespace sake
