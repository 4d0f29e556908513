// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace sake {

// The four closing tags a well-formed rollout must contain.
inline constexpr std::array<std::string_view, 4> kRequiredClosingTags = {
    "</extract_entities>", "</filtered_groups>", "</associative_reasoning>",
    "</answer>"};

// Curriculum boundaries: steps [0, s1) reward format, [s1, s2) reward
// format * accuracy, [s2, inf) reward accuracy.
class RewardSchedule {
 public:
  static constexpr std::uint64_t kDefaultS1 = 100;
  static constexpr std::uint64_t kDefaultS2 = 300;

  // Throws std::invalid_argument unless 0 < s1 < s2.
  RewardSchedule(std::uint64_t s1 = kDefaultS1, std::uint64_t s2 = kDefaultS2);

  std::uint64_t s1() const { return s1_; }
  std::uint64_t s2() const { return s2_; }
  int phase(std::uint64_t step) const;

 private:
  std::uint64_t s1_;
  std::uint64_t s2_;
};

struct RewardBreakdown {
  int format = 0;
  int accuracy = 0;
  int phase = 1;
  int total = 0;

  bool operator==(const RewardBreakdown&) const = default;
};

// 1 iff every required closing tag occurs in the text.
int format_reward(std::string_view rollout_text);

// 1 iff the last <answer> block, normalized, equals gold.
int accuracy_reward(std::string_view rollout_text, std::string_view gold);

RewardBreakdown curriculum_reward(std::string_view rollout_text,
                                  std::string_view gold, std::uint64_t step,
                                  const RewardSchedule& schedule);

}  // namespace sake
