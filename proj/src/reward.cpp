// SPDX-License-Identifier: Apache-2.0
#include "sake/reward.hpp"

#include <stdexcept>

#include "sake/rollout.hpp"

namespace sake {

RewardSchedule::RewardSchedule(std::uint64_t s1, std::uint64_t s2)
    : s1_(s1), s2_(s2) {
  if (s1_ == 0 || s1_ >= s2_) {
    throw std::invalid_argument("reward schedule needs 0 < s1 < s2 (got s1=" +
                                std::to_string(s1_) +
                                ", s2=" + std::to_string(s2_) + ")");
  }
}

int RewardSchedule::phase(std::uint64_t step) const {
  if (step < s1_) return 1;
  if (step < s2_) return 2;
  return 3;
}

int format_reward(std::string_view rollout_text) {
  int r = 1;
  for (auto tag : kRequiredClosingTags) {
    r *= rollout_text.find(tag) != std::string_view::npos ? 1 : 0;
  }
  return r;
}

int accuracy_reward(std::string_view rollout_text, std::string_view gold) {
  const auto answer = extract_answer(rollout_text);
  return answer && *answer == gold ? 1 : 0;
}

RewardBreakdown curriculum_reward(std::string_view rollout_text,
                                  std::string_view gold, std::uint64_t step,
                                  const RewardSchedule& schedule) {
  RewardBreakdown b;
  b.format = format_reward(rollout_text);
  b.accuracy = accuracy_reward(rollout_text, gold);
  b.phase = schedule.phase(step);
  switch (b.phase) {
    case 1:
      b.total = b.format;
      break;
    case 2:
      b.total = b.format * b.accuracy;
      break;
    default:
      b.total = b.accuracy;
      break;
  }
  return b;
}

}  // namespace sake
