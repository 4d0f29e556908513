// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sake/rollout.hpp"

namespace sake {

struct QaItem {
  std::string id;
  std::string question;
  std::string gold;  // normalized
  std::optional<std::vector<std::string>> choices;

  bool operator==(const QaItem&) const = default;
};

struct QaDataset {
  std::string name;
  std::vector<QaItem> items;

  // Throws std::invalid_argument on duplicate ids or empty gold answers.
  void validate() const;
};

// Newline-delimited {id, question, answer, choices?}; numeric ids are
// converted to strings and answers are normalized.
QaDataset load_dataset(const std::filesystem::path& path, std::string name);
QaDataset dataset_from_json(const std::vector<nlohmann::json>& records,
                            std::string name);

// Seeded shuffle (Fisher-Yates over mt19937_64), then the first
// round(n * f) items, clamped to [1, n-1], form the training split.
std::pair<QaDataset, QaDataset> split_dataset(const QaDataset& ds,
                                              double train_fraction,
                                              std::uint64_t seed);

struct TokenUsage {
  std::size_t policy_calls = 0;
  std::vector<std::size_t> per_call;  // context length of each policy call
  std::size_t total_input_tokens = 0;  // sum of per_call
  std::size_t final_context_tokens = 0;  // prompt plus every segment
};

// Input-token accounting over the policy calls of a trajectory. Call c sees
// the prompt plus every segment that precedes the c-th model turn.
TokenUsage token_accounting(const Trajectory& t, std::size_t prompt_tokens);
// Prompt measured with the whitespace tokenizer.
TokenUsage token_accounting(const Trajectory& t, std::string_view system_prompt);
// Prompt size as recorded in the trajectory.
TokenUsage token_accounting(const Trajectory& t);

struct DatasetScore {
  std::string name;
  std::size_t n = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
};

struct QuestionTokens {
  std::string dataset;
  std::string id;
  std::size_t total_input_tokens = 0;
  std::size_t final_context_tokens = 0;
};

struct EvalReport {
  std::vector<DatasetScore> per_dataset;
  double weighted_average = 0.0;  // sum(correct) / sum(n)
  double mean_total_input_tokens = 0.0;
  double mean_final_context_tokens = 0.0;
  std::vector<QuestionTokens> per_question;
};

// A trajectory answers item (ds, id) when its id is "<ds.name>/<id>", or just
// "<id>" if that id occurs in only one dataset. Items without a trajectory
// count as wrong. Throws std::invalid_argument when two trajectories map to
// one item.
EvalReport evaluate(std::span<const Trajectory> trajectories,
                    std::span<const QaDataset> datasets);

nlohmann::json to_json(const EvalReport& report);

}  // namespace sake
