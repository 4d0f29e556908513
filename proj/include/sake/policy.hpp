// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sake {

enum class StopReason { stop_marker, end_of_sequence, token_budget };

std::string_view to_string(StopReason r);
StopReason parse_stop_reason(std::string_view name);

struct GenerationRequest {
  std::string context;  // everything the policy conditions on
  std::string query;
  int turn = 1;
  std::vector<std::string> stop_markers;  // empty: run to end-of-sequence
  std::size_t max_tokens = 1024;
};

struct GeneratedToken {
  std::string text;
  double logprob = 0.0;
};

struct Generation {
  std::vector<GeneratedToken> tokens;
  StopReason stop_reason = StopReason::end_of_sequence;

  std::string text() const;
};

class PolicyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Splits text into pieces matching \s*\S+, with trailing whitespace folded
// into the last piece. Concatenating the pieces reproduces the input.
std::vector<std::string> whitespace_tokenize(std::string_view text);

// The generation side of the policy. A turn ends on the first stop marker
// (which is emitted as part of the output), at end-of-sequence, or when
// max_tokens tokens have been produced. Log-probabilities are finite and <= 0.
// generate() and tokenize() must be safe to call concurrently.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual Generation generate(const GenerationRequest& request) const = 0;

  // Tokenizer used to size injected tool blocks.
  virtual std::vector<std::string> tokenize(std::string_view text) const {
    return whitespace_tokenize(text);
  }

  virtual std::string name() const = 0;
};

// Deterministic table-driven policy for tests and demos. The script yields
// the full text the model "would" write for a turn; generation truncates it
// after the first stop marker and at the token budget. Log-probabilities are
// a fixed hash of (turn, position, token).
class ScriptedPolicy final : public Policy {
 public:
  using Script = std::function<std::string(const GenerationRequest&)>;

  explicit ScriptedPolicy(Script script);
  explicit ScriptedPolicy(std::array<std::string, 3> turns);

  // JSON: {"turns": [t1, t2, t3], "by_question": {"<question>": [t1, t2, t3]}}
  // Either key may be omitted; a missing turn produces an empty generation.
  static ScriptedPolicy load(const std::filesystem::path& path);

  Generation generate(const GenerationRequest& request) const override;
  std::string name() const override { return "scripted"; }

 private:
  Script script_;
};

}  // namespace sake
