// SPDX-License-Identifier: Apache-2.0
#include "sake/policy.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "sake/labels.hpp"

namespace sake {

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::stop_marker:
      return "stop_marker";
    case StopReason::end_of_sequence:
      return "end_of_sequence";
    case StopReason::token_budget:
      return "token_budget";
  }
  return "end_of_sequence";
}

StopReason parse_stop_reason(std::string_view name) {
  for (auto r : {StopReason::stop_marker, StopReason::end_of_sequence,
                 StopReason::token_budget}) {
    if (to_string(r) == name) return r;
  }
  throw std::invalid_argument("unknown stop reason '" + std::string(name) +
                              "'");
}

std::string Generation::text() const {
  std::string out;
  for (const auto& t : tokens) out += t.text;
  return out;
}

std::vector<std::string> whitespace_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t j = i;
    while (j < text.size() && is_space(text[j])) ++j;
    if (j == text.size()) {
      if (tokens.empty()) {
        tokens.emplace_back(text.substr(i));
      } else {
        tokens.back().append(text.substr(i));
      }
      break;
    }
    while (j < text.size() && !is_space(text[j])) ++j;
    tokens.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return tokens;
}

ScriptedPolicy::ScriptedPolicy(Script script) : script_(std::move(script)) {}

ScriptedPolicy::ScriptedPolicy(std::array<std::string, 3> turns)
    : script_([turns = std::move(turns)](const GenerationRequest& req) {
        return (req.turn >= 1 && req.turn <= 3)
                   ? turns[static_cast<std::size_t>(req.turn - 1)]
                   : std::string();
      }) {}

ScriptedPolicy ScriptedPolicy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const auto doc = nlohmann::json::parse(in);
  std::vector<std::string> fallback;
  if (doc.contains("turns")) fallback = doc["turns"].get<std::vector<std::string>>();
  std::map<std::string, std::vector<std::string>> by_question;
  if (doc.contains("by_question")) {
    by_question = doc["by_question"]
                      .get<std::map<std::string, std::vector<std::string>>>();
  }
  return ScriptedPolicy([fallback = std::move(fallback),
                         by_question = std::move(by_question)](
                            const GenerationRequest& req) -> std::string {
    const auto it = by_question.find(req.query);
    const auto& turns = it != by_question.end() ? it->second : fallback;
    const auto k = static_cast<std::size_t>(req.turn - 1);
    return (req.turn >= 1 && k < turns.size()) ? turns[k] : std::string();
  });
}

Generation ScriptedPolicy::generate(const GenerationRequest& request) const {
  std::string text = script_(request);
  Generation gen;
  gen.stop_reason = StopReason::end_of_sequence;

  std::size_t cut = std::string::npos;
  for (const auto& marker : request.stop_markers) {
    if (marker.empty()) continue;
    const auto pos = text.find(marker);
    if (pos != std::string::npos) cut = std::min(cut, pos + marker.size());
  }
  if (cut != std::string::npos) {
    text.resize(cut);
    gen.stop_reason = StopReason::stop_marker;
  }

  auto pieces = whitespace_tokenize(text);
  if (pieces.size() > request.max_tokens) {
    pieces.resize(request.max_tokens);
    gen.stop_reason = StopReason::token_budget;
  }
  gen.tokens.reserve(pieces.size());
  std::uint64_t h = 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(request.turn);
  for (auto& piece : pieces) {
    for (unsigned char c : piece) h = (h ^ c) * 0x100000001b3ULL;
    h ^= h >> 29;
    const double logprob = -static_cast<double>(1 + h % 1000) / 1000.0;
    gen.tokens.push_back({std::move(piece), logprob});
  }
  return gen;
}

}  // namespace sake
