// SPDX-License-Identifier: Apache-2.0
#include "sake/rollout.hpp"

#include <charconv>
#include <cmath>

#include "sake/labels.hpp"

namespace sake {

namespace {

std::optional<std::string_view> tagged_content(std::string_view text,
                                               std::string_view open,
                                               std::string_view close) {
  const auto start = text.find(open);
  if (start == std::string_view::npos) return std::nullopt;
  const auto body = start + open.size();
  const auto end = text.find(close, body);
  if (end == std::string_view::npos) return std::nullopt;
  return text.substr(body, end - body);
}

std::vector<std::string_view> split_pipes(std::string_view s) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto bar = s.find('|');
    parts.push_back(s.substr(0, bar));
    if (bar == std::string_view::npos) return parts;
    s.remove_prefix(bar + 1);
  }
}

class RolloutBuilder {
 public:
  RolloutBuilder(const Policy& policy, const RolloutConfig& config,
                 std::string query, std::string id)
      : policy_(policy), config_(config) {
    t_.id = std::move(id);
    t_.query = std::move(query);
    t_.config = config;
    context_ = render_system_prompt(t_.query, config.variant);
    t_.prompt_tokens = tokenize(context_).size();
  }

  const Segment& model_turn(int turn, const std::vector<std::string>& stops) {
    GenerationRequest req{context_, t_.query, turn, stops,
                          config_.max_tokens_per_turn};
    Generation gen;
    try {
      gen = policy_.generate(req);
    } catch (const std::exception& e) {
      throw RolloutError("turn " + std::to_string(turn) + ": " + e.what(), t_);
    }
    if (gen.tokens.size() > config_.max_tokens_per_turn) {
      throw RolloutError("turn " + std::to_string(turn) +
                             ": policy exceeded the token budget",
                         t_);
    }
    Segment s;
    s.kind = SegmentKind::model_turn;
    s.id = turn;
    s.stop_reason = gen.stop_reason;
    for (std::size_t i = 0; i < gen.tokens.size(); ++i) {
      auto& tok = gen.tokens[i];
      if (!std::isfinite(tok.logprob) || tok.logprob > 0.0) {
        throw RolloutError("turn " + std::to_string(turn) +
                               ": invalid log-probability at token " +
                               std::to_string(i),
                           t_);
      }
      s.text += tok.text;
      s.logprobs.push_back(tok.logprob);
      s.tokens.push_back(std::move(tok.text));
    }
    return push(std::move(s), 1);
  }

  void tool_output(int tool, const ToolOutput& out) {
    Segment s;
    s.kind = SegmentKind::tool_output;
    s.id = tool;
    s.text = "\n" + out.rendered + "\n";
    s.tokens = tokenize(s.text);
    t_.warnings.insert(t_.warnings.end(), out.warnings.begin(),
                       out.warnings.end());
    push(std::move(s), 0);
  }

  Trajectory& trajectory() { return t_; }

 private:
  std::vector<std::string> tokenize(std::string_view text) {
    try {
      return policy_.tokenize(text);
    } catch (const std::exception& e) {
      throw RolloutError(std::string("tokenizer: ") + e.what(), t_);
    }
  }

  const Segment& push(Segment s, std::uint8_t mask_value) {
    t_.mask.insert(t_.mask.end(), s.tokens.size(), mask_value);
    context_ += s.text;
    t_.segments.push_back(std::move(s));
    return t_.segments.back();
  }

  const Policy& policy_;
  const RolloutConfig& config_;
  Trajectory t_;
  std::string context_;
};

std::set<int> all_groups(std::size_t n) {
  std::set<int> s;
  for (std::size_t i = 1; i <= n; ++i) s.insert(static_cast<int>(i));
  return s;
}

}  // namespace

void RolloutConfig::validate() const {
  if (max_tokens_per_turn == 0) {
    throw std::invalid_argument("max_tokens_per_turn must be positive");
  }
}

std::size_t Trajectory::token_count() const {
  std::size_t n = 0;
  for (const auto& s : segments) n += s.tokens.size();
  return n;
}

std::size_t Trajectory::policy_calls() const {
  std::size_t n = 0;
  for (const auto& s : segments) n += s.kind == SegmentKind::model_turn;
  return n;
}

std::string Trajectory::model_text() const {
  std::string out;
  for (const auto& s : segments) {
    if (s.kind == SegmentKind::model_turn) out += s.text;
  }
  return out;
}

std::string Trajectory::text() const {
  std::string out;
  for (const auto& s : segments) out += s.text;
  return out;
}

std::optional<std::string> check_mask(const Trajectory& t) {
  if (t.mask.size() != t.token_count()) {
    return "mask length " + std::to_string(t.mask.size()) +
           " != token count " + std::to_string(t.token_count());
  }
  std::size_t pos = 0;
  for (std::size_t k = 0; k < t.segments.size(); ++k) {
    const auto& s = t.segments[k];
    const std::uint8_t want = s.kind == SegmentKind::model_turn ? 1 : 0;
    for (std::size_t i = 0; i < s.tokens.size(); ++i, ++pos) {
      if (t.mask[pos] != want) {
        return "segment " + std::to_string(k) + " token " + std::to_string(i) +
               " has mask " + std::to_string(t.mask[pos]);
      }
    }
    if (s.kind == SegmentKind::model_turn &&
        s.logprobs.size() != s.tokens.size()) {
      return "segment " + std::to_string(k) + " log-probs misaligned";
    }
  }
  return std::nullopt;
}

std::vector<std::string> parse_entities(std::string_view turn_text) {
  std::vector<std::string> out;
  const auto body = tagged_content(turn_text, kExtractOpen, kExtractClose);
  if (!body) return out;
  for (auto piece : split_pipes(*body)) {
    auto label = normalize_label(piece);
    if (!label.empty()) out.push_back(std::move(label));
  }
  return out;
}

std::set<int> parse_group_selection(std::string_view turn_text,
                                    std::size_t group_count) {
  std::set<int> out;
  const auto body = tagged_content(turn_text, kFilterOpen, kFilterClose);
  if (!body) return out;
  for (auto piece : split_pipes(*body)) {
    piece = trim(piece);
    long long value = 0;
    const auto [ptr, ec] =
        std::from_chars(piece.data(), piece.data() + piece.size(), value);
    if (ec != std::errc{} || ptr != piece.data() + piece.size()) continue;
    if (value >= 1 && static_cast<unsigned long long>(value) <= group_count) {
      out.insert(static_cast<int>(value));
    }
  }
  return out;
}

std::optional<std::string> extract_answer(std::string_view rollout_text) {
  const auto close = rollout_text.rfind(kAnswerClose);
  if (close == std::string_view::npos) return std::nullopt;
  const auto open = rollout_text.substr(0, close).rfind(kAnswerOpen);
  if (open == std::string_view::npos) return std::nullopt;
  const auto body = open + kAnswerOpen.size();
  return normalize_answer(rollout_text.substr(body, close - body));
}

std::string policy_context(const Trajectory& t) {
  return render_system_prompt(t.query, t.config.variant) + t.text();
}

Trajectory run_rollout(const Policy& policy, const std::string& query,
                       const RolloutResources& res,
                       const RolloutConfig& config, std::string id) {
  config.validate();
  RolloutBuilder b(policy, config, query, std::move(id));
  auto& t = b.trajectory();

  auto construct_groups = [&](const std::vector<std::string>& entities) {
    auto o1 = tool1_construct_groups(entities, res.index, res.encoder,
                                     config.p);
    t.groups = o1.groups();
    b.tool_output(1, o1);
  };
  auto retrieve = [&](std::set<int> selected) {
    t.parsed_group_selection = std::move(selected);
    auto o2 = tool2_retrieve_triplets(t.groups, t.parsed_group_selection,
                                      res.kg);
    t.triplets = o2.triplets();
    b.tool_output(2, o2);
  };

  switch (config.variant) {
    case PipelineVariant::full:
    case PipelineVariant::no_extrapolation: {
      const auto& y1 = b.model_turn(1, config.turn1_stop);
      t.parsed_entities = parse_entities(y1.text);
      construct_groups(t.parsed_entities);
      const auto& y2 = b.model_turn(2, config.turn2_stop);
      retrieve(parse_group_selection(y2.text, t.groups.size()));
      b.model_turn(3, config.turn3_stop);
      break;
    }
    case PipelineVariant::no_filtering: {
      const auto& y1 = b.model_turn(1, config.turn1_stop);
      t.parsed_entities = parse_entities(y1.text);
      construct_groups(t.parsed_entities);
      retrieve(all_groups(t.groups.size()));
      b.model_turn(3, config.turn3_stop);
      break;
    }
    case PipelineVariant::precomputed_retrieval: {
      for (const auto& e : config.precomputed_entities) {
        auto label = normalize_label(e);
        if (!label.empty()) t.parsed_entities.push_back(std::move(label));
      }
      construct_groups(t.parsed_entities);
      retrieve(all_groups(t.groups.size()));
      b.model_turn(3, config.turn3_stop);
      break;
    }
  }
  t.answer = extract_answer(t.model_text());
  return std::move(t);
}

}  // namespace sake
