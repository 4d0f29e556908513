// SPDX-License-Identifier: Apache-2.0
#include "sake/remote_policy.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

namespace sake {

namespace {

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

}  // namespace

RemotePolicy::RemotePolicy(RemotePolicyConfig config)
    : config_(std::move(config)),
      completions_(HttpEndpoint::parse(config_.completions_url)),
      in_flight_(std::make_unique<std::counting_semaphore<>>(
          static_cast<std::ptrdiff_t>(
              std::max<std::size_t>(1, config_.max_in_flight)))) {}

RemotePolicy::~RemotePolicy() = default;

Generation RemotePolicy::generate(const GenerationRequest& request) const {
  nlohmann::json body = {
      {"model", config_.model},
      {"prompt", request.context},
      {"max_tokens", request.max_tokens},
      {"temperature", config_.temperature},
      {"logprobs", 1},
      {"include_stop_str_in_output", true},
  };
  if (!request.stop_markers.empty()) body["stop"] = request.stop_markers;

  std::string raw;
  try {
    SlotGuard slot(*in_flight_);
    raw = post_json(completions_, body.dump(), config_.http);
  } catch (const HttpError& e) {
    throw PolicyError(std::string("policy backend: ") + e.what());
  }

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception& e) {
    throw PolicyError(std::string("policy backend returned invalid JSON: ") +
                      e.what());
  }
  if (!doc.contains("choices") || !doc["choices"].is_array() ||
      doc["choices"].empty()) {
    throw PolicyError("policy backend response has no choices");
  }
  const auto& choice = doc["choices"][0];
  const std::string text = choice.value("text", std::string());
  const std::string finish = choice.value("finish_reason", std::string("stop"));

  Generation gen;
  bool have_logprobs = false;
  if (choice.contains("logprobs") && choice["logprobs"].is_object()) {
    const auto& lp = choice["logprobs"];
    if (lp.contains("tokens") && lp.contains("token_logprobs") &&
        lp["tokens"].size() == lp["token_logprobs"].size()) {
      std::string joined;
      for (std::size_t i = 0; i < lp["tokens"].size(); ++i) {
        const auto tok = lp["tokens"][i].get<std::string>();
        const auto& jl = lp["token_logprobs"][i];
        double l = jl.is_number() ? jl.get<double>() : 0.0;
        if (!std::isfinite(l) || l > 0.0) l = std::isfinite(l) ? 0.0 : -1e9;
        joined += tok;
        gen.tokens.push_back({tok, l});
      }
      have_logprobs = joined == text;
    }
  }
  if (!have_logprobs) {
    gen.tokens.clear();
    for (auto& piece : whitespace_tokenize(text)) {
      gen.tokens.push_back({std::move(piece), 0.0});
    }
  }

  if (finish == "length") {
    gen.stop_reason = StopReason::token_budget;
  } else {
    gen.stop_reason = StopReason::end_of_sequence;
    for (const auto& m : request.stop_markers) {
      if (!m.empty() && text.ends_with(m)) {
        gen.stop_reason = StopReason::stop_marker;
      }
    }
    if (gen.stop_reason != StopReason::stop_marker &&
        choice.contains("stop_reason") && choice["stop_reason"].is_string()) {
      const auto matched = choice["stop_reason"].get<std::string>();
      for (const auto& m : request.stop_markers) {
        if (m == matched) {
          gen.tokens.push_back({m, 0.0});
          gen.stop_reason = StopReason::stop_marker;
          break;
        }
      }
    }
  }
  return gen;
}

std::vector<std::string> RemotePolicy::tokenize(std::string_view text) const {
  if (config_.tokenize_url.empty()) return whitespace_tokenize(text);
  nlohmann::json body = {{"model", config_.model},
                         {"prompt", std::string(text)},
                         {"add_special_tokens", false},
                         {"return_token_strs", true}};
  try {
    const auto doc = nlohmann::json::parse(post_json(
        HttpEndpoint::parse(config_.tokenize_url), body.dump(), config_.http));
    if (doc.contains("token_strs") && doc["token_strs"].is_array()) {
      return doc["token_strs"].get<std::vector<std::string>>();
    }
  } catch (const HttpError& e) {
    throw PolicyError(std::string("tokenizer backend: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw PolicyError(std::string("tokenizer backend: ") + e.what());
  }
  return whitespace_tokenize(text);
}

}  // namespace sake
