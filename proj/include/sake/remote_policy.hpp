// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <semaphore>

#include "sake/http_client.hpp"
#include "sake/policy.hpp"

namespace sake {

struct RemotePolicyConfig {
  std::string completions_url;  // e.g. http://host:8000/v1/completions
  std::string tokenize_url;     // optional, vLLM-style /tokenize
  std::string model;
  double temperature = 1.0;
  std::size_t max_in_flight = 8;
  HttpRetryOptions http;
};

// Client for an OpenAI-compatible text-completion endpoint. Requests carry
// the turn's stop markers, ask for per-token log-probabilities, and set
// include_stop_str_in_output. When a server strips the matched stop string
// but reports it in `stop_reason`, it is appended as a final token with
// log-probability 0.
class RemotePolicy final : public Policy {
 public:
  explicit RemotePolicy(RemotePolicyConfig config);
  ~RemotePolicy() override;

  Generation generate(const GenerationRequest& request) const override;
  std::vector<std::string> tokenize(std::string_view text) const override;
  std::string name() const override { return "remote:" + config_.model; }

 private:
  RemotePolicyConfig config_;
  HttpEndpoint completions_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

}  // namespace sake
