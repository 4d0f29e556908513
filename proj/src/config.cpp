// SPDX-License-Identifier: Apache-2.0
#include "sake/config.hpp"

#include "sake/remote_encoder.hpp"
#include "sake/remote_policy.hpp"

namespace sake {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

HttpRetryOptions retry_options(const nlohmann::json& spec, int timeout_ms) {
  HttpRetryOptions o;
  o.max_retries = spec.value("max_retries", o.max_retries);
  o.timeout = std::chrono::milliseconds(spec.value("timeout_ms", timeout_ms));
  o.backoff = std::chrono::milliseconds(spec.value("backoff_ms", 100));
  o.bearer_token = spec.value("token", std::string());
  return o;
}

}  // namespace

std::unique_ptr<Encoder> make_encoder(const nlohmann::json& spec,
                                      const std::filesystem::path& base) {
  const auto type = spec.value("type", std::string("hash"));
  if (type == "hash") {
    return std::make_unique<HashEncoder>(
        spec.value("dimension", HashEncoder::kDefaultDimension),
        spec.value("seed", std::uint64_t{0}));
  }
  if (type == "table") {
    return std::make_unique<TableEncoder>(
        TableEncoder::load(resolve(base, spec.at("path").get<std::string>())));
  }
  if (type == "remote") {
    RemoteEncoderConfig c;
    c.url = spec.at("url").get<std::string>();
    c.dimension = spec.at("dimension").get<std::size_t>();
    c.batch_size = spec.value("batch_size", c.batch_size);
    c.max_in_flight = spec.value("max_in_flight", c.max_in_flight);
    const auto http = retry_options(spec, 10000);
    c.max_retries = http.max_retries;
    c.timeout = http.timeout;
    c.backoff = http.backoff;
    c.bearer_token = http.bearer_token;
    return std::make_unique<RemoteEncoder>(std::move(c));
  }
  throw std::invalid_argument("unknown encoder type '" + type + "'");
}

std::unique_ptr<Policy> make_policy(const nlohmann::json& spec,
                                    const std::filesystem::path& base) {
  const auto type = spec.value("type", std::string("scripted"));
  if (type == "scripted") {
    if (spec.contains("turns")) {
      const auto turns = spec["turns"].get<std::vector<std::string>>();
      std::array<std::string, 3> t;
      for (std::size_t i = 0; i < t.size() && i < turns.size(); ++i) {
        t[i] = turns[i];
      }
      return std::make_unique<ScriptedPolicy>(std::move(t));
    }
    return std::make_unique<ScriptedPolicy>(ScriptedPolicy::load(
        resolve(base, spec.at("script").get<std::string>())));
  }
  if (type == "remote") {
    RemotePolicyConfig c;
    c.completions_url = spec.at("completions_url").get<std::string>();
    c.tokenize_url = spec.value("tokenize_url", std::string());
    c.model = spec.value("model", std::string());
    c.temperature = spec.value("temperature", c.temperature);
    c.max_in_flight = spec.value("max_in_flight", c.max_in_flight);
    c.http = retry_options(spec, 60000);
    return std::make_unique<RemotePolicy>(std::move(c));
  }
  throw std::invalid_argument("unknown policy type '" + type + "'");
}

}  // namespace sake
