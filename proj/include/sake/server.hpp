// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>

#include "sake/embedding.hpp"
#include "sake/kg_store.hpp"
#include "sake/policy.hpp"
#include "sake/rollout.hpp"

namespace httplib {
class Server;
}

namespace sake {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path index_path;
  nlohmann::json encoder = {{"type", "hash"}};
  std::optional<nlohmann::json> policy;  // enables POST /rollout
  RolloutConfig rollout;                 // defaults for /rollout
  std::size_t concurrency_limit = 16;
  std::size_t max_request_bytes = 1 << 20;
  std::string auth_token;  // empty: no auth

  void validate() const;

  // Keys: host, port, index, encoder, policy, rollout, p, concurrency_limit,
  // max_request_bytes, auth_token. Relative paths resolve against `base`.
  static ServerConfig from_json(const nlohmann::json& j,
                                const std::filesystem::path& base = {});
  // SAKE_BIND=host:port, SAKE_INDEX=path, SAKE_AUTH_TOKEN=token.
  void apply_environment();
};

struct HttpReply {
  int status = 200;
  std::string body;
};

// Request handling without the transport. Bodies are the JSON documents
// produced by the library (tool_output_json, trajectory JSON), dumped
// compactly, so a response is byte-identical to a direct library call.
class ToolService {
 public:
  ToolService(const KnowledgeGraph& kg, const EntityIndex& index,
              const Encoder& encoder, const Policy* policy,
              RolloutConfig defaults);

  HttpReply tool1(std::string_view body) const;
  HttpReply tool2(std::string_view body) const;
  HttpReply reward(std::string_view body) const;
  HttpReply rollout(std::string_view body) const;
  HttpReply healthz() const;

 private:
  const KnowledgeGraph& kg_;
  const EntityIndex& index_;
  const Encoder& encoder_;
  const Policy* policy_;
  RolloutConfig defaults_;
};

// HTTP/1.1 front end for ToolService. Requests beyond the concurrency limit
// get 429; bodies over the size limit get 413; stop() drains in-flight
// requests.
class ToolServer {
 public:
  ToolServer(const ToolService& service, const ServerConfig& config);
  ~ToolServer();

  // Returns the bound port; throws std::runtime_error on failure.
  int bind();
  // Blocks until stop().
  void listen();
  void stop();
  void wait_until_ready() const;

 private:
  const ToolService& service_;
  ServerConfig config_;
  std::unique_ptr<httplib::Server> http_;
  std::atomic<std::size_t> in_flight_{0};
};

}  // namespace sake
