// SPDX-License-Identifier: Apache-2.0
#include "sake/server.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cstdlib>

#include "sake/json_io.hpp"
#include "sake/labels.hpp"
#include "sake/reward.hpp"
#include "sake/tools.hpp"

namespace sake {

namespace {

using nlohmann::json;

// Field-level request validation failure.
struct BadRequest {
  std::string field;
  std::string message;
};

HttpReply error_reply(int status, const std::string& message,
                      const std::string& field = {}) {
  json j = {{"error", message}};
  if (!field.empty()) j["field"] = field;
  return {status, j.dump()};
}

json parse_object(std::string_view body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw BadRequest{"", "body is not valid JSON"};
  if (!j.is_object()) throw BadRequest{"", "body must be a JSON object"};
  return j;
}

const json& require(const json& j, const char* field) {
  if (!j.contains(field)) {
    throw BadRequest{field, std::string("missing field '") + field + "'"};
  }
  return j[field];
}

std::string get_string(const json& j, const char* field) {
  const auto& v = require(j, field);
  if (!v.is_string()) {
    throw BadRequest{field, std::string("'") + field + "' must be a string"};
  }
  return v.get<std::string>();
}

std::uint64_t get_count(const json& j, const char* field) {
  const auto& v = require(j, field);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw BadRequest{field, std::string("'") + field +
                                "' must be a non-negative integer"};
  }
  return v.get<std::uint64_t>();
}

std::uint64_t get_count_or(const json& j, const char* field,
                           std::uint64_t fallback) {
  return j.contains(field) ? get_count(j, field) : fallback;
}

std::vector<std::string> get_strings(const json& j, const char* field) {
  const auto& v = require(j, field);
  if (!v.is_array()) {
    throw BadRequest{field, std::string("'") + field + "' must be an array"};
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) {
      throw BadRequest{std::string(field) + "[" + std::to_string(i) + "]",
                       "expected a string"};
    }
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

std::vector<EntityGroup> get_groups(const json& j) {
  const auto& v = require(j, "groups");
  if (!v.is_array()) throw BadRequest{"groups", "'groups' must be an array"};
  std::vector<EntityGroup> groups;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string where = "groups[" + std::to_string(i) + "]";
    const auto& g = v[i];
    if (!g.is_object()) throw BadRequest{where, "expected an object"};
    EntityGroup group;
    if (!g.contains("index") || !g["index"].is_number_integer()) {
      throw BadRequest{where + ".index", "expected an integer"};
    }
    group.index = g["index"].get<int>();
    if (!g.contains("seed") || !g["seed"].is_string()) {
      throw BadRequest{where + ".seed", "expected a string"};
    }
    group.seed = g["seed"].get<std::string>();
    if (!g.contains("members") || !g["members"].is_array()) {
      throw BadRequest{where + ".members", "expected an array of strings"};
    }
    for (const auto& m : g["members"]) {
      if (!m.is_string()) {
        throw BadRequest{where + ".members", "expected an array of strings"};
      }
      group.members.push_back(m.get<std::string>());
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

template <typename F>
HttpReply guarded(F&& handler) {
  try {
    return handler();
  } catch (const BadRequest& e) {
    return error_reply(400, e.message, e.field);
  } catch (const json::exception& e) {
    return error_reply(400, e.what());
  } catch (const std::invalid_argument& e) {
    return error_reply(400, e.what());
  } catch (const std::exception& e) {
    return error_reply(500, e.what());
  }
}

}  // namespace

void ServerConfig::validate() const {
  if (concurrency_limit == 0) {
    throw std::invalid_argument("concurrency_limit must be positive");
  }
  if (max_request_bytes == 0) {
    throw std::invalid_argument("max_request_bytes must be positive");
  }
  if (port < 0 || port > 65535) throw std::invalid_argument("bad port");
  rollout.validate();
}

ServerConfig ServerConfig::from_json(const json& j,
                                     const std::filesystem::path& base) {
  ServerConfig c;
  c.host = j.value("host", c.host);
  c.port = j.value("port", c.port);
  if (j.contains("index")) {
    std::filesystem::path p(j["index"].get<std::string>());
    c.index_path = p.is_relative() && !base.empty() ? base / p : p;
  }
  if (j.contains("encoder")) c.encoder = j["encoder"];
  if (j.contains("policy")) c.policy = j["policy"];
  if (j.contains("rollout")) c.rollout = j["rollout"].get<RolloutConfig>();
  if (j.contains("p")) c.rollout.p = j["p"].get<std::size_t>();
  c.concurrency_limit = j.value("concurrency_limit", c.concurrency_limit);
  c.max_request_bytes = j.value("max_request_bytes", c.max_request_bytes);
  c.auth_token = j.value("auth_token", c.auth_token);
  c.validate();
  return c;
}

void ServerConfig::apply_environment() {
  if (const char* bind = std::getenv("SAKE_BIND")) {
    const std::string s(bind);
    const auto colon = s.rfind(':');
    if (colon == std::string::npos) {
      host = s;
    } else {
      host = s.substr(0, colon);
      port = std::stoi(s.substr(colon + 1));
    }
  }
  if (const char* index = std::getenv("SAKE_INDEX")) index_path = index;
  if (const char* token = std::getenv("SAKE_AUTH_TOKEN")) auth_token = token;
}

ToolService::ToolService(const KnowledgeGraph& kg, const EntityIndex& index,
                         const Encoder& encoder, const Policy* policy,
                         RolloutConfig defaults)
    : kg_(kg),
      index_(index),
      encoder_(encoder),
      policy_(policy),
      defaults_(std::move(defaults)) {}

HttpReply ToolService::tool1(std::string_view body) const {
  return guarded([&] {
    const auto j = parse_object(body);
    const auto entities = get_strings(j, "entities");
    const auto p = get_count_or(j, "p", defaults_.p);
    const auto out = tool1_construct_groups(entities, index_, encoder_,
                                            static_cast<std::size_t>(p));
    return HttpReply{200, tool_output_json(out).dump()};
  });
}

HttpReply ToolService::tool2(std::string_view body) const {
  return guarded([&] {
    const auto j = parse_object(body);
    const auto groups = get_groups(j);
    const auto& sel = require(j, "selected");
    if (!sel.is_array()) {
      throw BadRequest{"selected", "'selected' must be an array of integers"};
    }
    std::set<int> selected;
    for (const auto& s : sel) {
      if (!s.is_number_integer()) {
        throw BadRequest{"selected", "'selected' must be an array of integers"};
      }
      selected.insert(s.get<int>());
    }
    const auto out = tool2_retrieve_triplets(groups, selected, kg_);
    return HttpReply{200, tool_output_json(out).dump()};
  });
}

HttpReply ToolService::reward(std::string_view body) const {
  return guarded([&] {
    const auto j = parse_object(body);
    const auto text = get_string(j, "text");
    const auto gold = normalize_answer(get_string(j, "gold"));
    const auto step = get_count(j, "step");
    const auto s1 = get_count_or(j, "s1", RewardSchedule::kDefaultS1);
    const auto s2 = get_count_or(j, "s2", RewardSchedule::kDefaultS2);
    if (s1 == 0 || s1 >= s2) {
      throw BadRequest{"s1", "schedule needs 0 < s1 < s2"};
    }
    const auto r = curriculum_reward(text, gold, step, RewardSchedule(s1, s2));
    return HttpReply{200, json{{"format", r.format},
                               {"accuracy", r.accuracy},
                               {"phase", r.phase},
                               {"total", r.total}}
                              .dump()};
  });
}

HttpReply ToolService::rollout(std::string_view body) const {
  return guarded([&] {
    const auto j = parse_object(body);
    const auto question = get_string(j, "question");
    RolloutConfig cfg = defaults_;
    if (j.contains("config")) {
      try {
        cfg = j["config"].get<RolloutConfig>();
      } catch (const std::exception& e) {
        throw BadRequest{"config", e.what()};
      }
    }
    const auto id = j.value("id", std::string());
    if (policy_ == nullptr) {
      return error_reply(503, "no policy backend configured");
    }
    try {
      const auto t =
          run_rollout(*policy_, question, {kg_, index_, encoder_}, cfg, id);
      return HttpReply{200, json(t).dump()};
    } catch (const RolloutError& e) {
      json err = {{"error", e.what()}, {"partial", e.partial()}};
      return HttpReply{502, err.dump()};
    }
  });
}

HttpReply ToolService::healthz() const {
  const auto s = kg_.stats();
  return {200, json{{"status", "ok"},
                    {"stats",
                     {{"node_count", s.node_count},
                      {"edge_count", s.edge_count},
                      {"relation_count", s.relation_count}}},
                    {"entities_indexed", index_.size()},
                    {"encoder", encoder_.name()},
                    {"policy", policy_ ? json(policy_->name()) : json()}}
                   .dump()};
}

ToolServer::ToolServer(const ToolService& service, const ServerConfig& config)
    : service_(service),
      config_(config),
      http_(std::make_unique<httplib::Server>()) {
  config_.validate();
  const std::size_t threads = config_.concurrency_limit + 2;
  http_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  http_->set_payload_max_length(config_.max_request_bytes);

  using Handler = std::function<HttpReply(const httplib::Request&)>;
  auto route = [this](Handler h) {
    return [this, h = std::move(h)](const httplib::Request& req,
                                    httplib::Response& res) {
      if (!config_.auth_token.empty() && req.path != "/healthz" &&
          req.get_header_value("Authorization") !=
              "Bearer " + config_.auth_token) {
        const auto r = error_reply(401, "missing or invalid bearer token");
        res.status = r.status;
        res.set_content(r.body, "application/json");
        return;
      }
      const auto active = ++in_flight_;
      HttpReply r;
      if (active > config_.concurrency_limit) {
        r = error_reply(429, "too many concurrent requests");
      } else {
        r = h(req);
      }
      --in_flight_;
      res.status = r.status;
      res.set_content(r.body, "application/json");
    };
  };

  http_->Post("/tool1", route([this](const httplib::Request& req) {
                return service_.tool1(req.body);
              }));
  http_->Post("/tool2", route([this](const httplib::Request& req) {
                return service_.tool2(req.body);
              }));
  http_->Post("/reward", route([this](const httplib::Request& req) {
                return service_.reward(req.body);
              }));
  http_->Post("/rollout", route([this](const httplib::Request& req) {
                return service_.rollout(req.body);
              }));
  http_->Get("/healthz", route([this](const httplib::Request&) {
               return service_.healthz();
             }));
  http_->set_logger([](const httplib::Request& req,
                       const httplib::Response& res) {
    spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
  });
}

ToolServer::~ToolServer() { stop(); }

int ToolServer::bind() {
  int port = config_.port;
  if (port == 0) {
    port = http_->bind_to_any_port(config_.host);
  } else if (!http_->bind_to_port(config_.host, port)) {
    port = -1;
  }
  if (port < 0) {
    throw std::runtime_error("cannot bind " + config_.host + ":" +
                             std::to_string(config_.port));
  }
  return port;
}

void ToolServer::listen() { http_->listen_after_bind(); }

void ToolServer::stop() {
  if (http_) http_->stop();
}

void ToolServer::wait_until_ready() const { http_->wait_until_ready(); }

}  // namespace sake
