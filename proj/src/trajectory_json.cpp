// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <istream>
#include <ostream>

#include "sake/json_io.hpp"

namespace sake {

using nlohmann::json;

void to_json(json& j, const Triplet& t) {
  j = json::array({t.head, t.relation, t.tail});
}

void from_json(const json& j, Triplet& t) {
  if (!j.is_array() || j.size() != 3) {
    throw std::invalid_argument("triplet must be [head, relation, tail]");
  }
  t = {j[0].get<std::string>(), j[1].get<std::string>(),
       j[2].get<std::string>()};
}

void to_json(json& j, const EntityGroup& g) {
  j = json{{"index", g.index}, {"seed", g.seed}, {"members", g.members}};
}

void from_json(const json& j, EntityGroup& g) {
  g.index = j.at("index").get<int>();
  g.seed = j.at("seed").get<std::string>();
  g.members = j.at("members").get<std::vector<std::string>>();
}

void to_json(json& j, const Segment& s) {
  j = json{{"kind", s.kind == SegmentKind::model_turn ? "model_turn"
                                                      : "tool_output"},
           {"id", s.id},
           {"text", s.text},
           {"token_count", s.tokens.size()},
           {"tokens", s.tokens}};
  if (s.kind == SegmentKind::model_turn) {
    j["logprobs"] = s.logprobs;
    j["stop_reason"] =
        s.stop_reason ? json(std::string(to_string(*s.stop_reason))) : json();
  }
}

void from_json(const json& j, Segment& s) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "model_turn") {
    s.kind = SegmentKind::model_turn;
  } else if (kind == "tool_output") {
    s.kind = SegmentKind::tool_output;
  } else {
    throw std::invalid_argument("unknown segment kind '" + kind + "'");
  }
  s.id = j.at("id").get<int>();
  s.text = j.at("text").get<std::string>();
  s.tokens = j.at("tokens").get<std::vector<std::string>>();
  s.logprobs = j.value("logprobs", std::vector<double>{});
  s.stop_reason.reset();
  if (j.contains("stop_reason") && j["stop_reason"].is_string()) {
    s.stop_reason = parse_stop_reason(j["stop_reason"].get<std::string>());
  }
}

void to_json(json& j, const RolloutConfig& c) {
  j = json{{"p", c.p},
           {"max_tokens_per_turn", c.max_tokens_per_turn},
           {"variant", std::string(to_string(c.variant))},
           {"turn1_stop", c.turn1_stop},
           {"turn2_stop", c.turn2_stop},
           {"turn3_stop", c.turn3_stop},
           {"precomputed_entities", c.precomputed_entities}};
}

void from_json(const json& j, RolloutConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("config must be an object");
  RolloutConfig d;
  c.p = j.value("p", d.p);
  c.max_tokens_per_turn = j.value("max_tokens_per_turn", d.max_tokens_per_turn);
  c.variant = parse_variant(j.value("variant", std::string("full")));
  c.turn1_stop = j.value("turn1_stop", d.turn1_stop);
  c.turn2_stop = j.value("turn2_stop", d.turn2_stop);
  c.turn3_stop = j.value("turn3_stop", d.turn3_stop);
  c.precomputed_entities =
      j.value("precomputed_entities", d.precomputed_entities);
  c.validate();
}

void to_json(json& j, const Trajectory& t) {
  j = json{{"id", t.id},
           {"query", t.query},
           {"prompt_tokens", t.prompt_tokens},
           {"segments", t.segments},
           {"mask", t.mask},
           {"parsed_entities", t.parsed_entities},
           {"parsed_group_selection", t.parsed_group_selection},
           {"groups", t.groups},
           {"triplets", t.triplets},
           {"answer", t.answer ? json(*t.answer) : json()},
           {"config", t.config},
           {"warnings", t.warnings}};
}

void from_json(const json& j, Trajectory& t) {
  t.id = j.value("id", std::string());
  t.query = j.at("query").get<std::string>();
  t.prompt_tokens = j.value("prompt_tokens", std::size_t{0});
  t.segments = j.at("segments").get<std::vector<Segment>>();
  t.mask = j.at("mask").get<std::vector<std::uint8_t>>();
  t.parsed_entities =
      j.value("parsed_entities", std::vector<std::string>{});
  t.parsed_group_selection =
      j.value("parsed_group_selection", std::set<int>{});
  t.groups = j.value("groups", std::vector<EntityGroup>{});
  t.triplets = j.value("triplets", std::vector<Triplet>{});
  t.answer.reset();
  if (j.contains("answer") && j["answer"].is_string()) {
    t.answer = j["answer"].get<std::string>();
  }
  t.config = j.contains("config") ? j["config"].get<RolloutConfig>()
                                  : RolloutConfig{};
  t.warnings = j.value("warnings", std::vector<std::string>{});
}

json tool_output_json(const ToolOutput& out) {
  json j;
  if (out.kind == ToolKind::entity_groups) {
    j["groups"] = out.groups();
  } else {
    j["triplets"] = out.triplets();
  }
  j["rendered"] = out.rendered;
  j["warnings"] = out.warnings;
  return j;
}

std::vector<json> read_ndjson(std::istream& in) {
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": " +
                               e.what());
    }
  }
  return out;
}

std::vector<json> read_ndjson_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  try {
    return read_ndjson(in);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(p.string() + ": " + e.what());
  }
}

void write_ndjson_line(std::ostream& out, const json& j) {
  out << j.dump() << '\n';
}

std::vector<Trajectory> read_trajectories(const std::filesystem::path& p) {
  std::vector<Trajectory> out;
  std::size_t n = 0;
  for (const auto& j : read_ndjson_file(p)) {
    ++n;
    try {
      out.push_back(j.get<Trajectory>());
    } catch (const std::exception& e) {
      throw std::runtime_error(p.string() + ": record " + std::to_string(n) +
                               ": " + e.what());
    }
  }
  return out;
}

}  // namespace sake
