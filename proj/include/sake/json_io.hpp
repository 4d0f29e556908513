// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <vector>

#include "sake/rollout.hpp"
#include "sake/tools.hpp"

namespace sake {

// Triplets serialize as [head, relation, tail]; groups as
// {"index", "seed", "members"}.
void to_json(nlohmann::json& j, const Triplet& t);
void from_json(const nlohmann::json& j, Triplet& t);
void to_json(nlohmann::json& j, const EntityGroup& g);
void from_json(const nlohmann::json& j, EntityGroup& g);
void to_json(nlohmann::json& j, const Segment& s);
void from_json(const nlohmann::json& j, Segment& s);
void to_json(nlohmann::json& j, const RolloutConfig& c);
void from_json(const nlohmann::json& j, RolloutConfig& c);

// One trajectory document: id, query, prompt_tokens, segments (kind, id,
// text, tokens, token_count, logprobs, stop_reason), mask, parsed fields,
// answer (null when absent), config, warnings.
void to_json(nlohmann::json& j, const Trajectory& t);
void from_json(const nlohmann::json& j, Trajectory& t);

// Tool responses as served over HTTP: {"groups"|"triplets", "rendered",
// "warnings"}.
nlohmann::json tool_output_json(const ToolOutput& out);

// Newline-delimited JSON. Blank lines are skipped; parse errors carry the
// line number.
std::vector<nlohmann::json> read_ndjson(std::istream& in);
std::vector<nlohmann::json> read_ndjson_file(const std::filesystem::path& p);
void write_ndjson_line(std::ostream& out, const nlohmann::json& j);

std::vector<Trajectory> read_trajectories(const std::filesystem::path& p);

}  // namespace sake
