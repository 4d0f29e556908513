// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>

#include "sake/embedding.hpp"
#include "sake/policy.hpp"

namespace sake {

// Encoder settings:
//   {"type": "hash", "dimension": 64, "seed": 0}
//   {"type": "table", "path": "vectors.json"}
//   {"type": "remote", "url": "...", "dimension": 768, "batch_size": 64,
//    "max_in_flight": 4, "max_retries": 3, "timeout_ms": 10000}
// Relative paths resolve against `base`.
std::unique_ptr<Encoder> make_encoder(const nlohmann::json& spec,
                                      const std::filesystem::path& base = {});

// Policy settings:
//   {"type": "scripted", "script": "script.json"}
//   {"type": "remote", "completions_url": "...", "model": "...",
//    "tokenize_url": "...", "temperature": 1.0, "max_in_flight": 8,
//    "max_retries": 3, "timeout_ms": 60000}
std::unique_ptr<Policy> make_policy(const nlohmann::json& spec,
                                    const std::filesystem::path& base = {});

}  // namespace sake
