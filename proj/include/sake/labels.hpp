// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace sake {

// Canonical form for entity and relation labels: ASCII-lowercased, trimmed,
// and with every internal whitespace run collapsed to a single '_'.
// A normalized label never contains whitespace.
std::string normalize_label(std::string_view raw);

// Lowercase + trim, internal whitespace kept. Used for answers.
std::string normalize_answer(std::string_view raw);

std::string_view trim(std::string_view s);

bool is_space(char c);

}  // namespace sake
