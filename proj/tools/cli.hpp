// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace sake {

// Exit codes: 0 success, 1 usage or configuration error, 2 runtime or
// backend failure. Machine-readable output goes to `out` as NDJSON,
// diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace sake
