// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rough/stats.hpp"

namespace rough::cli {

enum ExitCode { ok = 0, verify_failed = 1, usage = 2, runtime = 3 };

/// Runs one subcommand. Output goes to `out` unless --out names a file.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a of the compact dump of a JSON value, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

/// Reduced-size acceptance suite used by `verify`.
std::vector<Report> verify_suite(std::uint64_t seed);

}  // namespace rough::cli
