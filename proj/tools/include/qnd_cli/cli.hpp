// Copyright 2026 The qndsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Front end for the qndsim executable. Subcommands: fidelity, cnot-sweep,
// optics, weak. A run resolves defaults < config file < flags into one JSON
// config, executes it and wraps the results in a report:
//
//   {"command", "version", "config", "results", "duration_s"}
//
// Failures print {"error": ..., "field": ...} on the error stream.

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace qnd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 2;      ///< bad input or usage
inline constexpr int kExitInvariant = 3;  ///< a module invariant failed on the results

const char* version();

/// Default config for `command`; throws qnd::Error for unknown commands.
nlohmann::json default_config(const std::string& command);

/// Runs a resolved config and returns the results payload.
nlohmann::json execute(const nlohmann::json& config);

/// Human-readable descriptions of every broken invariant (empty when clean).
std::vector<std::string> check_invariants(const nlohmann::json& config, const nlohmann::json& results);

/// Plot-ready CSV for a report's results (12 significant digits).
std::string to_csv(const nlohmann::json& config, const nlohmann::json& results);

/// Full command line, argv[0] excluded. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qnd::cli
