#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace blockctm::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs the `blockctm` command line; `args[0]` is the program name.
/// Usage errors print help to `err` and return kExitUsage; runtime
/// failures print one JSON line `{"error": kind, "message": text}` to
/// `err` and return kExitRuntime.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Model directory for `serve`: the flag when given, else the
/// BLOCKCTM_MODEL_DIR environment variable, else "models".
[[nodiscard]] std::string resolve_model_dir(const std::string& flag_value);

}  // namespace blockctm::app
