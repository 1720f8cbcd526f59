#pragma once

#include "altproj/diagnostics.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace altproj::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> trace;  // analyze only
  std::filesystem::path out_dir = ".";
  bool debug_iterates = false;
  std::size_t threads = 0;  // 0 = hardware concurrency
};

/// Runs one of run-etf, run-norms, convex-demo, analyze. Artifacts go to
/// options.out_dir; a one-line summary goes to `log`, errors to `err`.
int run_command(const std::string& command, const CommandOptions& options, std::ostream& log,
                std::ostream& err);

/// Thread cap from ALTPROJ_THREADS, or 0 when unset. Throws invalid-input on
/// a malformed value.
std::size_t threads_from_env();

Json to_json(const DiagnosticsReport& report);

}  // namespace altproj::cli
