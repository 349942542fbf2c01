#ifndef HANKEL_PIPELINE_HPP
#define HANKEL_PIPELINE_HPP

#include "hankel/error.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hankel {

inline constexpr const char* tool_version = "0.1.0";

/// Process exit codes of the experiment commands.
enum class ExitCode : int { pass = 0, verdict_fail = 1, validation = 2, runtime = 3 };

ExitCode exit_code_for(ErrorKind kind);

struct RunOptions {
  std::string out_dir; // empty: config output.dir, then $HANKEL_OUT_DIR, then ./hankel_out
  unsigned threads = 1;
  std::optional<std::size_t> dense_cap;
  std::optional<std::uint64_t> seed; // replaces spectrum.seed (and the synthetic seed)
  bool recompute = false;            // verify: recompute instead of refusing stale artifacts
};

struct RunResult {
  int exit_code = 0;
  std::string config_hash;
  std::string summary;              // JSON document: command, hash, verdict, outputs
  std::vector<std::string> outputs; // files written, in canonical order
  std::string error;                // set for exit codes 2 and 3
};

/// Runs gen, spectrum, verify or localize on a JSON experiment config. Never
/// throws; failures are reported through the exit code and `error`.
RunResult run_command(const std::string& command, const std::string& config_json, const RunOptions& options = {});

std::uint64_t fnv1a64(std::string_view bytes);

/// 16 hex digits of FNV-1a over the canonical form of the effective config
/// (sorted keys, output section removed, seed override applied).
std::string config_hash(const std::string& config_json, const std::optional<std::uint64_t>& seed_override = {});

} // namespace hankel

#endif
