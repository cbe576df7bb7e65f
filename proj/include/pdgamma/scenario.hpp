#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace pdgamma {

// Exit codes shared by the runner, the C API and the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitContract = 1,
  kExitParse = 2,
  kExitValidation = 3,
  kExitNumerical = 4,
};

// A config block that fails validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::optional<std::string> out_dir;  // overrides the config's "output"
  std::optional<std::uint64_t> seed;   // overrides the config's "seed"
  int threads = 0;                     // 0 keeps the current setting
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::string message;
  std::string out_dir;
};

// Parses and validates every block, runs the experiment, and writes
// <experiment>.csv and summary.json (error.json on failure) to the output
// directory. Outputs depend only on (config, seed).
RunOutcome run_config_file(const std::string& path, const RunOptions& options = {});
RunOutcome run_config_text(const std::string& text, const RunOptions& options = {});

// Parse and validation only; nothing is written.
RunOutcome validate_config_file(const std::string& path);

// Human-readable list of experiments, kernel families, potential profiles
// and micro-potential tags.
std::string catalog_listing();

}  // namespace pdgamma
