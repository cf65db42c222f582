#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "prove/error.hpp"

namespace prove::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUnavailable = 2;
inline constexpr int kExitProtocol = 3;
inline constexpr int kExitInvalid = 4;

int exit_code_for(ErrorCode code);

// Settings shared by every command. Layered as defaults < config file <
// flags < environment.
struct CliConfig {
  std::string backend;  // empty: built-in baseline scorer
  long timeout_ms = 30000;
  int max_in_flight = 4;
  std::string windows = "1,2";
  std::size_t evidence_k = 5;
  std::string aggregator = "classifier";
  std::string model;
  std::string labels;  // label override file
  std::uint64_t seed = 0;
  int folds = 5;
  int jobs = 1;
  bool offline = false;
};

// Applies `key = value` lines; '#' starts a comment. Unknown keys are errors
// (kSchemaError).
void apply_config_text(CliConfig& config, const std::string& text, const std::string& origin);

// Runs the command line in-process. Report output goes to `out`, diagnostics
// and human summaries to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace prove::cli
