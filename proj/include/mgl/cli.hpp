#pragma once

// Command-line front end: sigma, verify, simulate and walk-spec.
// Exit codes: 0 pass, 1 hypothesis failure, 2 input error, 3 internal
// invariant violation.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mgl/io.hpp"

namespace mgl::cli {

enum ExitCode : int {
  kExitPass = 0,
  kExitHypothesisFailure = 1,
  kExitInputError = 2,
  kExitViolation = 3,
};

enum class OutputFormat { json, human, csv };

inline constexpr std::size_t kDefaultEnumerationLimit = std::size_t{1} << 20;
inline constexpr const char* kEnumerationLimitEnv = "MGL_ENUM_LIMIT";

struct RunConfig {
  std::string command;
  std::optional<std::string> input_path;
  OutputFormat output_format = OutputFormat::json;
  std::optional<std::uint64_t> seed;
  double tolerance = 1e-12;
  std::size_t enumeration_limit = kDefaultEnumerationLimit;
  std::optional<std::string> out_path;
};

/// The --limit flag wins over the environment, which wins over the default.
/// Throws InputError on a malformed or zero value.
std::size_t resolve_enumeration_limit(std::optional<std::size_t> flag, const char* env_value);

struct CommandResult {
  io::Json report;
  int exit_code = kExitPass;
  std::optional<std::string> csv;  // set by commands with a tabular form
};

CommandResult cmd_sigma(const io::Json& doc, const RunConfig& config);

/// Selectors: classify, transform, stopped, optional-stopping, upcrossing,
/// pythagoras, tower, kolmogorov, tail-bound, convergence.
CommandResult cmd_verify(const io::Json& doc, std::string_view theorem, const RunConfig& config);

struct SimulateOptions {
  std::string model;  // walk | doubling
  std::size_t horizon = 10;
  std::string p = "1/2";
  std::size_t n_paths = 100000;
  std::string functional = "terminal";  // walk only
  std::size_t levels = 1;
  std::int64_t entry = 10;
  std::string exit_rule = "rebound";  // rebound | return
  std::size_t max_steps = 0;
  std::size_t workers = 0;  // 0: hardware concurrency
  bool exact = false;       // add the enumerated value and z-score
};

CommandResult cmd_simulate(const SimulateOptions& options, const RunConfig& config);

struct WalkSpecOptions {
  std::size_t horizon = 2;
  std::string p = "1/2";
  std::string strategy = "none";     // none | doubling: the emitted process
  std::string predictable = "none";  // none | doubling: attached predictable sequence
  std::optional<std::string> stop;   // stopping rule on the emitted process
  bool censor = true;                // never-hitting paths stop at N rather than NEVER
};

io::Json walk_spec(const WalkSpecOptions& options);

/// Parses `args` (without the program name), runs the command and writes
/// the report. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// JSON text with doubles at 17 significant digits and a trailing newline.
std::string dump_json(const io::Json& doc);

/// One "path: value" line per leaf, numbers formatted as in dump_json.
std::string render_human(const io::Json& doc);

}  // namespace mgl::cli
