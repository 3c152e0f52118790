#pragma once

// Front end for the afp tool: experiment configs (JSON file and/or flags),
// dispatch to the core library, and the artifact directory layout
// (manifest.json, results, verification_matrix.json).

#include "afp/json_format.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace afp::cli {

enum ExitCode : int { kPass = 0, kCheckFailed = 1, kConfigError = 2, kNumericalFailure = 3 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ParamKind { Real, Integer, Text, Boolean, RealList };

struct ParamSpec {
  std::string key;
  ParamKind kind;
  Json fallback;
  std::string help;
};

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<ParamSpec> params;
};

const std::vector<CommandSpec>& commands();
const CommandSpec& command_spec(const std::string& name);

struct Config {
  std::string command;
  std::filesystem::path output_dir = "afp_output";
  std::uint64_t seed = 7;
  int threads = 1;
  Json params = Json::object();  // every key of the command, resolved

  Json to_json() const;
};

/// Defaults for `command`, then the document (a config or a manifest written by
/// a previous run), then flag overrides given as raw strings keyed by JSON key.
/// Unknown keys and ill-typed values throw ConfigError.
Config resolve_config(const std::string& command, const Json& document,
                      const std::vector<std::pair<std::string, std::string>>& overrides);

/// Converts one flag value to the JSON type the key expects.
Json parse_value(const ParamSpec& spec, const std::string& raw);

struct Check {
  std::string id;
  std::string statement;
  bool asserted = true;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  double margin = 0.0;  // positive when passing
};

struct Outcome {
  Json results = Json::object();
  std::vector<Check> checks;
  std::vector<std::string> artifacts;  // relative to the output directory
  bool numerical_failure = false;
  std::string diagnostics;

  void check(std::string id, std::string statement, bool passed, double value, double threshold,
             double margin, bool asserted = true);
};

/// Runs one experiment and writes its artifacts. Progress goes to `log`.
int run(const Config& config, std::ostream& log);

/// Argument parsing plus run; returns the process exit status.
int main(int argc, char** argv);

}  // namespace afp::cli
