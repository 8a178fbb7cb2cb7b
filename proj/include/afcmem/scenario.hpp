#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "afcmem/errors.hpp"

namespace afcmem {

/// Malformed or schema-violating scenario file. The message names the field
/// path and, when known, the line and column.
class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

struct ScenarioInfo {
  std::string name;
  std::string experiment;
  std::string description;
  std::optional<std::uint64_t> seed;
  bool plots = false;
  std::string output;  // directory below the output root
};

struct RunOptions {
  std::filesystem::path output_root = "afcmem-out";
  bool plots = false;  // forces SVGs on
};

struct RunReport {
  ScenarioInfo info;
  std::filesystem::path output_dir;
  std::string results_json;
  std::vector<std::string> artifacts;
};

/// Experiment kinds a scenario can name, sorted.
std::vector<std::string> experiment_names();

/// Full schema check without running anything.
ScenarioInfo validate_scenario(const std::string& text, const std::string& origin = "<string>");
ScenarioInfo validate_scenario_file(const std::filesystem::path& path);

/// Runs a scenario and writes results.json plus its CSV (and SVG) artifacts
/// into output_root / info.output. Nothing is left behind on failure.
RunReport run_scenario(const std::string& text, const RunOptions& options, const std::string& origin = "<string>");
RunReport run_scenario_file(const std::filesystem::path& path, const RunOptions& options);

/// *.yaml files in `dir`, sorted by file name.
std::vector<std::filesystem::path> bundled_scenarios(const std::filesystem::path& dir);

}  // namespace afcmem
