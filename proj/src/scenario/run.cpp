#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include "afcmem/scenario.hpp"
#include "config.hpp"
#include "workspace.hpp"

namespace afcmem {

namespace {

using scenario::Section;

struct Prepared {
  ScenarioInfo info;
  scenario::Job job;
};

Prepared prepare(const std::string& text, const std::string& origin) {
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin + ": parse error at line " + std::to_string(e.mark.line + 1) + ", column " +
                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  if (!doc.IsMap()) throw ConfigError(origin + ": expected a mapping at the top level");

  try {
    Section root(doc, "");
    Prepared p;
    p.info.name = root.text("name");
    static const std::regex slug("[a-z0-9][a-z0-9_-]*");
    if (!std::regex_match(p.info.name, slug)) root.fail("name", "use lower-case letters, digits, '-' and '_'");
    p.info.experiment = root.text("experiment");
    p.info.description = root.text("description", "");
    p.info.plots = root.flag("plots", false);
    p.info.output = root.text("output", p.info.name);
    if (p.info.output.empty() || p.info.output.find("..") != std::string::npos || p.info.output.front() == '/') {
      root.fail("output", "must be a relative directory name");
    }
    if (root.has("seed")) {
      const auto s = root.integer("seed");
      if (s < 0) root.fail("seed", "must be non-negative");
      p.info.seed = static_cast<std::uint64_t>(s);
    }
    const auto& list = scenario::experiments();
    const auto it = std::find_if(list.begin(), list.end(), [&](const auto& e) { return e.name == p.info.experiment; });
    if (it == list.end()) {
      std::string names;
      for (const auto& e : list) names += (names.empty() ? "" : ", ") + e.name;
      root.fail("experiment", "unknown experiment '" + p.info.experiment + "' (one of: " + names + ")");
    }
    p.job = it->prepare(root, p.info.seed);
    root.finish();
    return p;
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const auto& e : scenario::experiments()) out.push_back(e.name);
  std::sort(out.begin(), out.end());
  return out;
}

ScenarioInfo validate_scenario(const std::string& text, const std::string& origin) {
  return prepare(text, origin).info;
}

ScenarioInfo validate_scenario_file(const std::filesystem::path& path) {
  return validate_scenario(read_file(path), path.string());
}

RunReport run_scenario(const std::string& text, const RunOptions& options, const std::string& origin) {
  namespace fs = std::filesystem;
  auto p = prepare(text, origin);
  RunReport report;
  report.info = p.info;
  report.output_dir = options.output_root / p.info.output;

  const bool fresh_root = !fs::exists(options.output_root);
  fs::create_directories(options.output_root);
  const fs::path staging = options.output_root / ("." + p.info.output + ".partial");
  fs::remove_all(staging);
  fs::create_directories(staging);
  try {
    scenario::Workspace ws(staging, p.info.plots || options.plots);
    nlohmann::json results;
    results["scenario"] = p.info.name;
    results["experiment"] = p.info.experiment;
    results["seed"] = p.info.seed ? nlohmann::json(*p.info.seed) : nlohmann::json(nullptr);
    results["results"] = p.job(ws);
    auto artifacts = ws.artifacts();
    artifacts.push_back("results.json");
    std::sort(artifacts.begin(), artifacts.end());
    results["artifacts"] = artifacts;
    report.results_json = results.dump(2) + "\n";
    {
      std::ofstream out(staging / "results.json", std::ios::binary);
      out << report.results_json;
      if (!out) throw Error("cannot write results.json");
    }
    report.artifacts = artifacts;
    fs::remove_all(report.output_dir);
    fs::create_directories(report.output_dir.parent_path());
    fs::rename(staging, report.output_dir);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    if (fresh_root && fs::is_empty(options.output_root, ec)) fs::remove(options.output_root, ec);
    throw;
  }
  return report;
}

RunReport run_scenario_file(const std::filesystem::path& path, const RunOptions& options) {
  return run_scenario(read_file(path), options, path.string());
}

std::vector<std::filesystem::path> bundled_scenarios(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".yaml") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
  return out;
}

}  // namespace afcmem
