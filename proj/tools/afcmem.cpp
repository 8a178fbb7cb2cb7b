// afcmem: run, list and check the bundled reproduction scenarios.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "afcmem/scenario.hpp"

#ifndef AFCMEM_VERSION
#define AFCMEM_VERSION "0.0.0"
#endif
#ifndef AFCMEM_SCENARIO_DIR
#define AFCMEM_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;

namespace {

enum Exit { ok = 0, usage = 1, config_error = 2, numerical_failure = 3 };

fs::path scenario_dir() {
  if (const char* env = std::getenv("AFCMEM_SCENARIO_DIR")) return env;
  return AFCMEM_SCENARIO_DIR;
}

fs::path output_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("AFCMEM_OUTPUT_ROOT")) return env;
  return "afcmem-out";
}

// A bare name picks the bundled scenario of that name.
fs::path resolve(const std::string& arg) {
  if (fs::exists(arg)) return arg;
  const auto bundled = scenario_dir() / (arg + ".yaml");
  if (arg.find('/') == std::string::npos && fs::exists(bundled)) return bundled;
  return arg;
}

template <class F>
int guarded(F&& f) {
  try {
    f();
    return ok;
  } catch (const afcmem::InvalidInput& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const afcmem::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return numerical_failure;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return numerical_failure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AFC quantum memory simulator"};
  app.require_subcommand(1);

  std::string run_path, out_flag, check_path;
  bool svg = false, quiet = false;
  auto* run = app.add_subcommand("run", "Run a scenario file (or a bundled scenario by name)");
  run->add_option("scenario", run_path, "Scenario YAML file or bundled name")->required();
  run->add_option("-o,--output", out_flag, "Output root (default $AFCMEM_OUTPUT_ROOT or ./afcmem-out)");
  run->add_flag("--svg", svg, "Also write SVG plots");
  run->add_flag("-q,--quiet", quiet, "Do not echo results.json");

  auto* list = app.add_subcommand("list", "List bundled scenarios");
  auto* check = app.add_subcommand("validate", "Check a scenario file without running it");
  check->add_option("scenario", check_path, "Scenario YAML file or bundled name")->required();
  auto* version = app.add_subcommand("version", "Print the version");

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    return guarded([&] {
      afcmem::RunOptions opt;
      opt.output_root = output_root(out_flag);
      opt.plots = svg;
      const auto report = afcmem::run_scenario_file(resolve(run_path), opt);
      if (!quiet) std::cout << report.results_json;
      std::cerr << "wrote " << report.artifacts.size() << " files to " << report.output_dir.string() << '\n';
    });
  }
  if (*list) {
    return guarded([&] {
      for (const auto& p : afcmem::bundled_scenarios(scenario_dir())) {
        const auto info = afcmem::validate_scenario_file(p);
        std::cout << info.name;
        if (!info.description.empty()) std::cout << "\t" << info.description;
        std::cout << '\n';
      }
    });
  }
  if (*check) {
    return guarded([&] {
      const auto info = afcmem::validate_scenario_file(resolve(check_path));
      std::cout << info.name << ": ok (" << info.experiment << ")\n";
    });
  }
  if (*version) {
    std::cout << "afcmem " << AFCMEM_VERSION << '\n';
    return ok;
  }
  return usage;
}
