#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"

namespace afcmem::scenario {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

std::string render_svg(const Plot& plot);

/// Staging directory of one run. Artifacts are registered by name so the
/// results file can list them.
class Workspace {
 public:
  Workspace(std::filesystem::path dir, bool plots) : dir_(std::move(dir)), plots_(plots) {}

  std::filesystem::path file(const std::string& name);
  void plot(const std::string& name, const Plot& p);
  void text(const std::string& name, const std::string& content);

  const std::vector<std::string>& artifacts() const { return artifacts_; }

 private:
  std::filesystem::path dir_;
  bool plots_;
  std::vector<std::string> artifacts_;
};

using Job = std::function<nlohmann::json(Workspace&)>;

struct Experiment {
  std::string name;
  /// Reads and checks the experiment's blocks; the returned job does the work.
  std::function<Job(Section&, std::optional<std::uint64_t> seed)> prepare;
};

const std::vector<Experiment>& experiments();

}  // namespace afcmem::scenario
