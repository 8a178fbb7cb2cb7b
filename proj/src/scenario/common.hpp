#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "afcmem/comb.hpp"
#include "afcmem/photon_stats.hpp"
#include "afcmem/propagation.hpp"
#include "afcmem/scenario.hpp"
#include "afcmem/sequencer.hpp"
#include "config.hpp"
#include "workspace.hpp"

namespace afcmem::scenario {

using json = nlohmann::json;

std::uint64_t need_seed(const Section& s, std::optional<std::uint64_t> seed, const std::string& why);

/// Re-raises a module precondition failure as a config error at `path`.
template <class F>
void check(const std::string& path, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

CombSpec parse_comb(Section& parent, const std::string& key);

struct TimeGrid {
  std::size_t samples = 65536;
  double dt = 50e-12;
  /// Response grid whose spacing matches the DFT bins.
  FrequencyGrid response_grid() const;
};
TimeGrid parse_time_grid(Section& parent, const std::string& key);

ComplexResponse comb_response(const CombSpec& spec, const TimeGrid& tg);

struct SequencePlan {
  std::vector<Phase> phases;
  RuleSet rules;
};
/// Phases default to the storage sequence of the experiment.
SequencePlan parse_sequence(Section& s);

struct CountingPlan {
  CountingSetup setup;
  TimeWindow signal;      // relative to echo_time
  TimeWindow background;  // absolute
};
CountingPlan parse_counting(Section& parent, const std::string& key, SourceKind default_kind);

/// Simulates counts with acquisition = live time, returns SNR figures.
json run_counting(const CountingPlan& plan, double live_time, std::uint64_t seed, Workspace& ws, CountHistogram* out);

std::vector<double> linspace(double a, double b, std::size_t n);
std::vector<double> logspace(double a, double b, std::size_t n);

json fit_json(const FitResult& r);

}  // namespace afcmem::scenario
