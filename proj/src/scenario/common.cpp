#include "common.hpp"

#include <cmath>

#include "afcmem/scenario.hpp"

namespace afcmem::scenario {

std::uint64_t need_seed(const Section& s, std::optional<std::uint64_t> seed, const std::string& why) {
  if (!seed) throw ConfigError("seed: required because " + why + (s.path().empty() ? "" : " (" + s.path() + ")"));
  return *seed;
}

CombSpec parse_comb(Section& parent, const std::string& key) {
  auto c = parent.child(key);
  CombSpec s;
  if (c.has("tooth_spacing") == c.has("storage_time")) c.fail("storage_time", "give exactly one of storage_time, tooth_spacing");
  s.tooth_spacing = c.has("tooth_spacing") ? c.positive("tooth_spacing") : 1.0 / c.positive("storage_time");
  s.bandwidth = c.positive("bandwidth", 8e9);
  s.finesse = c.number("finesse", 2.0);
  s.peak_od = c.number("peak_od", 1.1);
  s.background_od = c.number("background_od", 0.05);
  s.center_offset = c.number("center_offset", 0.0);
  const auto shape = c.text("shape", "square");
  check(c.path() + ".shape", [&] { s.tooth_shape = tooth_shape_from_string(shape); });
  c.finish();
  check(c.path(), [&] { s.validate(); });
  return s;
}

FrequencyGrid TimeGrid::response_grid() const {
  const double df = 1.0 / (static_cast<double>(samples) * dt);
  return FrequencyGrid(0.0, df * static_cast<double>(samples), samples + 1);
}

TimeGrid parse_time_grid(Section& parent, const std::string& key) {
  auto c = parent.child(key);
  TimeGrid g;
  const auto n = c.integer("samples", 65536);
  if (n < 16 || (n & (n - 1)) != 0) c.fail("samples", "must be a power of two >= 16");
  g.samples = static_cast<std::size_t>(n);
  g.dt = c.positive("dt", 50e-12);
  c.finish();
  return g;
}

ComplexResponse comb_response(const CombSpec& spec, const TimeGrid& tg) {
  return kramers_kronig_phase(synthesize(spec, tg.response_grid()));
}

SequencePlan parse_sequence(Section& s) {
  SequencePlan plan;
  auto phases = s.list("phases");
  if (phases.empty()) {
    plan.phases = storage_sequence();
  }
  for (auto& p : phases) {
    Phase ph;
    ph.name = p.text("name");
    ph.duration = p.duration("duration");
    if (ph.duration <= 0) p.fail("duration", "must be positive");
    for (const auto& ch : p.texts("high", std::vector<std::string>{})) {
      check(p.path() + ".high", [&] { ph.states.emplace_back(channel_from_string(ch), true); });
    }
    ph.trial_rate = p.integer("trial_rate", 0);
    if (ph.trial_rate < 0) p.fail("trial_rate", "must be non-negative");
    p.finish();
    plan.phases.push_back(std::move(ph));
  }
  auto rules = s.child("rules");
  plan.rules.initial_gate_off = rules.duration("initial_gate_off", plan.rules.initial_gate_off);
  rules.finish();
  check(s.path(), [&] { compile(plan.phases, 1); });
  return plan;
}

CountingPlan parse_counting(Section& parent, const std::string& key, SourceKind default_kind) {
  auto c = parent.child(key);
  CountingPlan plan;
  auto& st = plan.setup;

  auto src = c.child("source");
  const auto kind = src.text("kind", default_kind == SourceKind::weak_coherent ? "weak_coherent" : "single_emitter");
  const double rate = src.positive("repetition_rate", default_kind == SourceKind::weak_coherent ? 4e6 : 10e6);
  if (kind == "weak_coherent") {
    st.source = SourceModel::weak_coherent(src.positive("mu", 1.15e-4), rate, src.positive("mode_fwhm", 320e-12));
  } else if (kind == "single_emitter") {
    st.source = SourceModel::single_emitter(src.number("g2_0", 0.207), src.positive("lifetime", 3.08e-9), rate);
  } else {
    src.fail("kind", "expected weak_coherent or single_emitter");
  }
  src.finish();
  check(src.path(), [&] { st.source.validate(); });

  auto det = c.child("detector");
  st.detector.efficiency = det.fraction("efficiency", 1.0);
  st.detector.dark_rate = det.number("dark_rate", 200.0);
  st.detector.jitter_fwhm = det.number("jitter_fwhm", 0.0);
  det.finish();
  check(det.path(), [&] { st.detector.validate(); });

  st.channel_efficiency = c.fraction("channel_efficiency", 1.0);
  st.memory_efficiency = c.fraction("memory_efficiency", 0.01);
  st.echo_time = c.number("echo_time");
  st.bin_width = c.positive("bin_width", 50e-12);

  const bool wcp = st.source.kind == SourceKind::weak_coherent;
  const double half = wcp ? 1.5 * st.source.mode_fwhm : 0.0;
  auto sw = c.child("signal_window");
  plan.signal = {sw.number("start", wcp ? -half : 0.0), sw.number("stop", wcp ? half : st.source.lifetime)};
  sw.finish();
  auto bw = c.child("background_window");
  plan.background = {bw.number("start", 0.0), bw.number("stop", st.echo_time - 10e-9)};
  bw.finish();
  c.finish();
  st.acquisition = 1.0;  // replaced by the live time at run time
  check(c.path(), [&] { st.validate(); });
  if (!(plan.signal.hi > plan.signal.lo)) throw ConfigError(c.path() + ".signal_window: stop must exceed start");
  if (!(plan.background.hi > plan.background.lo)) {
    throw ConfigError(c.path() + ".background_window: stop must exceed start");
  }
  return plan;
}

json run_counting(const CountingPlan& plan, double live_time, std::uint64_t seed, Workspace& ws, CountHistogram* out) {
  auto setup = plan.setup;
  setup.acquisition = live_time;
  const TimeWindow sig{setup.echo_time + plan.signal.lo, setup.echo_time + plan.signal.hi};
  const auto h = simulate_counts(setup, seed);
  const auto e = snr(h, sig, plan.background);

  // Noise-free expectation through the same estimator.
  CountHistogram mean_h = h;
  const auto mean = expected_counts(setup);
  double s_exp = 0.0, b_exp = 0.0;
  std::size_t ns = 0, nb = 0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double c = mean_h.bin_center(i);
    if (c >= sig.lo && c < sig.hi) {
      s_exp += mean[i];
      ++ns;
    } else if (c >= plan.background.lo && c < plan.background.hi) {
      b_exp += mean[i];
      ++nb;
    }
  }
  const double b_scaled = b_exp * static_cast<double>(ns) / static_cast<double>(nb);

  write_histogram_csv(ws.file("histogram.csv"), h);
  if (out) *out = h;

  json j;
  j["acquisition_s"] = live_time;
  j["trials"] = h.n_trials;
  j["total_counts"] = h.total();
  j["signal_counts"] = e.signal_counts;
  j["background_estimate"] = e.background_estimate;
  j["snr"] = std::isinf(e.value) ? json(nullptr) : json(e.value);
  j["expected_snr"] = (s_exp - b_scaled) / b_scaled;
  j["signal_window_s"] = {sig.lo, sig.hi};
  j["background_window_s"] = {plan.background.lo, plan.background.hi};
  if (!e.warning.empty()) j["warning"] = e.warning;
  return j;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

std::vector<double> logspace(double a, double b, std::size_t n) {
  auto v = linspace(std::log(a), std::log(b), n);
  for (auto& x : v) x = std::exp(x);
  return v;
}

json fit_json(const FitResult& r) {
  json j;
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    j["parameters"][r.names[i]] = r.parameters[i];
    j["sigmas"][r.names[i]] = std::isfinite(r.sigmas[i]) ? json(r.sigmas[i]) : json(nullptr);
  }
  j["reduced_chi2"] = r.reduced_chi2;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["reliable"] = r.reliable;
  return j;
}

}  // namespace afcmem::scenario
