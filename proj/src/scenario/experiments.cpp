#include <algorithm>
#include <cmath>
#include <numbers>
#include <fstream>
#include <random>

#include "afcmem/coherence.hpp"
#include "afcmem/fitting.hpp"
#include "afcmem/hole_dynamics.hpp"
#include "afcmem/random.hpp"
#include "afcmem/scenario.hpp"
#include "afcmem/spectral.hpp"
#include "common.hpp"

namespace afcmem::scenario {

namespace {

std::vector<double> intensity(const TemporalWaveform& w) {
  std::vector<double> v(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) v[i] = std::norm(w.samples()[i]);
  return v;
}

std::vector<double> scaled(std::vector<double> v, double k) {
  for (auto& x : v) x *= k;
  return v;
}

std::vector<double> hist_x(const CountHistogram& h, double scale) {
  std::vector<double> v(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) v[i] = h.bin_center(i) * scale;
  return v;
}

std::vector<double> hist_y(const CountHistogram& h) {
  return {h.counts.begin(), h.counts.end()};
}

json metrics_json(const CombMetrics& m) {
  return {{"tooth_spacing", m.tooth_spacing}, {"finesse", m.finesse},       {"peak_od", m.peak_od},
          {"background_od", m.background_od}, {"bandwidth", m.bandwidth},   {"n_teeth", m.n_teeth}};
}

SpectralProfile square_weights(const FrequencyGrid& g, double center, double width) {
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) w[i] = std::abs(g[i] - center) <= 0.5 * width ? 1.0 : 0.0;
  return SpectralProfile(g, w);
}

FrequencyGrid parse_grid(Section& parent, const std::string& key, double span, std::int64_t points) {
  auto c = parent.child(key);
  const double center = c.number("center", 0.0);
  const double sp = c.positive("span", span);
  const auto n = c.integer("points", points);
  if (n < 3) c.fail("points", "must be at least 3");
  c.finish();
  return FrequencyGrid(center, sp, static_cast<std::size_t>(n));
}

// ---------------------------------------------------------------- absorption

Job absorption(Section& s, std::optional<std::uint64_t> seed) {
  const auto grid = parse_grid(s, "grid", 20e9, 4001);
  auto line = s.child("line");
  const double peak_od = line.number("peak_od", 1.1);
  if (!(peak_od >= 0.0)) line.fail("peak_od", "must be non-negative");
  line.finish();
  const double loss = s.number("loss_factor", 0.17);
  if (!(loss > 0.0 && loss <= 1.0)) s.fail("loss_factor", "must lie in (0, 1]");
  auto hole = s.child("hole");
  const double width = hole.positive("width", 2e9);
  const double target = hole.fraction("ground_fraction", 0.14);
  const double rate = hole.positive("pump_rate", 2000.0);
  const double homogeneous = hole.positive("homogeneous_width", 50e6);
  const double duration = hole.positive("duration", 0.12);
  hole.finish();
  const double noise = s.number("noise", 0.0);
  if (noise < 0.0) s.fail("noise", "must be non-negative");
  const std::uint64_t sd = noise > 0.0 ? need_seed(s, seed, "noise is enabled") : 0;
  PersistenceModel pers;
  double branching = 0.0;
  check(hole.path(), [&] { branching = calibrate_branching(rate, pers, duration, target); });

  return [=](Workspace& ws) {
    const auto reference = SpectralProfile::flat(grid, peak_od);
    const PumpModel pump{rate, homogeneous, branching, square_weights(grid, 0.0, width)};
    const auto state = burn(PopulationState::thermal(grid), pump, pers, duration);
    const auto od = population_to_od(state, reference);

    auto t = beer_lambert_transmission(od, loss);
    std::mt19937_64 rng(stream_seed(sd, 1));
    std::normal_distribution<double> gauss;
    if (noise > 0.0) {
      for (auto& v : t) v = std::max(v * (1.0 + noise * gauss(rng)), 1e-300);
    }
    const MeasuredSpectrum in{grid, std::vector<double>(grid.size(), 1.0)};
    const MeasuredSpectrum out{grid, t};
    const auto extracted = extract_od(in, out, loss);
    const auto response = kramers_kronig_phase(extracted.profile);
    const auto phase = response.phase();

    double max_err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      max_err = std::max(max_err, std::abs(extracted.profile[i] - od[i]));
    }
    const std::size_t c = grid.nearest_index(0.0);
    json j;
    j["loss_factor"] = loss;
    j["peak_od"] = peak_od;
    j["transmission_off_hole"] = beer_lambert_transmission(std::vector<double>{peak_od}, loss)[0];
    j["transmission_off_hole_lossless"] = std::exp(-peak_od);
    j["hole_center_ground_fraction"] = state.ground()[c];
    j["hole_center_od"] = od[c];
    j["transfer_efficiency"] = 1.0 - od[c] / peak_od;
    j["hole_fwhm"] = hole_fwhm(state);
    j["branching_to_aux"] = branching;
    j["extracted_hole_center_od"] = extracted.profile[c];
    j["extraction_max_abs_error"] = max_err;
    j["clamp_count"] = extracted.clamp_count;
    j["max_abs_phase"] = std::abs(*std::max_element(phase.begin(), phase.end(),
                                                    [](double a, double b) { return std::abs(a) < std::abs(b); }));

    write_spectrum_csv(ws.file("spectrum_in.csv"), grid, in.intensity, "intensity");
    write_spectrum_csv(ws.file("spectrum_out.csv"), grid, t, "intensity");
    write_spectrum_csv(ws.file("od.csv"), grid, extracted.profile.od(), "od");
    write_spectrum_csv(ws.file("phase.csv"), grid, phase, "phase_rad");
    const auto ghz = scaled(grid.values(), 1e-9);
    ws.plot("od.svg", {"Optical depth with burned hole", "detuning (GHz)", "OD",
                       {{"extracted", ghz, extracted.profile.od()}, {"phase (rad)", ghz, phase}}});
    return j;
  };
}

// ---------------------------------------------------------------- hole-decay

Job hole_decay(Section& s, std::optional<std::uint64_t> seed) {
  auto p = s.child("persistence");
  PersistenceModel pers;
  pers.w1 = p.number("w1", pers.w1);
  pers.t1sa = p.positive("t1sa", pers.t1sa);
  pers.w2 = p.number("w2", pers.w2);
  pers.t1sb = p.positive("t1sb", pers.t1sb);
  p.finish();
  check(p.path(), [&] { pers.validate(); });

  const auto grid = parse_grid(s, "grid", 12e9, 1201);
  auto b = s.child("burn");
  const double rate = b.number("pump_rate", 30.0);
  const double width = b.positive("width", 8e9);
  const double homogeneous = b.positive("homogeneous_width", 200e6);
  const double branching = b.fraction("branching", 0.6);
  const double duration = b.positive("duration", 0.12);
  b.finish();

  auto c = s.child("curve");
  const double t0 = c.positive("start", 0.05);
  const double t1 = c.positive("stop", 2000.0);
  const auto n = c.integer("points", 60);
  const double noise = c.number("noise", 0.005);
  c.finish();
  if (!(t1 > t0)) throw ConfigError(c.path() + ": stop must exceed start");
  if (n < 8) throw ConfigError(c.path() + ".points: need at least 8");
  if (noise < 0.0) throw ConfigError(c.path() + ".noise: must be non-negative");
  const double t_ref = s.positive("reference_time", 6.75);

  auto in = s.child("inset");
  const double lw = in.positive("fwhm", 7.58e6);
  const double depth = in.positive("depth", 0.946);
  const double span = in.positive("span", 60e6);
  const auto in_n = in.integer("points", 301);
  const double in_noise = in.number("noise", 0.01);
  in.finish();
  if (in_n < 8) throw ConfigError(in.path() + ".points: need at least 8");
  const std::uint64_t sd = (noise > 0.0 || in_noise > 0.0) ? need_seed(s, seed, "noise is enabled") : 0;

  return [=](Workspace& ws) {
    const auto ref = SpectralProfile::flat(grid, 1.1);
    const PumpModel pump{rate, homogeneous, branching, square_weights(grid, 0.0, width)};
    const auto burned = burn(PopulationState::thermal(grid), pump, pers, duration);
    const double a0 = hole_area(burned, ref) / (pers.w1 + pers.w2);

    std::mt19937_64 rng(stream_seed(sd, 1));
    std::normal_distribution<double> gauss;
    const auto t = logspace(t0, t1, static_cast<std::size_t>(n));
    std::vector<double> a, sig;
    for (double tk : t) {
      const double clean = hole_area(decay(burned, pers, tk), ref) / a0;
      a.push_back(clean + noise * clean * gauss(rng));
      sig.push_back(noise > 0.0 ? noise * clean : 1.0);
    }
    const auto r = fit(FitModel(ModelKind::biexponential), t, a, sig);

    // Narrow-hole inset: Lorentzian depletion profile with additive noise.
    std::mt19937_64 rng2(stream_seed(sd, 2));
    const auto nu = linspace(-0.5 * span, 0.5 * span, static_cast<std::size_t>(in_n));
    std::vector<double> dip;
    for (double v : nu) dip.push_back(depth / (1.0 + 4.0 * v * v / (lw * lw)) + in_noise * depth * gauss(rng2));
    const auto li = fit(FitModel(ModelKind::lorentzian), nu, dip);

    json j;
    j["biexponential"] = fit_json(r);
    j["w1_relative_error"] = r.value("w1") / pers.w1 - 1.0;
    j["t1sa_relative_error"] = r.value("t1") / pers.t1sa - 1.0;
    j["w2_relative_error"] = r.value("w2") / pers.w2 - 1.0;
    j["t1sb_relative_error"] = r.value("t2") / pers.t1sb - 1.0;
    j["area_ratio_model"] = pers.hole_area(t_ref) / pers.hole_area(t0);
    j["area_ratio_simulated"] = hole_area(decay(burned, pers, t_ref), ref) / hole_area(decay(burned, pers, t0), ref);
    j["inset_fwhm"] = li.value("fwhm");
    j["inset_fwhm_sigma"] = li.sigma("fwhm");
    j["inset_fwhm_relative_error"] = li.value("fwhm") / lw - 1.0;

    {
      std::ofstream out(ws.file("hole_area.csv"));
      out.precision(12);
      out << "time_s,area,sigma\n";
      for (std::size_t i = 0; i < t.size(); ++i) out << t[i] << ',' << a[i] << ',' << sig[i] << '\n';
    }
    {
      std::ofstream out(ws.file("inset.csv"));
      out.precision(12);
      out << "detuning_hz,depletion_od\n";
      for (std::size_t i = 0; i < nu.size(); ++i) out << nu[i] << ',' << dip[i] << '\n';
    }
    const FitModel bi(ModelKind::biexponential);
    std::vector<double> lt, model;
    for (double tk : t) {
      lt.push_back(std::log10(tk));
      model.push_back(bi(tk, r.parameters));
    }
    ws.plot("hole_area.svg", {"Hole area decay", "log10 time (s)", "normalized area",
                              {{"simulated", lt, a, true}, {"biexponential fit", lt, model}}});
    return j;
  };
}

// ---------------------------------------------------------------- hahn-echo

Job hahn_echo(Section& s, std::optional<std::uint64_t> seed) {
  EchoDecayConfig cfg;
  const double field = s.number("field", 0.06);
  check("field", [&] { cfg.truth.t2o = t2o_for_field(field); });
  cfg.truth.t2o = s.positive("t2o", cfg.truth.t2o);
  cfg.truth.i0 = s.positive("i0", 1.0);
  auto t = s.child("t12");
  const double a = t.positive("start", 0.1e-6);
  const double b = t.positive("stop", 1.5e-6);
  const auto n = t.integer("points", 15);
  t.finish();
  if (!(b > a) || n < 3) throw ConfigError(t.path() + ": need stop > start and at least 3 points");
  cfg.t12 = linspace(a, b, static_cast<std::size_t>(n));
  auto h = s.child("heterodyne");
  cfg.heterodyne.beat_frequency = h.positive("beat_frequency", 85e6);
  cfg.heterodyne.duration = h.positive("duration", 1e-6);
  cfg.heterodyne.sample_rate = h.positive("sample_rate", 2e9);
  h.finish();
  const auto avg = s.integer("averages", 20);
  if (avg < 1) s.fail("averages", "must be at least 1");
  cfg.averages = static_cast<std::size_t>(avg);
  cfg.min_snr = s.positive("min_snr", 10.0);
  auto pulses = s.child("pulses");
  HahnSequence hahn;
  hahn.pi2_duration = pulses.positive("pi_half", 25e-9);
  hahn.pi_duration = pulses.positive("pi", 50e-9);
  pulses.finish();
  cfg.seed = need_seed(s, seed, "the echo traces carry noise");
  if (cfg.heterodyne.sample_rate <= 2.0 * cfg.heterodyne.beat_frequency) {
    throw ConfigError("heterodyne.sample_rate: must exceed twice the beat frequency");
  }

  return [=](Workspace& ws) mutable {
    const auto m = measure_echo_decay(cfg);
    json j;
    j["field_t"] = field;
    j["t2o_truth"] = cfg.truth.t2o;
    j["t2o"] = m.t2o;
    j["t2o_sigma"] = m.t2o_sigma;
    j["t2o_relative_error"] = m.t2o / cfg.truth.t2o - 1.0;
    j["i0"] = m.fit.value("i0");
    j["noise_rms"] = m.noise_rms;
    j["averages"] = cfg.averages;
    j["fit"] = fit_json(m.fit);
    hahn.t12 = cfg.t12.front();
    const auto tl = hahn.timeline();
    j["pi_half_duration"] = hahn.pi2_duration;
    j["pi_duration"] = hahn.pi_duration;
    j["echo_delay_over_t12"] = tl.back().start / hahn.t12;
    write_decay_csv(ws.file("echo_decay.csv"), m);
    const FitModel model(ModelKind::echo_decay);
    std::vector<double> us, fitted;
    for (double x : m.t12) {
      us.push_back(x * 1e6);
      fitted.push_back(model(x, m.fit.parameters));
    }
    ws.plot("echo_decay.svg", {"Hahn echo decay", "t12 (us)", "echo intensity",
                               {{"measured", us, m.intensity, true}, {"fit", us, fitted}}});
    return j;
  };
}

// ---------------------------------------------------------------- comb-synthesis

Job comb_synthesis(Section& s, std::optional<std::uint64_t>) {
  const auto spec = parse_comb(s, "comb");
  auto g = s.child("grid");
  const double margin = g.number("margin", 0.5e9);
  const auto ppt = g.integer("points_per_tooth", 24);
  g.finish();
  if (ppt < 8) throw ConfigError(g.path() + ".points_per_tooth: need at least 8");
  auto b = s.child("burn");
  const bool do_burn = b.flag("enabled", true);
  const double cal_rate = b.positive("calibration_rate", 2000.0);
  const double factor = b.positive("rate_factor", 3.5);
  const double homogeneous = b.positive("homogeneous_width", 1e6);
  const double duration = b.positive("duration", 0.12);
  const double wait = b.number("wait", 0.18);
  const double target = b.fraction("target_ground", 0.14);
  b.finish();
  double branching = 0.0;
  check(b.path(), [&] { branching = calibrate_branching(cal_rate, PersistenceModel{}, duration, target); });

  return [=](Workspace& ws) {
    const double step = spec.tooth_width() / static_cast<double>(ppt);
    const double span = spec.bandwidth + 2.0 * margin;
    const auto n = static_cast<std::size_t>(std::ceil(span / step)) + 1;
    const FrequencyGrid grid(spec.center_offset, span, n);
    const auto target_od = synthesize(spec, grid);
    const auto tm = comb_metrics(target_od);

    json j;
    j["n_teeth"] = spec.n_teeth();
    j["storage_time"] = storage_time(spec);
    j["tooth_width"] = spec.tooth_width();
    j["band"] = {spec.center_offset - 0.5 * spec.bandwidth, spec.center_offset + 0.5 * spec.bandwidth};
    j["analytic_efficiency"] = analytic_efficiency(spec);
    j["target_metrics"] = metrics_json(tm);
    write_spectrum_csv(ws.file("comb_target.csv"), grid, target_od.od(), "od");
    const auto ghz = scaled(grid.values(), 1e-9);
    Plot plot{"AFC optical depth", "detuning (GHz)", "OD", {{"target", ghz, target_od.od()}}};

    if (do_burn) {
      std::vector<double> w(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const bool inside = std::abs(grid[i] - spec.center_offset) <= 0.5 * spec.bandwidth;
        w[i] = inside && target_od[i] < 0.5 * (spec.peak_od + spec.background_od) ? 1.0 : 0.0;
      }
      const PersistenceModel pers;
      const PumpModel pump{factor * cal_rate, homogeneous, branching, SpectralProfile(grid, w)};
      auto state = burn(PopulationState::thermal(grid), pump, pers, duration);
      state = decay(state, pers, wait);
      const auto od = population_to_od(state, SpectralProfile::flat(grid, spec.peak_od));
      const auto bm = comb_metrics(od);
      j["burned_metrics"] = metrics_json(bm);
      j["burned_analytic_efficiency"] = analytic_efficiency(bm.peak_od, std::max(bm.finesse, 1.0), bm.background_od);
      j["branching_to_aux"] = branching;
      write_spectrum_csv(ws.file("comb_burned.csv"), grid, od.od(), "od");
      plot.series.push_back({"burned", ghz, od.od()});
    }
    ws.plot("comb.svg", plot);
    return j;
  };
}

// ---------------------------------------------------------------- eq1-efficiency

Job eq1_efficiency(Section& s, std::optional<std::uint64_t>) {
  auto c = s.child("comb");
  const double d = c.number("peak_od", 1.1);
  const double f = c.number("finesse", 2.0);
  const double d0 = c.number("background_od", 0.05);
  c.finish();
  if (f < 1.0) throw ConfigError(c.path() + ".finesse: must be >= 1");
  const double external = s.fraction("external_transmission", 0.17);
  auto sc = s.child("scan");
  const double f0 = sc.number("finesse_min", 1.0);
  const double f1 = sc.number("finesse_max", 8.0);
  const auto fn = sc.integer("points", 141);
  sc.finish();
  if (f0 < 1.0 || !(f1 > f0) || fn < 3) throw ConfigError(sc.path() + ": need 1 <= finesse_min < finesse_max, points >= 3");

  auto nm = s.child("numeric");
  const bool numeric = nm.flag("enabled", true);
  const double ts = nm.positive("storage_time", 90e-9);
  const double bw = nm.positive("bandwidth", 8e9);
  const double fwhm = nm.positive("mode_fwhm", 320e-12);
  const auto ods = nm.numbers("peak_od", std::vector<double>{0.5, 1.0, 1.5, 2.0});
  const auto tg = parse_time_grid(nm, "time_grid");
  nm.finish();

  // Echo arrival for a set of storage times; all share the numeric comb shape.
  auto et = s.child("echo_timing");
  const bool timing = et.flag("enabled", true);
  const auto storage_times = et.numbers("storage_times", std::vector<double>{5e-9, 30e-9, 90e-9, 100e-9});
  et.finish();
  for (double t : storage_times) {
    if (!(t > 0.0)) et.fail("storage_times", "entries must be positive");
    check(et.path() + ".storage_times", [&] { CombSpec::for_storage_time(t, bw).validate(); });
    if (2e-9 + 1.5 * t >= tg.dt * static_cast<double>(tg.samples))
      et.fail("storage_times", "echo falls outside the time grid");
  }

  return [=](Workspace& ws) {
    json j;
    j["analytic_efficiency"] = analytic_efficiency(d, f, d0);
    j["external_transmission"] = external;
    j["total_efficiency"] = analytic_efficiency(d, f, d0) * external;
    const auto fs = linspace(f0, f1, static_cast<std::size_t>(fn));
    std::vector<double> eta;
    for (double x : fs) eta.push_back(analytic_efficiency(d, x, d0));
    const auto best = static_cast<std::size_t>(std::max_element(eta.begin(), eta.end()) - eta.begin());
    j["optimal_finesse"] = fs[best];
    j["optimal_efficiency"] = eta[best];
    {
      std::ofstream out(ws.file("finesse_scan.csv"));
      out.precision(12);
      out << "finesse,efficiency\n";
      for (std::size_t i = 0; i < fs.size(); ++i) out << fs[i] << ',' << eta[i] << '\n';
    }
    ws.plot("finesse_scan.svg", {"Analytic AFC efficiency", "finesse", "efficiency", {{"", fs, eta}}});

    if (numeric) {
      const auto input = gaussian_pulse(2e-9, fwhm, 0.0, tg.dt, tg.samples);
      json rows = json::array();
      for (double od : ods) {
        CombSpec spec = CombSpec::for_storage_time(ts, bw);
        spec.finesse = f;
        spec.peak_od = od;
        spec.background_od = d0;
        const auto out = propagate(input, comb_response(spec, tg));
        const double num = echo_efficiency(input, out, 2e-9 + ts, default_echo_window(fwhm));
        const double ana = analytic_efficiency(spec);
        rows.push_back({{"peak_od", od}, {"simulated", num}, {"analytic", ana}, {"ratio", num / ana}});
      }
      j["numeric"] = rows;
    }
    if (timing) {
      const double t0 = 2e-9;
      const auto input = gaussian_pulse(t0, fwhm, 0.0, tg.dt, tg.samples);
      json rows = json::array();
      for (double t : storage_times) {
        CombSpec spec = CombSpec::for_storage_time(t, bw);
        spec.finesse = f;
        spec.peak_od = d;
        spec.background_od = d0;
        const auto out = propagate(input, comb_response(spec, tg));
        // Brightest sample between half and one and a half storage times.
        double best = -1.0, when = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
          const double ti = out.time(i);
          if (ti < t0 + 0.5 * t || ti > t0 + 1.5 * t) continue;
          if (std::norm(out.samples()[i]) > best) {
            best = std::norm(out.samples()[i]);
            when = ti;
          }
        }
        rows.push_back({{"storage_time", t},
                        {"tooth_spacing", spec.tooth_spacing},
                        {"echo_delay", when - t0},
                        {"error_steps", (when - t0 - t) / tg.dt}});
      }
      j["echo_timing"] = rows;
      j["time_step"] = tg.dt;
    }
    return j;
  };
}

// ---------------------------------------------------------------- multimode storage

struct TrainPlan {
  CombSpec comb;
  TimeGrid grid;
  ModeTrain train;
};

TrainPlan parse_train(Section& s) {
  TrainPlan p;
  p.comb = parse_comb(s, "comb");
  p.grid = parse_time_grid(s, "time_grid");
  auto t = s.child("train");
  const auto n = t.integer("modes", 59);
  if (n < 1) t.fail("modes", "must be at least 1");
  p.train.n_modes = static_cast<std::size_t>(n);
  p.train.mode_fwhm = t.positive("mode_fwhm", 320e-12);
  p.train.mode_spacing = t.positive("mode_spacing", 1.12e-9);
  p.train.first_center = t.positive("first_center", 2e-9);
  t.finish();
  check(t.path(), [&] { p.train.validate(); });
  return p;
}

void write_train_csv(Workspace& ws, const TrainStorageResult& r, const std::vector<double>& pattern) {
  std::ofstream out(ws.file("recalled_modes.csv"));
  out.precision(12);
  out << "mode,input_amplitude,recalled_order,efficiency,recalled_pattern\n";
  for (std::size_t i = 0; i < r.per_mode_efficiency.size(); ++i) {
    out << i << ',' << (pattern.empty() ? 1.0 : pattern[i]) << ',' << r.recalled_order[i] << ','
        << r.per_mode_efficiency[i] << ',' << r.recalled_pattern[i] << '\n';
  }
}

void plot_train(Workspace& ws, const TrainStorageResult& r, double ts) {
  // Input and recall on a shared axis, shifted by the storage time.
  std::vector<double> tin, iin, tout, iout;
  const auto a = intensity(r.input), b = intensity(r.output);
  for (std::size_t i = 0; i < r.input.size(); ++i) {
    const double t = r.input.time(i);
    if (t > ts) break;
    tin.push_back(t * 1e9);
    iin.push_back(a[i]);
  }
  double peak = 0.0;
  for (std::size_t i = 0; i < r.output.size(); ++i) {
    const double t = r.output.time(i);
    if (t >= ts && t <= 2.0 * ts) peak = std::max(peak, b[i]);
  }
  for (std::size_t i = 0; i < r.output.size(); ++i) {
    const double t = r.output.time(i);
    if (t < ts || t > 2.0 * ts) continue;
    tout.push_back((t - ts) * 1e9);
    iout.push_back(peak > 0.0 ? b[i] / peak : 0.0);
  }
  ws.plot("modes.svg", {"Input train and recalled echo", "time (ns, echo shifted by storage time)",
                        "normalized intensity", {{"input", tin, iin}, {"recalled", tout, iout}}});
}

Job multimode(Section& s, std::optional<std::uint64_t> seed) {
  const auto plan = parse_train(s);
  auto cap = s.child("capacity");
  const double cap_dur = cap.positive("mode_duration", 312.5e-12);
  const double cap_gap = cap.positive("mode_spacing", 312.5e-12);
  cap.finish();
  const bool counting = s.has("counting");
  CountingPlan cp;
  SequencePlan sp;
  std::int64_t reps = 0;
  std::uint64_t sd = 0;
  double mu = 0.0;
  if (counting) {
    cp = parse_counting(s, "counting", SourceKind::weak_coherent);
    mu = cp.setup.source.mu;
    auto q = s.child("sequence");
    sp = parse_sequence(q);
    reps = q.integer("repetitions", 240);
    if (reps < 1) q.fail("repetitions", "must be at least 1");
    q.finish();
    sd = need_seed(s, seed, "photon counts are sampled");
  }

  return [=](Workspace& ws) {
    const double ts = storage_time(plan.comb);
    const auto r = store_train(plan.train, comb_response(plan.comb, plan.grid), ts);
    bool ordered = true;
    for (std::size_t i = 0; i < r.recalled_order.size(); ++i) ordered = ordered && r.recalled_order[i] == i;
    double mean_eff = 0.0;
    for (double e : r.per_mode_efficiency) mean_eff += e / static_cast<double>(r.per_mode_efficiency.size());

    json j;
    j["storage_time"] = ts;
    j["modes_in"] = plan.train.n_modes;
    j["modes_recalled"] = r.recalled_order.size();
    j["order_preserved"] = ordered;
    j["max_cross_talk_db"] = r.max_cross_talk_db;
    j["mean_mode_efficiency"] = mean_eff;
    j["analytic_efficiency"] = analytic_efficiency(plan.comb);
    j["train_duration"] = plan.train.duration();
    j["capacity"] = mode_capacity(ts, cap_dur, cap_gap);
    j["mode_duration_bandwidth_limited"] = 2.5 / plan.comb.bandwidth;
    write_train_csv(ws, r, {});
    write_waveform_csv(ws.file("waveform_out.csv"), r.output);
    {
      std::ofstream out(ws.file("cross_talk.csv"));
      out.precision(6);
      for (const auto& row : r.cross_talk) {
        for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k];
        out << '\n';
      }
    }
    plot_train(ws, r, ts);

    if (counting) {
      const auto tl = compile(sp.phases, reps);
      const auto acq = acquisition_summary(tl);
      CountHistogram h;
      auto c = run_counting(cp, acq.live_time, stream_seed(sd, 1), ws, &h);
      c["wall_time_s"] = acq.wall_time;
      c["repetitions"] = reps;
      const double snr_v = c["snr"].is_null() ? kInfiniteSnr : c["snr"].get<double>();
      const double fid = timebin_fidelity(std::max(snr_v, 0.0));
      const double bound = classical_bound(mu, cp.setup.memory_efficiency);
      c["fidelity"] = fid;
      c["classical_bound"] = bound;
      c["beats_classical"] = beats_classical(fid, bound);
      c["fidelity_at_reported_snr"] = timebin_fidelity(6.08);
      j["counting"] = c;
      ws.plot("histogram.svg", {"Echo counts", "time (ns)", "counts", {{"", hist_x(h, 1e9), hist_y(h)}}});
    }
    return j;
  };
}

Job random_timebins(Section& s, std::optional<std::uint64_t> seed) {
  const auto plan = parse_train(s);
  const double p_one = s.fraction("occupation", 0.5);
  const std::uint64_t sd = need_seed(s, seed, "the pattern is random");
  return [=](Workspace& ws) {
    auto train = plan.train;
    std::mt19937_64 rng(stream_seed(sd, 1));
    std::bernoulli_distribution bit(p_one);
    for (std::size_t i = 0; i < train.n_modes; ++i) train.amplitude_pattern.push_back(bit(rng) ? 1.0 : 0.0);
    const double ts = storage_time(plan.comb);
    const auto r = store_train(train, comb_response(plan.comb, plan.grid), ts);
    const auto& x = train.amplitude_pattern;
    const auto& y = r.recalled_pattern;
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      mx += x[i] / n;
      my += y[i] / n;
    }
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
      syy += (y[i] - my) * (y[i] - my);
    }
    const double top = *std::max_element(y.begin(), y.end());
    std::size_t matched = 0, ones = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      matched += (y[i] > 0.5 * top) == (x[i] > 0.5);
      ones += x[i] > 0.5;
    }
    json j;
    j["modes"] = x.size();
    j["occupied_modes"] = ones;
    j["bits_matched"] = matched;
    j["pattern_correlation"] = sxx > 0 && syy > 0 ? json(sxy / std::sqrt(sxx * syy)) : json(nullptr);
    j["max_cross_talk_db"] = r.max_cross_talk_db;
    j["span"] = train.duration();
    write_train_csv(ws, r, x);
    std::vector<double> idx(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<double>(i);
    ws.plot("pattern.svg", {"Random time-bin pattern", "mode", "amplitude",
                            {{"input", idx, x, true}, {"recalled", idx, y}}});
    plot_train(ws, r, ts);
    return j;
  };
}

// ---------------------------------------------------------------- quantum dot

Job qd_lifetime(Section& s, std::optional<std::uint64_t> seed) {
  LifetimeSetup st;
  st.lifetime = s.positive("lifetime", st.lifetime);
  st.repetition_rate = s.positive("repetition_rate", st.repetition_rate);
  st.jitter_fwhm = s.number("jitter_fwhm", st.jitter_fwhm);
  st.onset = s.number("onset", st.onset);
  st.total_counts = s.positive("total_counts", st.total_counts);
  st.dark_counts = s.number("dark_counts", 2000.0);
  st.bin_width = s.positive("bin_width", st.bin_width);
  const double tail = s.positive("fit_tail", 40e-9);
  const std::uint64_t sd = need_seed(s, seed, "counts are sampled");
  if (st.jitter_fwhm < 0 || st.dark_counts < 0 || st.onset < 0 || st.onset >= 1.0 / st.repetition_rate) {
    throw ConfigError("jitter_fwhm, dark_counts must be non-negative and onset inside one period");
  }
  return [=](Workspace& ws) {
    const auto h = synthesize_lifetime(st, stream_seed(sd, 1));
    const auto r = fit_lifetime(h, tail);
    json j;
    j["tau_truth"] = st.lifetime;
    j["tau"] = r.value("tau");
    j["tau_sigma"] = r.sigma("tau");
    j["tau_relative_error"] = r.value("tau") / st.lifetime - 1.0;
    j["fit"] = fit_json(r);
    write_histogram_csv(ws.file("lifetime.csv"), h);
    const FitModel m(ModelKind::emg);
    std::vector<double> fitted;
    for (std::size_t i = 0; i < h.size(); ++i) fitted.push_back(m(h.bin_center(i), r.parameters));
    ws.plot("lifetime.svg", {"Lifetime histogram", "time (ns)", "counts",
                             {{"counts", hist_x(h, 1e9), hist_y(h), true}, {"EMG fit (dark removed)", hist_x(h, 1e9), fitted}}});
    return j;
  };
}

Job g2_cw(Section& s, std::optional<std::uint64_t> seed) {
  G2CwSetup st;
  st.g2_0 = s.fraction("g2_0", st.g2_0);
  st.antibunch_time = s.positive("antibunch_time", st.antibunch_time);
  st.bunch_amplitude = s.number("bunch_amplitude", st.bunch_amplitude);
  st.bunch_time = s.positive("bunch_time", st.bunch_time);
  st.rate_a = s.positive("rate_a", st.rate_a);
  st.rate_b = s.positive("rate_b", st.rate_b);
  st.integration_time = s.positive("integration_time", st.integration_time);
  st.bin_width = s.positive("bin_width", st.bin_width);
  st.max_delay = s.positive("max_delay", st.max_delay);
  const bool bunching = s.flag("fit_bunching", st.bunch_amplitude > 0.0);
  const std::uint64_t sd = need_seed(s, seed, "coincidences are sampled");
  return [=](Workspace& ws) {
    const auto h = synthesize_g2_cw(st, stream_seed(sd, 1));
    const auto r = fit_g2_cw(h, bunching);
    json j;
    j["g2_0_truth"] = st.g2_0;
    j["g2_0"] = r.value("g2_0");
    j["g2_0_sigma"] = r.sigma("g2_0");
    j["antibunch_time"] = r.value("antibunch_time");
    j["fit"] = fit_json(r);
    write_histogram_csv(ws.file("g2_cw.csv"), h);
    const FitModel m(ModelKind::g2_cw);
    std::vector<double> fitted;
    for (std::size_t i = 0; i < h.size(); ++i) fitted.push_back(m(h.bin_center(i), r.parameters));
    ws.plot("g2_cw.svg", {"CW coincidences", "delay (ns)", "coincidences",
                          {{"data", hist_x(h, 1e9), hist_y(h), true}, {"fit", hist_x(h, 1e9), fitted}}});
    return j;
  };
}

Job g2_pulsed(Section& s, std::optional<std::uint64_t> seed) {
  G2PulsedSetup st;
  st.area_ratio = s.number("area_ratio", st.area_ratio);
  st.repetition_period = 1.0 / s.positive("repetition_rate", 10e6);
  st.lifetime = s.positive("lifetime", st.lifetime);
  st.side_peak_area = s.positive("side_peak_area", st.side_peak_area);
  st.background_rate = s.number("background_rate", st.background_rate);
  st.peaks_each_side = static_cast<int>(s.integer("peaks_each_side", st.peaks_each_side));
  st.bin_width = s.positive("bin_width", st.bin_width);
  const std::uint64_t sd = need_seed(s, seed, "coincidences are sampled");
  if (st.area_ratio < 0 || st.background_rate < 0) throw ConfigError("area_ratio, background_rate: must be non-negative");
  if (st.peaks_each_side < 2) s.fail("peaks_each_side", "must be at least 2");
  return [=](Workspace& ws) {
    const auto h = synthesize_g2_pulsed(st, stream_seed(sd, 1));
    const double ratio = g2_pulsed_area_ratio(h, st.repetition_period, st.background_rate);
    json j;
    j["area_ratio_truth"] = st.area_ratio;
    j["area_ratio"] = ratio;
    j["absolute_error"] = ratio - st.area_ratio;
    write_histogram_csv(ws.file("g2_pulsed.csv"), h);
    ws.plot("g2_pulsed.svg", {"Pulsed coincidences", "delay (ns)", "coincidences", {{"", hist_x(h, 1e9), hist_y(h)}}});
    return j;
  };
}

Job qd_storage(Section& s, std::optional<std::uint64_t> seed) {
  const auto cp = parse_counting(s, "counting", SourceKind::single_emitter);
  if (cp.setup.source.kind != SourceKind::single_emitter) throw ConfigError("counting.source.kind: expected single_emitter");
  auto q = s.child("sequence");
  const auto sp = parse_sequence(q);
  const auto reps = q.integer("repetitions", 480);
  if (reps < 1) q.fail("repetitions", "must be at least 1");
  q.finish();
  auto ref = s.child("reference");
  const double snr_ref = ref.number("snr", 1.92);
  const double g2_reported = ref.number("g2_out", 0.5547);
  ref.finish();
  auto hs = s.child("hole_scan");
  const bool scan = hs.flag("enabled", true);
  const double hole_w = hs.positive("hole_width", 8e9);
  const double range = hs.positive("range", 12e9);
  const auto points = hs.integer("points", 161);
  const auto plateau_points = hs.integer("plateau_points", 1201);
  const double line_fwhm = hs.positive("emitter_fwhm", 1.0 / (2.0 * std::numbers::pi * cp.setup.source.lifetime));
  const double gspan = hs.positive("grid_span", 60e9);
  const auto gpoints = hs.integer("grid_points", 60001);
  HoleShape shape;
  shape.line_od = hs.number("line_od", shape.line_od);
  shape.transfer_fraction = hs.fraction("transfer_fraction", shape.transfer_fraction);
  hs.finish();
  if (points < 8 || plateau_points < 8 || gpoints < 16) throw ConfigError(hs.path() + ": too few points");
  const std::uint64_t sd = need_seed(s, seed, "photon counts are sampled");

  return [=](Workspace& ws) {
    const auto tl = compile(sp.phases, reps);
    const auto acq = acquisition_summary(tl);
    CountHistogram h;
    auto c = run_counting(cp, acq.live_time, stream_seed(sd, 1), ws, &h);
    c["wall_time_s"] = acq.wall_time;
    c["repetitions"] = reps;
    const double g2_in = cp.setup.source.g2_0;
    const double snr_v = c["snr"].is_null() ? kInfiniteSnr : c["snr"].get<double>();
    json j;
    j["counting"] = c;
    j["g2_in"] = g2_in;
    j["g2_out_simulated"] = g2_out(g2_in, std::max(snr_v, 0.0));
    j["g2_out_at_reference_snr"] = g2_out(g2_in, snr_ref);
    j["g2_out_reported"] = g2_reported;
    j["g2_out_discrepancy"] = g2_out(g2_in, snr_ref) - g2_reported;
    j["below_classical_limit"] = g2_out(g2_in, snr_ref) < 1.0;
    j["fidelity"] = timebin_fidelity(std::max(snr_v, 0.0));
    ws.plot("histogram.svg", {"Recalled single photons", "time (ns)", "counts", {{"", hist_x(h, 1e9), hist_y(h)}}});

    if (scan) {
      const FrequencyGrid g(0.0, gspan, static_cast<std::size_t>(gpoints));
      std::vector<double> delta(g.size(), 0.0);
      delta[g.nearest_index(0.0)] = 1.0;
      const auto fine = linspace(-range, range, static_cast<std::size_t>(plateau_points));
      const auto flat_top = hole_scan_match(SpectralProfile(g, delta), hole_w, fine, shape);
      const auto offsets = linspace(-range, range, static_cast<std::size_t>(points));
      const auto line = lorentzian_line(g, 0.0, line_fwhm);
      const auto profile = hole_scan_match(line, hole_w, offsets, shape);
      const auto r = fit(FitModel(ModelKind::lorentzian), offsets, profile);
      json k;
      k["plateau_width"] = plateau_width(fine, flat_top);
      k["emitter_fwhm"] = line_fwhm;
      k["lorentzian_fwhm"] = r.value("fwhm");
      k["hole_width"] = hole_w;
      j["hole_scan"] = k;
      std::ofstream out(ws.file("hole_scan.csv"));
      out.precision(12);
      out << "offset_hz,transmission\n";
      for (std::size_t i = 0; i < offsets.size(); ++i) out << offsets[i] << ',' << profile[i] << '\n';
      ws.plot("hole_scan.svg", {"Hole scan across the emitter line", "offset (GHz)", "transmitted fraction",
                                {{"lifetime-limited line", scaled(offsets, 1e-9), profile, true},
                                 {"narrow emitter", scaled(fine, 1e-9), flat_top}}});
    }
    return j;
  };
}

// ---------------------------------------------------------------- sequence-timing

Job sequence_timing(Section& s, std::optional<std::uint64_t>) {
  auto q = s.child("sequence");
  const auto sp = parse_sequence(q);
  const auto reps = q.integers("repetitions", std::vector<std::int64_t>{240, 480});
  q.finish();
  for (auto r : reps) {
    if (r < 0) throw ConfigError(q.path() + ".repetitions: must be non-negative");
  }
  return [=](Workspace& ws) {
    const auto tl = compile(sp.phases, 1);
    const auto report = validate(tl, sp.rules);
    json j;
    j["total_duration_ns"] = tl.total_duration;
    j["trial_slots"] = tl.trial_slots;
    j["events"] = tl.events.size();
    json rules;
    for (const auto& c : report.checks) {
      rules[std::string(to_string(c.rule))] = {{"passed", c.passed}, {"offending_times_ns", c.offending_times}};
    }
    j["rules"] = rules;
    j["all_rules_pass"] = report.passed();
    json acq = json::array();
    for (auto r : reps) {
      const auto a = acquisition_summary(compile(sp.phases, r));
      acq.push_back({{"repetitions", r}, {"wall_time_s", a.wall_time}, {"live_time_s", a.live_time},
                     {"total_trials", a.total_trials}});
    }
    j["acquisition"] = acq;
    write_timeline_csv(ws.file("timeline.csv"), tl);

    Plot plot{"Storage sequence", "time (ms)", "channel", {}};
    double lane = 0.0;
    for (auto ch : kAllChannels) {
      Series sr{std::string(to_string(ch)), {}, {}};
      bool st = false;
      sr.x.push_back(0.0);
      sr.y.push_back(lane);
      for (const auto& e : tl.events) {
        if (e.channel != ch) continue;
        const double ms = static_cast<double>(e.time) * 1e-6;
        sr.x.push_back(ms);
        sr.y.push_back(lane + (st ? 0.8 : 0.0));
        st = e.state;
        sr.x.push_back(ms);
        sr.y.push_back(lane + (st ? 0.8 : 0.0));
      }
      sr.x.push_back(static_cast<double>(tl.total_duration) * 1e-6);
      sr.y.push_back(lane);
      plot.series.push_back(sr);
      lane += 1.0;
    }
    ws.plot("timeline.svg", plot);
    return j;
  };
}

}  // namespace

const std::vector<Experiment>& experiments() {
  static const std::vector<Experiment> list = {
      {"absorption", absorption},
      {"comb-synthesis", comb_synthesis},
      {"eq1-efficiency", eq1_efficiency},
      {"g2-cw", g2_cw},
      {"g2-pulsed", g2_pulsed},
      {"hahn-echo", hahn_echo},
      {"hole-decay", hole_decay},
      {"multimode-storage", multimode},
      {"qd-lifetime", qd_lifetime},
      {"qd-storage", qd_storage},
      {"random-timebins", random_timebins},
      {"sequence-timing", sequence_timing},
  };
  return list;
}

}  // namespace afcmem::scenario
