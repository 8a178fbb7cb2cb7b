#include "afcmem/photon_stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "afcmem/errors.hpp"
#include "afcmem/models.hpp"

namespace afcmem {

namespace {

constexpr double kFwhmToSigma = 0.42466090014400953;  // 1 / (2 sqrt(2 ln 2))

void check_fraction(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput(std::string(what) + " must lie in [0, 1]");
}

double gaussian_cdf(double x, double mean, double sigma) {
  if (sigma <= 0.0) return x < mean ? 0.0 : 1.0;
  return 0.5 * std::erfc(-(x - mean) / (sigma * std::sqrt(2.0)));
}

std::vector<std::uint64_t> poisson_draw(const std::vector<double>& mean, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> out(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    if (mean[i] > 0.0) {
      std::poisson_distribution<std::uint64_t> d(mean[i]);
      out[i] = d(rng);
    }
  }
  return out;
}

std::size_t bins_for(double span, double width) {
  const auto n = static_cast<std::size_t>(std::llround(span / width));
  if (n == 0) throw InvalidInput("histogram span shorter than one bin");
  return n;
}

}  // namespace

void DetectorModel::validate() const {
  check_fraction(efficiency, "detector efficiency");
  if (!(dark_rate >= 0.0)) throw InvalidInput("dark rate must be non-negative");
  if (!(jitter_fwhm >= 0.0)) throw InvalidInput("jitter must be non-negative");
}

void CountHistogram::validate() const {
  if (!(bin_width > 0.0)) throw InvalidInput("histogram bin width must be positive");
  if (!(acquisition_time >= 0.0)) throw InvalidInput("acquisition time must be non-negative");
}

std::uint64_t CountHistogram::total() const {
  std::uint64_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

CountHistogram CountHistogram::merged(const CountHistogram& other) const {
  if (other.t0 != t0 || other.bin_width != bin_width || other.counts.size() != counts.size()) {
    throw GridMismatch("histograms do not share bins");
  }
  CountHistogram h = *this;
  for (std::size_t i = 0; i < counts.size(); ++i) h.counts[i] += other.counts[i];
  h.acquisition_time += other.acquisition_time;
  h.n_trials += other.n_trials;
  return h;
}

void write_histogram_csv(const std::filesystem::path& path, const CountHistogram& h) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(12);
  out << "bin_start_s,counts\n";
  for (std::size_t i = 0; i < h.size(); ++i) out << h.bin_start(i) << ',' << h.counts[i] << '\n';
}

CountHistogram read_histogram_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("bin_start_s,counts", 0) != 0) throw InvalidInput(path.string() + ": unexpected header");
  std::vector<double> starts;
  CountHistogram h;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ss(line);
    double t = 0;
    char comma = 0;
    long long c = -1;
    if (!(ss >> t >> comma >> c) || comma != ',' || c < 0) {
      throw InvalidInput(path.string() + ": bad row " + std::to_string(row));
    }
    starts.push_back(t);
    h.counts.push_back(static_cast<std::uint64_t>(c));
  }
  if (starts.size() < 2) throw InsufficientDataError(path.string() + ": need at least two bins");
  h.t0 = starts.front();
  h.bin_width = (starts.back() - starts.front()) / static_cast<double>(starts.size() - 1);
  h.validate();
  return h;
}

SourceModel SourceModel::weak_coherent(double mu, double repetition_rate, double mode_fwhm) {
  SourceModel s;
  s.kind = SourceKind::weak_coherent;
  s.mu = mu;
  s.repetition_rate = repetition_rate;
  s.mode_fwhm = mode_fwhm;
  return s;
}

SourceModel SourceModel::single_emitter(double g2_0, double lifetime, double repetition_rate) {
  SourceModel s;
  s.kind = SourceKind::single_emitter;
  s.g2_0 = g2_0;
  s.lifetime = lifetime;
  s.repetition_rate = repetition_rate;
  return s;
}

void SourceModel::validate() const {
  if (!(repetition_rate > 0.0)) throw InvalidInput("repetition rate must be positive");
  if (kind == SourceKind::weak_coherent) {
    if (!(mu >= 0.0)) throw InvalidInput("mu must be non-negative");
    if (!(mode_fwhm > 0.0)) throw InvalidInput("mode FWHM must be positive");
  } else {
    if (!(g2_0 >= 0.0 && g2_0 < 1.0)) throw InvalidInput("g2_0 must lie in [0, 1)");
    if (!(lifetime > 0.0)) throw InvalidInput("lifetime must be positive");
  }
}

double SourceModel::photons_per_trial() const { return kind == SourceKind::weak_coherent ? mu : 1.0; }

void CountingSetup::validate() const {
  source.validate();
  detector.validate();
  check_fraction(channel_efficiency, "channel efficiency");
  check_fraction(memory_efficiency, "memory efficiency");
  if (!(acquisition > 0.0)) throw InvalidInput("acquisition time must be positive");
  if (!(bin_width > 0.0)) throw InvalidInput("bin width must be positive");
  if (!(echo_time >= 0.0 && echo_time < period())) {
    throw InvalidInput("echo time must lie within one repetition period");
  }
}

std::uint64_t CountingSetup::trials() const {
  return static_cast<std::uint64_t>(std::llround(acquisition * source.repetition_rate));
}

std::vector<double> expected_counts(const CountingSetup& s) {
  s.validate();
  const double period = s.period();
  const std::size_t n = bins_for(period, s.bin_width);
  const double signal = static_cast<double>(s.trials()) * s.source.photons_per_trial() * s.channel_efficiency *
                        s.memory_efficiency * s.detector.efficiency;
  const double dark = s.detector.dark_rate * s.acquisition * s.bin_width / period;
  const double jitter = s.detector.jitter_fwhm * kFwhmToSigma;

  std::vector<double> mean(n, dark);
  auto cdf = [&](double t) {
    if (s.source.kind == SourceKind::weak_coherent) {
      const double sigma = std::hypot(s.source.mode_fwhm * kFwhmToSigma, jitter);
      return gaussian_cdf(t, s.echo_time, sigma);
    }
    return models::emg_cdf(t, s.echo_time, jitter, s.source.lifetime);
  };
  if (signal > 0.0) {
    double prev = cdf(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double next = cdf(s.bin_width * static_cast<double>(i + 1));
      mean[i] += signal * (next - prev);
      prev = next;
    }
  }
  return mean;
}

CountHistogram simulate_counts(const CountingSetup& setup, std::uint64_t seed) {
  CountHistogram h;
  h.bin_width = setup.bin_width;
  h.counts = poisson_draw(expected_counts(setup), seed);
  h.acquisition_time = setup.acquisition;
  h.n_trials = setup.trials();
  return h;
}

SnrEstimate snr(const CountHistogram& h, TimeWindow sig, TimeWindow bg) {
  h.validate();
  if (!(sig.hi > sig.lo) || !(bg.hi > bg.lo)) throw InvalidInput("snr: windows need positive width");
  if (sig.lo < bg.hi && bg.lo < sig.hi) throw InvalidInput("snr: signal and background windows overlap");
  double s = 0.0, b = 0.0;
  std::size_t ns = 0, nb = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double c = h.bin_center(i);
    if (c >= sig.lo && c < sig.hi) {
      s += static_cast<double>(h.counts[i]);
      ++ns;
    } else if (c >= bg.lo && c < bg.hi) {
      b += static_cast<double>(h.counts[i]);
      ++nb;
    }
  }
  if (nb == 0) throw InvalidInput("snr: background window contains no bins");
  if (ns == 0) throw InvalidInput("snr: signal window contains no bins");
  SnrEstimate e;
  e.signal_counts = s;
  e.background_estimate = b * static_cast<double>(ns) / static_cast<double>(nb);
  if (e.background_estimate == 0.0) {
    e.value = kInfiniteSnr;
    e.warning = "background window holds no counts; SNR is unbounded";
  } else {
    e.value = (s - e.background_estimate) / e.background_estimate;
  }
  return e;
}

double timebin_fidelity(double s) {
  if (!(s >= 0.0)) throw InvalidInput("fidelity: snr must be non-negative");
  if (std::isinf(s)) return 1.0;
  return (s + 1.0) / (s + 2.0);
}

ClassicalBoundTable::ClassicalBoundTable() : ClassicalBoundTable({{0.0, 1e-3, 0.0, 0.05, 0.667}}) {}

ClassicalBoundTable::ClassicalBoundTable(std::vector<Entry> entries, double fallback)
    : entries_(std::move(entries)), fallback_(fallback) {
  for (const auto& e : entries_) {
    if (!(e.mu_lo <= e.mu_hi && e.eta_lo <= e.eta_hi)) throw InvalidInput("bound table: unordered ranges");
    if (!(e.bound >= 0.5 && e.bound <= 1.0)) throw InvalidInput("bound table: bound must lie in [0.5, 1]");
  }
}

double ClassicalBoundTable::operator()(double mu, double eta) const {
  if (!(mu > 0.0)) throw InvalidInput("classical bound: mu must be positive");
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidInput("classical bound: efficiency must lie in (0, 1]");
  for (const auto& e : entries_) {
    if (mu > e.mu_lo && mu <= e.mu_hi && eta > e.eta_lo && eta <= e.eta_hi) return e.bound;
  }
  return fallback_;
}

double classical_bound(double mu, double efficiency, const ClassicalBoundTable& table) { return table(mu, efficiency); }

double g2_out(double g2_in, double s) {
  if (!(g2_in >= 0.0)) throw InvalidInput("g2_out: g2_in must be non-negative");
  if (!(s >= 0.0)) throw InvalidInput("g2_out: snr must be non-negative");
  if (std::isinf(s)) return 1.0;
  return (1.0 + s * s + g2_in) / ((1.0 + s) * (1.0 + s));
}

double g2_cw_model(double t, double g2_0, double antibunch_time, double bunch_amplitude, double bunch_time) {
  if (!(antibunch_time > 0.0) || !(bunch_time > 0.0)) throw InvalidInput("g2 model: times must be positive");
  return models::g2_cw(t, g2_0, antibunch_time, bunch_amplitude, bunch_time);
}

double g2_pulsed_area_ratio(const CountHistogram& h, double period, double background_rate) {
  h.validate();
  if (!(period > 0.0)) throw InvalidInput("g2 pulsed: repetition period must be positive");
  if (h.span() < 5.0 * period * (1.0 - 1e-9)) {
    throw InsufficientDataError("g2 pulsed: histogram must span at least five repetition periods");
  }
  const double lo = h.t0;
  const double hi = h.t0 + h.span();
  const auto kmin = static_cast<long>(std::ceil((lo + 0.5 * period) / period - 1e-9));
  const auto kmax = static_cast<long>(std::floor((hi - 0.5 * period) / period + 1e-9));
  const double bg_per_bin = background_rate * h.bin_width;

  auto area = [&](long k) {
    const double a = (static_cast<double>(k) - 0.5) * period;
    const double b = (static_cast<double>(k) + 0.5) * period;
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double c = h.bin_center(i);
      if (c >= a && c < b) s += static_cast<double>(h.counts[i]) - bg_per_bin;
    }
    return s;
  };
  if (kmin > 0 || kmax < 0) throw InsufficientDataError("g2 pulsed: zero delay not covered");
  double side = 0.0;
  int n_side = 0;
  for (long k = kmin; k <= kmax; ++k) {
    if (k == 0) continue;
    side += area(k);
    ++n_side;
  }
  if (n_side < 2) throw InsufficientDataError("g2 pulsed: need at least two side peaks");
  side /= n_side;
  if (!(side > 0.0)) throw NumericalError("g2 pulsed: side peaks carry no counts above background");
  return area(0) / side;
}

double emg_model(double t, double amplitude, double gauss_mean, double gauss_sigma, double decay_tau) {
  if (!(gauss_sigma > 0.0) || !(decay_tau > 0.0)) throw InvalidInput("emg: sigma and tau must be positive");
  return models::emg(t, amplitude, gauss_mean, gauss_sigma, decay_tau);
}

FitResult fit_lifetime(const CountHistogram& h, double tail) {
  h.validate();
  if (h.size() < 8) throw InsufficientDataError("lifetime fit: histogram too short");
  const auto peak = static_cast<std::size_t>(std::max_element(h.counts.begin(), h.counts.end()) - h.counts.begin());
  const double t_peak = h.bin_center(peak);
  double dark = 0.0;
  std::size_t n_dark = 0;
  for (std::size_t i = 0; i < h.size() && h.bin_center(i) < t_peak - 2e-9; ++i) {
    dark += static_cast<double>(h.counts[i]);
    ++n_dark;
  }
  if (n_dark > 0) dark /= static_cast<double>(n_dark);
  std::vector<double> x, y, s;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double t = h.bin_center(i);
    if (t < t_peak - 2e-9 || t > t_peak + tail) continue;
    const double c = static_cast<double>(h.counts[i]);
    x.push_back(t);
    y.push_back(c - dark);
    s.push_back(std::sqrt(std::max(c, 1.0)));
  }
  const FitModel model(ModelKind::emg);
  return fit(model, x, y, s);
}

FitResult fit_g2_cw(const CountHistogram& h, bool with_bunching) {
  h.validate();
  std::vector<double> x, y, s;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double c = static_cast<double>(h.counts[i]);
    x.push_back(h.bin_center(i));
    y.push_back(c);
    s.push_back(std::sqrt(std::max(c, 1.0)));
  }
  FitModel model(ModelKind::g2_cw);
  FitOptions opt;
  auto p0 = initial_guess(model, x, y);
  if (!with_bunching) {
    p0[model.index("bunch_amplitude")] = 0.0;
    model.fix("bunch_amplitude").fix("bunch_time");
  }
  opt.initial = p0;
  return fit(model, x, y, s, opt);
}

CountHistogram synthesize_g2_cw(const G2CwSetup& s, std::uint64_t seed) {
  if (!(s.bin_width > 0.0) || !(s.max_delay > s.bin_width)) throw InvalidInput("g2 cw: bad delay axis");
  const std::size_t n = 2 * bins_for(s.max_delay, s.bin_width);
  const double level = s.rate_a * s.rate_b * s.bin_width * s.integration_time;
  CountHistogram h;
  h.t0 = -s.bin_width * static_cast<double>(n / 2);
  h.bin_width = s.bin_width;
  h.acquisition_time = s.integration_time;
  std::vector<double> mean(n);
  for (std::size_t i = 0; i < n; ++i) {
    mean[i] = level * g2_cw_model(h.bin_center(i), s.g2_0, s.antibunch_time, s.bunch_amplitude, s.bunch_time);
  }
  h.counts = poisson_draw(mean, seed);
  return h;
}

CountHistogram synthesize_g2_pulsed(const G2PulsedSetup& s, std::uint64_t seed) {
  if (s.peaks_each_side < 2) throw InvalidInput("g2 pulsed: need at least two side peaks each way");
  if (!(s.lifetime > 0.0) || !(s.repetition_period > 0.0)) throw InvalidInput("g2 pulsed: bad timing");
  const double half_span = (s.peaks_each_side + 0.5) * s.repetition_period;
  const std::size_t n = 2 * bins_for(half_span, s.bin_width);
  CountHistogram h;
  h.t0 = -s.bin_width * static_cast<double>(n / 2);
  h.bin_width = s.bin_width;
  // Two-sided exponential peak of unit area, integrated over each bin.
  auto peak_cdf = [&](double x) {
    return x < 0.0 ? 0.5 * std::exp(x / s.lifetime) : 1.0 - 0.5 * std::exp(-x / s.lifetime);
  };
  std::vector<double> mean(n, s.background_rate * s.bin_width);
  for (int k = -s.peaks_each_side; k <= s.peaks_each_side; ++k) {
    const double area = k == 0 ? s.area_ratio * s.side_peak_area : s.side_peak_area;
    const double c = k * s.repetition_period;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = h.bin_start(i) - c;
      mean[i] += area * (peak_cdf(a + s.bin_width) - peak_cdf(a));
    }
  }
  h.counts = poisson_draw(mean, seed);
  return h;
}

CountHistogram synthesize_lifetime(const LifetimeSetup& s, std::uint64_t seed) {
  if (!(s.lifetime > 0.0) || !(s.repetition_rate > 0.0)) throw InvalidInput("lifetime: bad timing");
  const double period = 1.0 / s.repetition_rate;
  const std::size_t n = bins_for(period, s.bin_width);
  const double sigma = s.jitter_fwhm * kFwhmToSigma;
  std::vector<double> mean(n, s.dark_counts / static_cast<double>(n));
  double prev = models::emg_cdf(0.0, s.onset, sigma, s.lifetime);
  for (std::size_t i = 0; i < n; ++i) {
    const double next = models::emg_cdf(s.bin_width * static_cast<double>(i + 1), s.onset, sigma, s.lifetime);
    mean[i] += s.total_counts * (next - prev);
    prev = next;
  }
  CountHistogram h;
  h.bin_width = s.bin_width;
  h.counts = poisson_draw(mean, seed);
  return h;
}

}  // namespace afcmem
