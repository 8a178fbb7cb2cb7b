#include "afcmem/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include "afcmem/errors.hpp"
#include "afcmem/fft.hpp"
#include "afcmem/random.hpp"

namespace afcmem {

namespace {

std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

}  // namespace

void EchoDecayModel::validate() const {
  if (!(i0 > 0.0)) throw InvalidInput("echo decay: i0 must be positive");
  if (!(t2o > 0.0)) throw InvalidInput("echo decay: t2o must be positive");
}

double echo_intensity(const EchoDecayModel& model, double t12) {
  model.validate();
  if (!(t12 >= 0.0)) throw InvalidInput("echo decay: t12 must be non-negative");
  return model.i0 * std::exp(-4.0 * t12 / model.t2o);
}

double t2o_for_field(double tesla) {
  if (std::abs(tesla - 0.03) < 1e-6) return 2.0e-6;
  if (std::abs(tesla - 0.06) < 1e-6 || std::abs(tesla - 0.09) < 1e-6) return 2.6e-6;
  throw InvalidInput("no coherence time recorded for this field; use 0.03, 0.06 or 0.09 T");
}

TemporalWaveform synthesize_heterodyne(double echo_amplitude, const HeterodyneConfig& c, std::uint64_t seed) {
  if (!(c.sample_rate > 2.0 * c.beat_frequency)) {
    throw NyquistError("heterodyne: sample rate must exceed twice the beat frequency");
  }
  if (!(c.duration > 0.0)) throw InvalidInput("heterodyne: duration must be positive");
  if (!(c.noise_rms >= 0.0)) throw InvalidInput("heterodyne: noise rms must be non-negative");
  const auto n = static_cast<std::size_t>(std::llround(c.duration * c.sample_rate));
  const double dt = 1.0 / c.sample_rate;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<std::complex<double>> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = dt * static_cast<double>(i);
    double v = echo_amplitude * std::cos(2.0 * std::numbers::pi * c.beat_frequency * t + c.phase);
    if (c.noise_rms > 0.0) v += c.noise_rms * noise(rng);
    s[i] = v;
  }
  return TemporalWaveform(0.0, dt, std::move(s));
}

double extract_echo_amplitude(const TemporalWaveform& signal, double beat_frequency) {
  const std::size_t n = signal.size();
  const double dt = signal.dt();
  if (!(beat_frequency > 0.0)) throw InvalidInput("extract: beat frequency must be positive");
  if (!(0.5 / dt > beat_frequency)) throw NyquistError("extract: beat frequency above Nyquist");
  if (signal.duration() * beat_frequency < 10.0) {
    throw InsufficientDataError("extract: record shorter than ten beat periods");
  }
  const auto w = hann(n);
  double wsum = 0.0;
  fft::cvec buf(n);
  for (std::size_t i = 0; i < n; ++i) {
    buf[i] = w[i] * signal.samples()[i].real();
    wsum += w[i];
  }
  fft::forward(buf);
  const double df = 1.0 / (static_cast<double>(n) * dt);
  auto k0 = static_cast<std::size_t>(std::llround(beat_frequency / df));
  k0 = std::clamp<std::size_t>(k0, 1, n / 2 - 1);
  // Refine to the local maximum among the neighbours.
  std::size_t k = k0;
  for (std::size_t j : {k0 - 1, k0 + 1}) {
    if (std::abs(buf[j]) > std::abs(buf[k])) k = j;
  }
  k = std::clamp<std::size_t>(k, 1, n / 2 - 1);
  const double a = std::log(std::abs(buf[k - 1]) + 1e-300);
  const double b = std::log(std::abs(buf[k]) + 1e-300);
  const double c = std::log(std::abs(buf[k + 1]) + 1e-300);
  const double den = a - 2.0 * b + c;
  double shift = den < 0.0 ? 0.5 * (a - c) / den : 0.0;
  shift = std::clamp(shift, -0.5, 0.5);
  const double f = (static_cast<double>(k) + shift) * df;
  // Windowed DTFT at the refined frequency.
  std::complex<double> acc = 0.0;
  const double omega = -2.0 * std::numbers::pi * f * dt;
  for (std::size_t i = 0; i < n; ++i) {
    acc += w[i] * signal.samples()[i].real() * std::polar(1.0, omega * static_cast<double>(i));
  }
  return 2.0 * std::abs(acc) / wsum;
}

double amplitude_noise_sigma(double noise_rms, std::size_t n_samples) {
  const auto w = hann(n_samples);
  double s1 = 0.0, s2 = 0.0;
  for (double v : w) {
    s1 += v;
    s2 += v * v;
  }
  // Real and imaginary parts each carry variance noise^2 s2 / 2.
  return noise_rms * 2.0 * std::sqrt(0.5 * s2) / s1;
}

TemporalWaveform average_traces(std::span<const TemporalWaveform> traces) {
  if (traces.empty()) throw InvalidInput("average: no traces");
  const auto& first = traces.front();
  std::vector<std::complex<double>> acc(first.size());
  for (const auto& t : traces) {
    if (t.size() != first.size() || t.dt() != first.dt() || t.t0() != first.t0()) {
      throw GridMismatch("average: traces do not share a time grid");
    }
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += t.samples()[i];
  }
  const double inv = 1.0 / static_cast<double>(traces.size());
  for (auto& v : acc) v *= inv;
  return TemporalWaveform(first.t0(), first.dt(), std::move(acc));
}

std::vector<HahnSequence::Event> HahnSequence::timeline() const {
  if (!(t12 > pi2_duration)) throw InvalidInput("hahn: t12 must exceed the pi/2 duration");
  return {{"pi/2", 0.0, pi2_duration}, {"pi", t12, pi_duration}, {"echo", echo_time(), 0.0}};
}

EchoDecayMeasurement measure_echo_decay(const EchoDecayConfig& config) {
  config.truth.validate();
  if (config.t12.size() < 3) throw InsufficientDataError("echo decay: need at least three t12 points");
  if (config.averages == 0) throw InvalidInput("echo decay: averages must be at least 1");
  if (!(config.min_snr > 0.0)) throw InvalidInput("echo decay: min_snr must be positive");

  EchoDecayMeasurement m;
  m.t12 = config.t12;
  double weakest = std::numeric_limits<double>::infinity();
  for (double t : config.t12) weakest = std::min(weakest, std::sqrt(echo_intensity(config.truth, t)));

  HeterodyneConfig het = config.heterodyne;
  const auto n = static_cast<std::size_t>(std::llround(het.duration * het.sample_rate));
  const double unit_sigma = amplitude_noise_sigma(1.0, n);
  // Averaged sigma = noise * unit_sigma / sqrt(averages) = weakest / min_snr.
  het.noise_rms = weakest / config.min_snr * std::sqrt(static_cast<double>(config.averages)) / unit_sigma;
  m.noise_rms = het.noise_rms;
  const double sigma_a = het.noise_rms * unit_sigma / std::sqrt(static_cast<double>(config.averages));

  for (std::size_t p = 0; p < config.t12.size(); ++p) {
    const double amp = std::sqrt(echo_intensity(config.truth, config.t12[p]));
    std::vector<TemporalWaveform> shots;
    shots.reserve(config.averages);
    for (std::size_t r = 0; r < config.averages; ++r) {
      shots.push_back(synthesize_heterodyne(amp, het, stream_seed(config.seed, p, r)));
    }
    const double a = extract_echo_amplitude(average_traces(shots), het.beat_frequency);
    m.amplitude.push_back(a);
    m.intensity.push_back(a * a);
    m.sigma.push_back(2.0 * std::max(a, sigma_a) * sigma_a);
  }

  m.fit = fit(FitModel(ModelKind::echo_decay), m.t12, m.intensity, std::span<const double>(m.sigma));
  m.t2o = m.fit.value("t2o");
  m.t2o_sigma = m.fit.sigma("t2o");
  return m;
}

void write_decay_csv(const std::filesystem::path& path, const EchoDecayMeasurement& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(10);
  out << "t12_s,intensity,sigma\n";
  for (std::size_t i = 0; i < m.t12.size(); ++i) {
    out << m.t12[i] << ',' << m.intensity[i] << ',' << m.sigma[i] << '\n';
  }
}

}  // namespace afcmem
