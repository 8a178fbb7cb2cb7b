#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "afcmem/fitting.hpp"
#include "afcmem/propagation.hpp"

namespace afcmem {

/// I(t12) = i0 exp(-4 t12 / t2o)
struct EchoDecayModel {
  double i0 = 1.0;
  double t2o = 2.6e-6;

  void validate() const;
};

double echo_intensity(const EchoDecayModel& model, double t12);

/// Coherence time used for a given magnetic field label (0.03, 0.06, 0.09 T).
double t2o_for_field(double tesla);

struct HeterodyneConfig {
  double beat_frequency = 85e6;
  double duration = 1e-6;
  double sample_rate = 2e9;
  double noise_rms = 0.0;
  double phase = 0.0;
};

/// Real beat signal A cos(2 pi f t + phase) over a rectangular echo window
/// plus white Gaussian noise, stored in the real part of the waveform.
TemporalWaveform synthesize_heterodyne(double echo_amplitude, const HeterodyneConfig& config, std::uint64_t seed);

/// Hann-windowed spectrum; the peak near beat_frequency is located with a
/// three-bin log-parabola and the amplitude read at that frequency.
double extract_echo_amplitude(const TemporalWaveform& signal, double beat_frequency);

/// Standard deviation of extract_echo_amplitude() caused by white noise of
/// the given rms in an n-sample record.
double amplitude_noise_sigma(double noise_rms, std::size_t n_samples);

/// Sample-wise mean of traces sharing one time grid.
TemporalWaveform average_traces(std::span<const TemporalWaveform> traces);

/// Two-pulse sequence. Pulse start times are relative to the pi/2 pulse.
struct HahnSequence {
  double pi2_duration = 25e-9;
  double pi_duration = 50e-9;
  double t12 = 1e-6;

  struct Event {
    std::string name;
    double start;
    double duration;
  };
  std::vector<Event> timeline() const;
  double echo_time() const { return 2.0 * t12; }
};

struct EchoDecayConfig {
  EchoDecayModel truth;
  std::vector<double> t12;
  HeterodyneConfig heterodyne;
  std::size_t averages = 20;
  /// Amplitude SNR of the weakest averaged point; sets the noise level.
  double min_snr = 10.0;
  std::uint64_t seed = 1;
};

struct EchoDecayMeasurement {
  std::vector<double> t12;
  std::vector<double> amplitude;
  std::vector<double> intensity;  // amplitude^2
  std::vector<double> sigma;      // of intensity
  double noise_rms = 0.0;
  FitResult fit;
  double t2o = 0.0;
  double t2o_sigma = 0.0;
};

/// Synthesize, average, extract, square and fit the echo decay.
EchoDecayMeasurement measure_echo_decay(const EchoDecayConfig& config);

/// CSV with columns t12_s,intensity,sigma.
void write_decay_csv(const std::filesystem::path& path, const EchoDecayMeasurement& m);

}  // namespace afcmem
