#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "afcmem/fitting.hpp"

namespace afcmem {

struct DetectorModel {
  double efficiency = 1.0;
  double dark_rate = 200.0;  // Hz
  double jitter_fwhm = 0.0;  // s
  /// Timeline channel that gates the detector; darks accrue only while open.
  std::string gate_channel = "snspd_gate";

  void validate() const;
};

/// Time-tagged counts in bins [t0 + i w, t0 + (i+1) w).
struct CountHistogram {
  double t0 = 0.0;
  double bin_width = 0.0;
  std::vector<std::uint64_t> counts;
  double acquisition_time = 0.0;
  std::uint64_t n_trials = 0;

  void validate() const;
  std::size_t size() const { return counts.size(); }
  double bin_start(std::size_t i) const { return t0 + bin_width * static_cast<double>(i); }
  double bin_center(std::size_t i) const { return t0 + bin_width * (static_cast<double>(i) + 0.5); }
  double span() const { return bin_width * static_cast<double>(counts.size()); }
  std::uint64_t total() const;

  /// Sum of histograms recorded on the same bins.
  CountHistogram merged(const CountHistogram& other) const;
};

void write_histogram_csv(const std::filesystem::path& path, const CountHistogram& h);
CountHistogram read_histogram_csv(const std::filesystem::path& path);

enum class SourceKind { weak_coherent, single_emitter };

struct SourceModel {
  SourceKind kind = SourceKind::weak_coherent;
  double mu = 0.0;              // weak coherent: mean photon number per mode
  double mode_fwhm = 320e-12;   // weak coherent: Gaussian intensity FWHM
  double g2_0 = 0.0;            // single emitter
  double lifetime = 3.08e-9;    // single emitter: exponential decay
  double repetition_rate = 4e6;

  static SourceModel weak_coherent(double mu, double repetition_rate, double mode_fwhm = 320e-12);
  static SourceModel single_emitter(double g2_0, double lifetime, double repetition_rate);
  void validate() const;
  /// Mean photons per trial leaving the source.
  double photons_per_trial() const;
};

/// One storage-and-recall counting experiment, histogrammed over a single
/// repetition period starting at t = 0.
struct CountingSetup {
  SourceModel source;
  double channel_efficiency = 1.0;
  DetectorModel detector;
  double echo_time = 0.0;
  double memory_efficiency = 0.0;
  double acquisition = 0.0;  // detector live time, s
  double bin_width = 50e-12;

  void validate() const;
  double period() const { return 1.0 / source.repetition_rate; }
  std::uint64_t trials() const;
};

/// Expected counts per bin: recalled profile convolved with jitter, plus
/// uniform darks.
std::vector<double> expected_counts(const CountingSetup& setup);

/// Poisson draw around expected_counts(); bit-exact for a fixed seed.
CountHistogram simulate_counts(const CountingSetup& setup, std::uint64_t seed);

struct TimeWindow {
  double lo;
  double hi;
};

struct SnrEstimate {
  double value = 0.0;
  double signal_counts = 0.0;
  double background_estimate = 0.0;  // scaled to the signal window width
  std::string warning;
};

/// (S - B) / B with B the background-window counts scaled by the ratio of
/// window widths. Bins are assigned by centre.
SnrEstimate snr(const CountHistogram& h, TimeWindow signal_window, TimeWindow background_window);

/// (S + 1) / (S + 2)
double timebin_fidelity(double snr);

/// Classical fidelity bound looked up by (mu, efficiency).
class ClassicalBoundTable {
 public:
  struct Entry {
    double mu_lo, mu_hi;
    double eta_lo, eta_hi;
    double bound;
  };

  ClassicalBoundTable();  // one entry covering mu <= 1e-3, eta <= 0.05 at 0.667
  explicit ClassicalBoundTable(std::vector<Entry> entries, double fallback = 0.667);

  double operator()(double mu, double efficiency) const;

 private:
  std::vector<Entry> entries_;
  double fallback_;
};

double classical_bound(double mu, double efficiency, const ClassicalBoundTable& table = {});

inline bool beats_classical(double fidelity, double bound) { return fidelity > bound; }

/// (1 + S^2 + g2_in) / (1 + S)^2
double g2_out(double g2_in, double snr);

double g2_cw_model(double t, double g2_0, double antibunch_time, double bunch_amplitude, double bunch_time);

/// Background-subtracted central-peak area over the mean side-peak area of a
/// coincidence histogram on a delay axis. background_rate is coincidences per
/// second of delay.
double g2_pulsed_area_ratio(const CountHistogram& h, double repetition_period, double background_rate);

double emg_model(double t, double amplitude, double gauss_mean, double gauss_sigma, double decay_tau);

/// EMG fit of a lifetime histogram. The dark level is taken from the bins
/// more than 2 ns before the peak and subtracted; the fit covers the peak
/// from 2 ns before it to `tail` after it. Poisson weights.
FitResult fit_lifetime(const CountHistogram& h, double tail = 40e-9);

/// Fit of g2_cw_model (times a free normalization) to a CW coincidence
/// histogram. Without bunching the bunching term is pinned at zero.
FitResult fit_g2_cw(const CountHistogram& h, bool with_bunching = false);

/// Coincidences of a CW-excited emitter. Long-delay level per bin is
/// rate_a * rate_b * bin_width * integration_time.
struct G2CwSetup {
  double g2_0 = 0.072;
  double antibunch_time = 0.6e-9;
  double bunch_amplitude = 0.0;
  double bunch_time = 10e-9;
  double rate_a = 5e4;
  double rate_b = 5e4;
  double integration_time = 7.5 * 3600.0;
  double bin_width = 100e-12;
  double max_delay = 50e-9;
};
CountHistogram synthesize_g2_cw(const G2CwSetup& setup, std::uint64_t seed);

/// Coincidences of a pulsed emitter: two-sided exponential peaks every period.
struct G2PulsedSetup {
  double area_ratio = 0.207;
  double repetition_period = 100e-9;
  double lifetime = 3.08e-9;
  double side_peak_area = 2e4;
  double background_rate = 1e11;  // coincidences per second of delay
  int peaks_each_side = 3;
  double bin_width = 100e-12;
};
CountHistogram synthesize_g2_pulsed(const G2PulsedSetup& setup, std::uint64_t seed);

/// Lifetime histogram over one repetition period: EMG of the emitter decay
/// and detector jitter plus uniform darks.
struct LifetimeSetup {
  double lifetime = 3.08e-9;
  double repetition_rate = 10e6;
  double jitter_fwhm = 50e-12;
  double onset = 10e-9;
  double total_counts = 1e6;
  double dark_counts = 0.0;  // over the whole period
  double bin_width = 50e-12;
};
CountHistogram synthesize_lifetime(const LifetimeSetup& setup, std::uint64_t seed);

inline constexpr double kInfiniteSnr = std::numeric_limits<double>::infinity();

}  // namespace afcmem
