#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "afcmem/spectral.hpp"

namespace afcmem {

/// Complex field envelope sampled at t0 + i*dt.
///
/// Frequency convention: the field is E(t) = int S(nu) exp(-2 pi i nu t) dnu,
/// so a causal response has its poles in the lower half plane of nu. All
/// spectra in this library follow that convention.
class TemporalWaveform {
 public:
  TemporalWaveform(double t0, double dt, std::vector<std::complex<double>> samples);

  double t0() const { return t0_; }
  double dt() const { return dt_; }
  std::size_t size() const { return samples_.size(); }
  double time(std::size_t i) const { return t0_ + dt_ * static_cast<double>(i); }
  double duration() const { return dt_ * static_cast<double>(samples_.size()); }
  const std::vector<std::complex<double>>& samples() const { return samples_; }

  /// sum |s|^2 dt
  double energy() const;
  /// Energy between t_lo and t_hi (sample centres inside the interval).
  double energy_between(double t_lo, double t_hi) const;

  /// Zero-padded to the next power of two.
  TemporalWaveform padded() const;
  TemporalWaveform scaled(std::complex<double> factor) const;
  TemporalWaveform operator+(const TemporalWaveform& other) const;

 private:
  double t0_;
  double dt_;
  std::vector<std::complex<double>> samples_;
};

/// Gaussian intensity pulse with the given FWHM, unit peak field amplitude.
TemporalWaveform gaussian_pulse(double center, double fwhm, double t0, double dt, std::size_t n);

/// Frequency grid matching the DFT bins of an n-sample record with step dt,
/// ordered from -n/2 to n/2-1 bins.
FrequencyGrid fft_frequency_grid(std::size_t n, double dt);

/// Linear filter with a ComplexResponse mapped onto a fixed time grid.
/// Build once, apply to many waveforms sharing (n, dt).
class Propagator {
 public:
  Propagator(const ComplexResponse& response, std::size_t n, double dt);

  /// Throws BandwidthError when more than a 1e-10 energy fraction of the
  /// input spectrum falls outside the response grid.
  TemporalWaveform operator()(const TemporalWaveform& input) const;

  std::size_t size() const { return transfer_.size(); }
  double dt() const { return dt_; }

 private:
  double dt_;
  std::vector<std::complex<double>> transfer_;  // per DFT bin
  std::vector<bool> covered_;                   // bin inside the response grid
};

/// output = IFFT(FFT(input) * amplitude_transfer), input zero-padded to 2^k.
TemporalWaveform propagate(const TemporalWaveform& input, const ComplexResponse& response);

/// Output energy inside echo_center +- window/2 over total input energy.
/// Throws WindowOverlapError if the echo window overlaps the span where the
/// input carries energy above 1e-6 of its peak intensity.
double echo_efficiency(const TemporalWaveform& input, const TemporalWaveform& output,
                       double echo_center, double window);

/// Default echo window: four times the mode FWHM.
inline double default_echo_window(double mode_fwhm) { return 4.0 * mode_fwhm; }

/// Train of Gaussian temporal modes. `mode_spacing` is the gap between
/// consecutive modes, so modes repeat every mode_fwhm + mode_spacing.
struct ModeTrain {
  std::size_t n_modes = 1;
  double mode_fwhm = 320e-12;
  double mode_spacing = 1.12e-9;
  std::vector<double> amplitude_pattern;  // empty = all ones
  double first_center = 2e-9;

  void validate() const;
  double period() const { return mode_fwhm + mode_spacing; }
  double center(std::size_t i) const { return first_center + period() * static_cast<double>(i); }
  double amplitude(std::size_t i) const;
  double duration() const { return period() * static_cast<double>(n_modes); }
};

/// Number of modes of duration `mode_duration` separated by gaps of
/// `mode_spacing` that fit within `storage_time`.
std::size_t mode_capacity(double storage_time, double mode_duration, double mode_spacing);

struct TrainStorageResult {
  TemporalWaveform input;
  TemporalWaveform output;
  double storage_time = 0.0;
  std::vector<double> per_mode_efficiency;
  /// cross_talk[i][j]: energy of mode i (alone, unit amplitude) found in
  /// recall slot j, normalized by that mode's input energy.
  std::vector<std::vector<double>> cross_talk;
  /// For each recall slot, the input mode that dominates it.
  std::vector<std::size_t> recalled_order;
  /// Recalled slot energies of the full train, divided by the mode efficiency.
  std::vector<double> recalled_pattern;
  /// max over i != j of 10 log10(cross_talk[i][j] / cross_talk[i][i]).
  double max_cross_talk_db = 0.0;
};

/// Stores a mode train in a comb with the given storage time. The time grid is
/// derived from the response grid (dt = 1 / (n * spacing)).
TrainStorageResult store_train(const ModeTrain& train, const ComplexResponse& response,
                               double storage_time);

/// Optical depth of a square spectral hole of `hole_width` burned into a flat
/// line of `line_od`, with `transfer_fraction` of the population removed.
struct HoleShape {
  double line_od = 1.1;
  double transfer_fraction = 0.86;
};

/// Transmitted fraction of the emitter spectrum for each scan offset of the
/// hole centre, normalized by the emitter's integrated weight.
std::vector<double> hole_scan_match(const SpectralProfile& emitter_line, double hole_width,
                                    const std::vector<double>& scan_offsets, const HoleShape& hole = {});

/// Width between the interpolated half-level crossings of a scan profile
/// (half-way between its minimum and maximum).
double plateau_width(const std::vector<double>& offsets, const std::vector<double>& transmission);

/// Unit-peak Lorentzian emission line of FWHM `fwhm` centred at `center`.
SpectralProfile lorentzian_line(const FrequencyGrid& grid, double center, double fwhm);

/// CSV with columns time_s,re,im.
void write_waveform_csv(const std::filesystem::path& path, const TemporalWaveform& waveform);

}  // namespace afcmem
