#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace afcmem {

/// Uniform grid of detunings (Hz) from the laser reference frequency.
class FrequencyGrid {
 public:
  FrequencyGrid(double center_offset, double span, std::size_t n_points);

  /// Grid starting at `start` with `n_points` samples `spacing` apart.
  static FrequencyGrid from_start(double start, double spacing, std::size_t n_points);

  double center_offset() const { return center_offset_; }
  double span() const { return span_; }
  std::size_t size() const { return n_points_; }
  double spacing() const { return span_ / static_cast<double>(n_points_ - 1); }
  double start() const { return center_offset_ - 0.5 * span_; }
  double stop() const { return center_offset_ + 0.5 * span_; }
  double operator[](std::size_t i) const { return start() + spacing() * static_cast<double>(i); }
  std::vector<double> values() const;

  /// Index of the grid point closest to `nu`, clamped to the grid.
  std::size_t nearest_index(double nu) const;

  bool operator==(const FrequencyGrid&) const = default;

 private:
  double center_offset_;
  double span_;
  std::size_t n_points_;
};

/// Non-negative optical depth d(nu) sampled on a FrequencyGrid.
class SpectralProfile {
 public:
  SpectralProfile(FrequencyGrid grid, std::vector<double> od);

  /// Constant optical depth everywhere on the grid.
  static SpectralProfile flat(const FrequencyGrid& grid, double od);

  const FrequencyGrid& grid() const { return grid_; }
  const std::vector<double>& od() const { return od_; }
  double operator[](std::size_t i) const { return od_[i]; }
  std::size_t size() const { return od_.size(); }

 private:
  FrequencyGrid grid_;
  std::vector<double> od_;
};

/// Linear amplitude transfer function of a passive medium.
class ComplexResponse {
 public:
  ComplexResponse(FrequencyGrid grid, std::vector<std::complex<double>> amplitude_transfer);

  static ComplexResponse identity(const FrequencyGrid& grid);

  const FrequencyGrid& grid() const { return grid_; }
  const std::vector<std::complex<double>>& amplitude_transfer() const { return transfer_; }
  std::size_t size() const { return transfer_.size(); }

  /// Phase of the transfer at each grid point (radians).
  std::vector<double> phase() const;

 private:
  FrequencyGrid grid_;
  std::vector<std::complex<double>> transfer_;
};

/// An intensity spectrum (before or after the sample) on a uniform grid.
struct MeasuredSpectrum {
  FrequencyGrid grid;
  std::vector<double> intensity;
};

/// Per-point intensity transmission loss_factor * exp(-od).
std::vector<double> beer_lambert_transmission(const SpectralProfile& profile, double loss_factor);

/// Same as above on raw optical depths; rejects non-finite or negative values.
std::vector<double> beer_lambert_transmission(std::span<const double> od, double loss_factor);

struct OdExtraction {
  SpectralProfile profile;
  /// Number of points whose raw optical depth was negative and clamped to 0.
  std::size_t clamp_count = 0;
};

/// Optical depth -ln(i_out / (loss_factor * i_in)) clamped at zero.
OdExtraction extract_od(const MeasuredSpectrum& i_in, const MeasuredSpectrum& i_out,
                        double loss_factor);

/// Hilbert transform (1/pi) p.v. int f(y)/(x-y) dy of uniformly sampled data.
/// The data is extended by tapered mirror images to at least four times its
/// length before the FFT so the periodic wrap-around stays far from the data.
std::vector<double> hilbert_transform(std::span<const double> samples);

/// Causal transfer exp(-d/2 + i*phi) with phi = H[-d/2].
ComplexResponse kramers_kronig_phase(const SpectralProfile& profile);

/// Reads a two-column CSV (frequency_hz_detuning, intensity) with a header row.
/// The frequency column must be uniformly spaced.
MeasuredSpectrum read_spectrum_csv(const std::filesystem::path& path);

void write_spectrum_csv(const std::filesystem::path& path, const FrequencyGrid& grid,
                        std::span<const double> values, const char* value_header);

}  // namespace afcmem
