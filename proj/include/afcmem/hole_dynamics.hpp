#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "afcmem/spectral.hpp"

namespace afcmem {

/// Optical pumping that moves ground-state population into the auxiliary
/// reservoir. `pump_spectrum` holds dimensionless weights (peak 1).
struct PumpModel {
  double pump_rate_peak = 0.0;      // Hz
  double homogeneous_width = 1e6;   // Hz, Lorentzian FWHM
  double branching_to_aux = 1.0;    // fraction of excitations that end in AUX
  SpectralProfile pump_spectrum;

  void validate() const;
};

/// Two persistence classes with weights and spin-population lifetimes.
/// A(t) = w1 exp(-t/t1sa) + w2 exp(-t/t1sb)
struct PersistenceModel {
  double w1 = 0.59;
  double t1sa = 6.75;
  double w2 = 0.348;
  double t1sb = 385.0;

  void validate() const;
  double hole_area(double t) const;
  /// Share of pumped population that lands in class 1 (class 2 gets the rest).
  double class1_share() const { return w1 / (w1 + w2); }
};

/// Per-frequency fractions in the ground and the two auxiliary reservoirs.
/// The excited state is adiabatically eliminated; the three fractions sum to 1.
class PopulationState {
 public:
  PopulationState(FrequencyGrid grid, std::vector<double> ground, std::vector<double> aux1,
                  std::vector<double> aux2);

  /// Everything in the ground state.
  static PopulationState thermal(const FrequencyGrid& grid);

  const FrequencyGrid& grid() const { return grid_; }
  const std::vector<double>& ground() const { return ground_; }
  const std::vector<double>& aux1() const { return aux1_; }
  const std::vector<double>& aux2() const { return aux2_; }
  std::size_t size() const { return ground_.size(); }

 private:
  FrequencyGrid grid_;
  std::vector<double> ground_;
  std::vector<double> aux1_;
  std::vector<double> aux2_;
};

/// Pumping rate R(nu): pump spectrum convolved with the homogeneous
/// Lorentzian, rescaled so its maximum equals pump_rate_peak.
std::vector<double> pump_rate_profile(const PumpModel& pump);

/// Convolution of `weights` with a unit-peak Lorentzian of FWHM `fwhm`
/// (in Hz) on the grid, truncated at the grid extent. FFT-based.
std::vector<double> lorentzian_convolve(const FrequencyGrid& grid, std::span<const double> weights,
                                        double fwhm);

/// Pump for `duration` seconds; solved exactly per grid point.
PopulationState burn(const PopulationState& state, const PumpModel& pump,
                     const PersistenceModel& persistence, double duration);

/// Dark relaxation of both auxiliary classes for `wait` seconds.
PopulationState decay(const PopulationState& state, const PersistenceModel& persistence,
                      double wait);

/// od(nu) = reference_od(nu) * ground(nu).
SpectralProfile population_to_od(const PopulationState& state, const SpectralProfile& reference_od);

/// Integrated hole area sum(reference * (1 - ground)) * spacing, in OD*Hz.
double hole_area(const PopulationState& state, const SpectralProfile& reference_od);

/// Full width at half maximum (Hz) of the depletion 1 - ground, with linear
/// interpolation of the half-level crossings. Zero when nothing is depleted.
double hole_fwhm(const PopulationState& state);

/// Ground fraction left at the pumped line centre after pumping at a constant
/// rate `rate` for `duration` from the thermal state.
double ground_after_constant_pump(double rate, double branching, const PersistenceModel& persistence,
                                  double duration);

/// Branching ratio into AUX for which a burn at `pump_rate_peak` for `duration`
/// leaves `target_ground` at line centre. Throws InvalidInput if unreachable.
double calibrate_branching(double pump_rate_peak, const PersistenceModel& persistence,
                           double duration, double target_ground);

/// Power in serrodyne sideband orders -3..+3 of exp(i * amplitude * sawtooth).
struct SidebandSpectrum {
  static constexpr int kMaxOrder = 3;
  double ramp_frequency = 0.0;
  std::array<double, 2 * kMaxOrder + 1> power{};

  double order_power(int order) const { return power.at(static_cast<std::size_t>(order + kMaxOrder)); }
  double order_frequency(int order) const { return order * ramp_frequency; }
  /// 10 log10(P_order / P_+1); negative values mean suppression.
  double relative_db(int order) const;
};

SidebandSpectrum serrodyne_spectrum(double ramp_frequency, double ramp_amplitude,
                                    std::size_t n_samples);

}  // namespace afcmem
