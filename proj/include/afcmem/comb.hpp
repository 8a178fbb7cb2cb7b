#pragma once

#include <cstddef>
#include <string>

#include "afcmem/spectral.hpp"

namespace afcmem {

enum class ToothShape { square, gaussian };

std::string to_string(ToothShape shape);
ToothShape tooth_shape_from_string(const std::string& name);

/// Parametric atomic frequency comb.
///
/// N = bandwidth / tooth_spacing teeth of linewidth tooth_spacing / finesse sit
/// inside [center - bandwidth/2, center + bandwidth/2]. Teeth have optical depth
/// peak_od and the troughs background_od.
struct CombSpec {
  double tooth_spacing = 0.0;  // Hz
  double bandwidth = 0.0;      // Hz
  double finesse = 2.0;
  double peak_od = 1.1;
  double background_od = 0.05;
  ToothShape tooth_shape = ToothShape::square;
  double center_offset = 0.0;  // Hz

  /// Spacing from the target storage time, t_s = 1 / spacing.
  static CombSpec for_storage_time(double storage_time, double bandwidth);

  void validate() const;
  std::size_t n_teeth() const;
  double tooth_width() const { return tooth_spacing / finesse; }
};

/// Synthesized optical depth. Outside the comb band the reference profile
/// (flat peak_od when omitted) is left untouched.
SpectralProfile synthesize(const CombSpec& spec, const FrequencyGrid& grid);
SpectralProfile synthesize(const CombSpec& spec, const SpectralProfile& reference);

double storage_time(const CombSpec& spec);

/// (d/F)^2 exp(-d/F) sinc^2(pi/F) exp(-d0).
double analytic_efficiency(double peak_od, double finesse, double background_od);
double analytic_efficiency(const CombSpec& spec);

struct CombMetrics {
  double tooth_spacing = 0.0;
  double finesse = 0.0;
  double peak_od = 0.0;
  double background_od = 0.0;
  double bandwidth = 0.0;
  std::size_t n_teeth = 0;
};

/// Recovers comb parameters from a profile: the tooth period from the
/// autocorrelation, refined by the band extent; levels from the medians of the
/// per-tooth maxima and per-trough minima.
CombMetrics comb_metrics(const SpectralProfile& profile);

}  // namespace afcmem
