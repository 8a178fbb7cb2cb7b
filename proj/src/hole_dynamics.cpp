#include "afcmem/hole_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "afcmem/errors.hpp"
#include "afcmem/fft.hpp"

namespace afcmem {

namespace {

constexpr double kNormTolerance = 1e-12;

struct Fractions {
  double ground;
  double aux1;
  double aux2;
};

// Exact solution of the linear system
//   da_i/dt = p_i k g - a_i / T_i,   g = 1 - a_1 - a_2
// with constant pumping k. The 2x2 system matrix has real negative
// eigenvalues (it describes a reversible three-state chain).
Fractions evolve_point(Fractions f, double k, double share1, double t1, double t2, double duration) {
  if (k <= 0.0) {
    const double a1 = f.aux1 * std::exp(-duration / t1);
    const double a2 = f.aux2 * std::exp(-duration / t2);
    return {1.0 - a1 - a2, a1, a2};
  }
  const double p1 = share1;
  const double p2 = 1.0 - share1;
  const double m11 = -k * p1 - 1.0 / t1;
  const double m12 = -k * p1;
  const double m21 = -k * p2;
  const double m22 = -k * p2 - 1.0 / t2;

  // Steady state: g_ss = 1 / (1 + k (p1 T1 + p2 T2)), a_i = p_i k g_ss T_i.
  const double g_ss = 1.0 / (1.0 + k * (p1 * t1 + p2 * t2));
  const double s1 = p1 * k * g_ss * t1;
  const double s2 = p2 * k * g_ss * t2;

  const double d1 = f.aux1 - s1;
  const double d2 = f.aux2 - s2;

  // exp(M t) for a 2x2 matrix with distinct real eigenvalues.
  const double tr = m11 + m22;
  const double det = m11 * m22 - m12 * m21;
  const double disc = std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
  const double l1 = 0.5 * tr + disc;
  const double l2 = 0.5 * tr - disc;
  const double e1 = std::exp(l1 * duration);
  const double e2 = std::exp(l2 * duration);
  double c0;  // coefficient of identity
  double c1;  // coefficient of M
  if (disc > 1e-14 * std::abs(tr)) {
    c1 = (e1 - e2) / (l1 - l2);
    c0 = (l1 * e2 - l2 * e1) / (l1 - l2);
  } else {
    c1 = duration * e1;
    c0 = e1 - l1 * c1;
  }
  const double a1 = s1 + c0 * d1 + c1 * (m11 * d1 + m12 * d2);
  const double a2 = s2 + c0 * d2 + c1 * (m21 * d1 + m22 * d2);
  const double c_a1 = std::clamp(a1, 0.0, 1.0);
  const double c_a2 = std::clamp(a2, 0.0, 1.0 - c_a1);
  return {1.0 - c_a1 - c_a2, c_a1, c_a2};
}

}  // namespace

void PumpModel::validate() const {
  detail::require(pump_rate_peak >= 0.0 && std::isfinite(pump_rate_peak),
                  "PumpModel: pump_rate_peak must be >= 0");
  detail::require(homogeneous_width > 0.0, "PumpModel: homogeneous_width must be > 0");
  detail::require(branching_to_aux >= 0.0 && branching_to_aux <= 1.0,
                  "PumpModel: branching_to_aux must be in [0, 1]");
  const auto& w = pump_spectrum.od();
  const double peak = *std::max_element(w.begin(), w.end());
  detail::require(peak == 0.0 || std::abs(peak - 1.0) < 1e-9,
                  "PumpModel: pump_spectrum must be normalized to peak 1");
}

void PersistenceModel::validate() const {
  detail::require(w1 >= 0.0 && w2 >= 0.0, "PersistenceModel: weights must be >= 0");
  detail::require(w1 + w2 <= 1.0 + 1e-12, "PersistenceModel: w1 + w2 must be <= 1");
  detail::require(w1 + w2 > 0.0, "PersistenceModel: at least one weight must be positive");
  detail::require(t1sa > 0.0 && t1sa < t1sb, "PersistenceModel: need 0 < t1sa < t1sb");
}

double PersistenceModel::hole_area(double t) const {
  return w1 * std::exp(-t / t1sa) + w2 * std::exp(-t / t1sb);
}

PopulationState::PopulationState(FrequencyGrid grid, std::vector<double> ground,
                                 std::vector<double> aux1, std::vector<double> aux2)
    : grid_(std::move(grid)), ground_(std::move(ground)), aux1_(std::move(aux1)),
      aux2_(std::move(aux2)) {
  const std::size_t n = grid_.size();
  if (ground_.size() != n || aux1_.size() != n || aux2_.size() != n)
    throw GridMismatch("PopulationState: fraction lengths do not match grid");
  for (std::size_t i = 0; i < n; ++i) {
    const double g = ground_[i], a = aux1_[i], b = aux2_[i];
    if (!(g >= 0.0 && g <= 1.0 && a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0))
      throw InvalidInput("PopulationState: fractions must lie in [0, 1]");
    if (std::abs(g + a + b - 1.0) > kNormTolerance)
      throw InvalidInput("PopulationState: fractions must sum to 1");
  }
}

PopulationState PopulationState::thermal(const FrequencyGrid& grid) {
  const std::size_t n = grid.size();
  return PopulationState(grid, std::vector<double>(n, 1.0), std::vector<double>(n, 0.0),
                         std::vector<double>(n, 0.0));
}

std::vector<double> lorentzian_convolve(const FrequencyGrid& grid, std::span<const double> weights,
                                        double fwhm) {
  const std::size_t n = grid.size();
  if (weights.size() != n) throw GridMismatch("lorentzian_convolve: length mismatch");
  const double hw = 0.5 * fwhm;
  const double dnu = grid.spacing();

  // Linear (non-circular) convolution through a zero-padded FFT.
  const std::size_t m = fft::next_pow2(2 * n);
  fft::cvec a(m, 0.0), kernel(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i] = weights[i];
  for (std::size_t j = 0; j < n; ++j) {
    const double x = dnu * static_cast<double>(j);
    const double l = hw * hw / (x * x + hw * hw);
    kernel[j] = l;
    if (j > 0) kernel[m - j] = l;
  }
  fft::forward(a);
  fft::forward(kernel);
  for (std::size_t k = 0; k < m; ++k) a[k] *= kernel[k];
  fft::inverse(a);

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::max(a[i].real(), 0.0);
  return out;
}

std::vector<double> pump_rate_profile(const PumpModel& pump) {
  pump.validate();
  const auto& grid = pump.pump_spectrum.grid();
  auto conv = lorentzian_convolve(grid, pump.pump_spectrum.od(), pump.homogeneous_width);
  const double peak = *std::max_element(conv.begin(), conv.end());
  if (peak <= 0.0 || pump.pump_rate_peak == 0.0) return std::vector<double>(conv.size(), 0.0);
  const double scale = pump.pump_rate_peak / peak;
  for (auto& v : conv) v *= scale;
  return conv;
}

PopulationState burn(const PopulationState& state, const PumpModel& pump,
                     const PersistenceModel& persistence, double duration) {
  detail::require(duration > 0.0, "burn: duration must be > 0");
  persistence.validate();
  if (!(pump.pump_spectrum.grid() == state.grid()))
    throw GridMismatch("burn: pump spectrum grid differs from population grid");

  const auto rate = pump_rate_profile(pump);
  const std::size_t n = state.size();
  std::vector<double> g(n), a1(n), a2(n);
  const double share1 = persistence.class1_share();
  for (std::size_t i = 0; i < n; ++i) {
    const Fractions f = evolve_point({state.ground()[i], state.aux1()[i], state.aux2()[i]},
                                     rate[i] * pump.branching_to_aux, share1, persistence.t1sa,
                                     persistence.t1sb, duration);
    g[i] = f.ground;
    a1[i] = f.aux1;
    a2[i] = f.aux2;
  }
  return PopulationState(state.grid(), std::move(g), std::move(a1), std::move(a2));
}

PopulationState decay(const PopulationState& state, const PersistenceModel& persistence,
                      double wait) {
  detail::require(wait >= 0.0, "decay: wait must be >= 0");
  persistence.validate();
  if (wait == 0.0) return state;
  const double f1 = std::exp(-wait / persistence.t1sa);
  const double f2 = std::exp(-wait / persistence.t1sb);
  const std::size_t n = state.size();
  std::vector<double> g(n), a1(n), a2(n);
  for (std::size_t i = 0; i < n; ++i) {
    a1[i] = state.aux1()[i] * f1;
    a2[i] = state.aux2()[i] * f2;
    g[i] = 1.0 - a1[i] - a2[i];
  }
  return PopulationState(state.grid(), std::move(g), std::move(a1), std::move(a2));
}

SpectralProfile population_to_od(const PopulationState& state, const SpectralProfile& reference_od) {
  if (!(state.grid() == reference_od.grid()))
    throw GridMismatch("population_to_od: grids differ");
  std::vector<double> od(state.size());
  for (std::size_t i = 0; i < od.size(); ++i) od[i] = reference_od[i] * state.ground()[i];
  return SpectralProfile(state.grid(), std::move(od));
}

double hole_area(const PopulationState& state, const SpectralProfile& reference_od) {
  if (!(state.grid() == reference_od.grid())) throw GridMismatch("hole_area: grids differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i)
    sum += reference_od[i] * (1.0 - state.ground()[i]);
  return sum * state.grid().spacing();
}

double hole_fwhm(const PopulationState& state) {
  const auto& g = state.ground();
  const std::size_t n = g.size();
  std::size_t peak = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (g[i] < g[peak]) peak = i;
  const double depth = 1.0 - g[peak];
  if (depth <= 0.0) return 0.0;
  const double half = 0.5 * depth;
  auto depletion = [&](std::size_t i) { return 1.0 - g[i]; };

  double left = state.grid()[0];
  for (std::size_t i = peak; i > 0; --i) {
    if (depletion(i - 1) < half) {
      const double frac = (depletion(i) - half) / (depletion(i) - depletion(i - 1));
      left = state.grid()[i] - frac * state.grid().spacing();
      break;
    }
  }
  double right = state.grid()[n - 1];
  for (std::size_t i = peak; i + 1 < n; ++i) {
    if (depletion(i + 1) < half) {
      const double frac = (depletion(i) - half) / (depletion(i) - depletion(i + 1));
      right = state.grid()[i] + frac * state.grid().spacing();
      break;
    }
  }
  return right - left;
}

double ground_after_constant_pump(double rate, double branching, const PersistenceModel& persistence,
                                  double duration) {
  persistence.validate();
  return evolve_point({1.0, 0.0, 0.0}, rate * branching, persistence.class1_share(),
                      persistence.t1sa, persistence.t1sb, duration)
      .ground;
}

double calibrate_branching(double pump_rate_peak, const PersistenceModel& persistence,
                           double duration, double target_ground) {
  detail::require(target_ground > 0.0 && target_ground < 1.0,
                  "calibrate_branching: target_ground must be in (0, 1)");
  detail::require(pump_rate_peak > 0.0 && duration > 0.0,
                  "calibrate_branching: rate and duration must be > 0");
  auto ground_at = [&](double b) {
    return ground_after_constant_pump(pump_rate_peak, b, persistence, duration);
  };
  if (ground_at(1.0) > target_ground)
    throw InvalidInput("calibrate_branching: target depletion unreachable at this pump rate");
  // Ground fraction decreases monotonically with branching.
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ground_at(mid) > target_ground ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double SidebandSpectrum::relative_db(int order) const {
  const double p1 = order_power(1);
  return 10.0 * std::log10(order_power(order) / p1);
}

SidebandSpectrum serrodyne_spectrum(double ramp_frequency, double ramp_amplitude,
                                    std::size_t n_samples) {
  detail::require(n_samples >= 16, "serrodyne_spectrum: need at least 16 samples");
  detail::require(ramp_frequency > 0.0, "serrodyne_spectrum: ramp_frequency must be > 0");

  // One ramp period; the sawtooth rises linearly from 0 to ramp_amplitude.
  fft::cvec field(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double u = static_cast<double>(k) / static_cast<double>(n_samples);
    field[k] = std::polar(1.0, ramp_amplitude * u);
  }
  fft::forward(field);

  SidebandSpectrum out;
  out.ramp_frequency = ramp_frequency;
  const double norm = 1.0 / static_cast<double>(n_samples);
  for (int order = -SidebandSpectrum::kMaxOrder; order <= SidebandSpectrum::kMaxOrder; ++order) {
    const auto idx = static_cast<std::size_t>((order + static_cast<long>(n_samples)) %
                                              static_cast<long>(n_samples));
    out.power[static_cast<std::size_t>(order + SidebandSpectrum::kMaxOrder)] =
        std::norm(field[idx] * norm);
  }
  return out;
}

}  // namespace afcmem
