#include "afcmem/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "afcmem/errors.hpp"
#include "afcmem/fft.hpp"

namespace afcmem {

namespace {

constexpr double kOutOfBandEnergyLimit = 1e-10;
constexpr double kSupportThreshold = 1e-6;

}  // namespace

TemporalWaveform::TemporalWaveform(double t0, double dt, std::vector<std::complex<double>> samples)
    : t0_(t0), dt_(dt), samples_(std::move(samples)) {
  detail::require(dt > 0.0 && std::isfinite(dt), "TemporalWaveform: dt must be > 0");
  detail::require(!samples_.empty(), "TemporalWaveform: no samples");
}

double TemporalWaveform::energy() const {
  double sum = 0.0;
  for (const auto& s : samples_) sum += std::norm(s);
  return sum * dt_;
}

double TemporalWaveform::energy_between(double t_lo, double t_hi) const {
  if (t_hi <= t_lo) return 0.0;
  const double first = std::ceil((t_lo - t0_) / dt_);
  const double last = std::floor((t_hi - t0_) / dt_);
  const double n = static_cast<double>(samples_.size());
  const auto i0 = static_cast<std::size_t>(std::clamp(first, 0.0, n));
  const auto i1 = static_cast<std::size_t>(std::clamp(last + 1.0, 0.0, n));
  double sum = 0.0;
  for (std::size_t i = i0; i < i1; ++i) sum += std::norm(samples_[i]);
  return sum * dt_;
}

TemporalWaveform TemporalWaveform::padded() const {
  auto s = samples_;
  s.resize(fft::next_pow2(s.size()), 0.0);
  return TemporalWaveform(t0_, dt_, std::move(s));
}

TemporalWaveform TemporalWaveform::scaled(std::complex<double> factor) const {
  auto s = samples_;
  for (auto& v : s) v *= factor;
  return TemporalWaveform(t0_, dt_, std::move(s));
}

TemporalWaveform TemporalWaveform::operator+(const TemporalWaveform& other) const {
  if (other.size() != size() || other.dt_ != dt_ || other.t0_ != t0_)
    throw GridMismatch("TemporalWaveform: cannot add waveforms on different time grids");
  auto s = samples_;
  for (std::size_t i = 0; i < s.size(); ++i) s[i] += other.samples_[i];
  return TemporalWaveform(t0_, dt_, std::move(s));
}

TemporalWaveform gaussian_pulse(double center, double fwhm, double t0, double dt, std::size_t n) {
  detail::require(fwhm > 0.0, "gaussian_pulse: fwhm must be > 0");
  // Intensity FWHM -> field: |E|^2 = exp(-4 ln2 (t-c)^2 / fwhm^2).
  const double k = 2.0 * std::numbers::ln2 / (fwhm * fwhm);
  std::vector<std::complex<double>> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = t0 + dt * static_cast<double>(i) - center;
    s[i] = std::exp(-k * x * x);
  }
  return TemporalWaveform(t0, dt, std::move(s));
}

FrequencyGrid fft_frequency_grid(std::size_t n, double dt) {
  const double df = 1.0 / (static_cast<double>(n) * dt);
  return FrequencyGrid::from_start(-static_cast<double>(n / 2) * df, df, n);
}

Propagator::Propagator(const ComplexResponse& response, std::size_t n, double dt)
    : dt_(dt), transfer_(n), covered_(n) {
  detail::require(n >= 2 && dt > 0.0, "Propagator: invalid time grid");
  const auto& grid = response.grid();
  const auto& t = response.amplitude_transfer();
  const double spacing = grid.spacing();
  const double last = static_cast<double>(grid.size() - 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double nu = fft::bin_frequency(k, n, dt);
    const double pos = (nu - grid.start()) / spacing;
    const double tol = 1e-9;
    covered_[k] = pos >= -tol && pos <= last + tol;
    const double p = std::clamp(pos, 0.0, last);
    const double base = std::floor(p);
    const auto i = static_cast<std::size_t>(base);
    const double frac = p - base;
    if (i + 1 >= grid.size() || frac < tol) {
      transfer_[k] = t[std::min(i, grid.size() - 1)];
    } else if (frac > 1.0 - tol) {
      transfer_[k] = t[i + 1];
    } else {
      // Linear interpolation keeps |T| <= 1.
      transfer_[k] = (1.0 - frac) * t[i] + frac * t[i + 1];
    }
  }
}

TemporalWaveform Propagator::operator()(const TemporalWaveform& input) const {
  if (input.dt() != dt_ || input.size() > transfer_.size())
    throw GridMismatch("Propagator: waveform does not match the propagator time grid");
  fft::cvec buf = input.samples();
  buf.resize(transfer_.size(), 0.0);
  // Spectrum in the exp(+i 2 pi nu t) analysis convention.
  fft::transform(buf, fft::Sign::positive);

  double total = 0.0, outside = 0.0;
  for (std::size_t k = 0; k < buf.size(); ++k) {
    const double p = std::norm(buf[k]);
    total += p;
    if (!covered_[k]) outside += p;
  }
  if (total > 0.0 && outside > kOutOfBandEnergyLimit * total)
    throw BandwidthError("propagate: input spectrum extends beyond the response grid (" +
                         std::to_string(outside / total) + " of the energy outside)");

  for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= transfer_[k];
  fft::transform(buf, fft::Sign::negative);
  const double scale = 1.0 / static_cast<double>(buf.size());
  for (auto& v : buf) v *= scale;
  return TemporalWaveform(input.t0(), input.dt(), std::move(buf));
}

TemporalWaveform propagate(const TemporalWaveform& input, const ComplexResponse& response) {
  const auto padded = input.padded();
  return Propagator(response, padded.size(), padded.dt())(padded);
}

double echo_efficiency(const TemporalWaveform& input, const TemporalWaveform& output,
                       double echo_center, double window) {
  detail::require(window > 0.0, "echo_efficiency: window must be > 0");
  const double e_in = input.energy();
  detail::require(e_in > 0.0, "echo_efficiency: input carries no energy");

  double peak = 0.0;
  for (const auto& s : input.samples()) peak = std::max(peak, std::norm(s));
  double first = 0.0, last = -1.0;
  bool found = false;
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (std::norm(input.samples()[i]) >= kSupportThreshold * peak) {
      if (!found) first = input.time(i);
      last = input.time(i);
      found = true;
    }
  }
  const double lo = echo_center - 0.5 * window;
  const double hi = echo_center + 0.5 * window;
  if (found && lo <= last && hi >= first)
    throw WindowOverlapError("echo_efficiency: echo window overlaps the transmitted pulse");
  return output.energy_between(lo, hi) / e_in;
}

void ModeTrain::validate() const {
  detail::require(n_modes >= 1, "ModeTrain: need at least one mode");
  detail::require(mode_fwhm > 0.0, "ModeTrain: mode_fwhm must be > 0");
  detail::require(mode_spacing >= mode_fwhm, "ModeTrain: mode_spacing must be >= mode_fwhm");
  detail::require(amplitude_pattern.empty() || amplitude_pattern.size() == n_modes,
                  "ModeTrain: amplitude_pattern length must equal n_modes");
  for (double a : amplitude_pattern)
    detail::require(a >= 0.0 && a <= 1.0, "ModeTrain: amplitudes must lie in [0, 1]");
}

double ModeTrain::amplitude(std::size_t i) const {
  return amplitude_pattern.empty() ? 1.0 : amplitude_pattern.at(i);
}

std::size_t mode_capacity(double storage_time, double mode_duration, double mode_spacing) {
  detail::require(storage_time > 0.0 && mode_duration > 0.0 && mode_spacing >= 0.0,
                  "mode_capacity: invalid arguments");
  // Small relative slack so exact ratios (90 ns / 625 ps) are not lost to rounding.
  return static_cast<std::size_t>(
      std::floor(storage_time / (mode_duration + mode_spacing) * (1.0 + 1e-12)));
}

TrainStorageResult store_train(const ModeTrain& train, const ComplexResponse& response,
                               double storage_time) {
  train.validate();
  detail::require(storage_time > 0.0, "store_train: storage_time must be > 0");
  if (static_cast<double>(train.n_modes) * train.period() > storage_time * (1.0 + 1e-12))
    throw TrainTooLongError("store_train: train of " + std::to_string(train.n_modes) +
                            " modes lasts longer than the storage time");

  const std::size_t n = fft::next_pow2(response.size());
  const double dt = 1.0 / (static_cast<double>(n) * response.grid().spacing());
  const double window_length = dt * static_cast<double>(n);
  const double last_echo = train.center(train.n_modes - 1) + storage_time + train.period();
  if (last_echo > window_length)
    throw InvalidInput("store_train: response grid too coarse; time window " +
                       std::to_string(window_length) + " s cannot hold the recalled train");

  const Propagator prop(response, n, dt);
  TrainStorageResult result{TemporalWaveform(0.0, dt, std::vector<std::complex<double>>(n)),
                            TemporalWaveform(0.0, dt, std::vector<std::complex<double>>(n)),
                            storage_time, {}, {}, {}, {}, 0.0};

  const std::size_t m = train.n_modes;
  const double half_slot = 0.5 * train.period();
  result.cross_talk.assign(m, std::vector<double>(m, 0.0));
  result.per_mode_efficiency.resize(m);

  std::vector<std::complex<double>> in_total(n), out_total(n);
  std::vector<double> mode_energy(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto mode = gaussian_pulse(train.center(i), train.mode_fwhm, 0.0, dt, n);
    const auto out = prop(mode);
    const double e_in = mode.energy();
    mode_energy[i] = e_in;
    for (std::size_t j = 0; j < m; ++j) {
      const double c = train.center(j) + storage_time;
      result.cross_talk[i][j] = out.energy_between(c - half_slot, c + half_slot) / e_in;
    }
    result.per_mode_efficiency[i] = result.cross_talk[i][i];
    const double a = train.amplitude(i);
    for (std::size_t k = 0; k < n; ++k) {
      in_total[k] += a * mode.samples()[k];
      out_total[k] += a * out.samples()[k];
    }
  }
  result.input = TemporalWaveform(0.0, dt, std::move(in_total));
  result.output = TemporalWaveform(0.0, dt, std::move(out_total));

  double worst = -std::numeric_limits<double>::infinity();
  result.recalled_order.resize(m);
  result.recalled_pattern.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t dominant = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (result.cross_talk[i][j] > result.cross_talk[dominant][j]) dominant = i;
      if (i != j) {
        const double ratio = result.cross_talk[i][j] / result.cross_talk[i][i];
        worst = std::max(worst, ratio > 0.0 ? 10.0 * std::log10(ratio)
                                            : -std::numeric_limits<double>::infinity());
      }
    }
    result.recalled_order[j] = dominant;
    const double c = train.center(j) + storage_time;
    const double recalled = result.output.energy_between(c - half_slot, c + half_slot);
    result.recalled_pattern[j] =
        std::sqrt(recalled / (result.per_mode_efficiency[j] * mode_energy[j]));
  }
  result.max_cross_talk_db = m > 1 ? worst : -std::numeric_limits<double>::infinity();
  return result;
}

std::vector<double> hole_scan_match(const SpectralProfile& emitter_line, double hole_width,
                                    const std::vector<double>& scan_offsets, const HoleShape& hole) {
  detail::require(hole_width >= 0.0, "hole_scan_match: hole_width must be >= 0");
  detail::require(hole.transfer_fraction >= 0.0 && hole.transfer_fraction <= 1.0,
                  "hole_scan_match: transfer_fraction must be in [0, 1]");
  const auto& grid = emitter_line.grid();
  const auto& w = emitter_line.od();
  double norm = 0.0;
  for (double v : w) norm += v;
  detail::require(norm > 0.0, "hole_scan_match: emitter line carries no weight");

  const double out_od = hole.line_od;
  const double in_od = hole.line_od * (1.0 - hole.transfer_fraction);
  const double t_out = std::exp(-out_od);
  const double t_in = std::exp(-in_od);

  std::vector<double> result;
  result.reserve(scan_offsets.size());
  for (double offset : scan_offsets) {
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (w[i] == 0.0) continue;
      const bool inside = hole_width > 0.0 && std::abs(grid[i] - offset) <= 0.5 * hole_width;
      sum += w[i] * (inside ? t_in : t_out);
    }
    result.push_back(sum / norm);
  }
  return result;
}

double plateau_width(const std::vector<double>& offsets, const std::vector<double>& transmission) {
  detail::require(offsets.size() == transmission.size() && offsets.size() >= 3,
                  "plateau_width: need matching offset and transmission series");
  const auto [lo_it, hi_it] = std::minmax_element(transmission.begin(), transmission.end());
  if (*hi_it - *lo_it <= 1e-15) return 0.0;
  const double half = 0.5 * (*hi_it + *lo_it);
  const std::size_t peak = static_cast<std::size_t>(hi_it - transmission.begin());
  auto crossing = [&](std::size_t a, std::size_t b) {
    const double f = (transmission[a] - half) / (transmission[a] - transmission[b]);
    return offsets[a] + f * (offsets[b] - offsets[a]);
  };
  double left = offsets.front(), right = offsets.back();
  for (std::size_t i = peak; i > 0; --i) {
    if (transmission[i - 1] < half) {
      left = crossing(i, i - 1);
      break;
    }
  }
  for (std::size_t i = peak; i + 1 < offsets.size(); ++i) {
    if (transmission[i + 1] < half) {
      right = crossing(i, i + 1);
      break;
    }
  }
  return right - left;
}

SpectralProfile lorentzian_line(const FrequencyGrid& grid, double center, double fwhm) {
  detail::require(fwhm > 0.0, "lorentzian_line: fwhm must be > 0");
  const double hw2 = 0.25 * fwhm * fwhm;
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double x = grid[i] - center;
    w[i] = hw2 / (x * x + hw2);
  }
  return SpectralProfile(grid, std::move(w));
}

void write_waveform_csv(const std::filesystem::path& path, const TemporalWaveform& waveform) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "time_s,re,im\n";
  out.precision(17);
  for (std::size_t i = 0; i < waveform.size(); ++i)
    out << waveform.time(i) << ',' << waveform.samples()[i].real() << ','
        << waveform.samples()[i].imag() << '\n';
}

}  // namespace afcmem
