#include "afcmem/comb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "afcmem/errors.hpp"
#include "afcmem/fft.hpp"

namespace afcmem {

namespace {

constexpr double kTeethCountTolerance = 1e-3;
constexpr double kMinPointsPerTooth = 8.0;

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace

std::string to_string(ToothShape shape) {
  return shape == ToothShape::square ? "square" : "gaussian";
}

ToothShape tooth_shape_from_string(const std::string& name) {
  if (name == "square") return ToothShape::square;
  if (name == "gaussian") return ToothShape::gaussian;
  throw InvalidInput("unknown tooth shape '" + name + "' (expected square or gaussian)");
}

CombSpec CombSpec::for_storage_time(double storage_time, double bandwidth) {
  detail::require(storage_time > 0.0, "CombSpec: storage_time must be > 0");
  CombSpec spec;
  spec.tooth_spacing = 1.0 / storage_time;
  spec.bandwidth = bandwidth;
  return spec;
}

void CombSpec::validate() const {
  detail::require(tooth_spacing > 0.0 && std::isfinite(tooth_spacing),
                  "CombSpec: tooth_spacing must be > 0");
  detail::require(finesse >= 1.0, "CombSpec: finesse must be >= 1");
  detail::require(background_od >= 0.0, "CombSpec: background_od must be >= 0");
  detail::require(peak_od > background_od, "CombSpec: peak_od must exceed background_od");
  const double ratio = bandwidth / tooth_spacing;
  const double n = std::round(ratio);
  detail::require(n >= 2.0, "CombSpec: bandwidth must hold at least two teeth");
  detail::require(std::abs(ratio - n) <= kTeethCountTolerance * n,
                  "CombSpec: bandwidth must be an integer multiple of tooth_spacing");
}

std::size_t CombSpec::n_teeth() const {
  return static_cast<std::size_t>(std::llround(bandwidth / tooth_spacing));
}

SpectralProfile synthesize(const CombSpec& spec, const FrequencyGrid& grid) {
  return synthesize(spec, SpectralProfile::flat(grid, spec.peak_od));
}

SpectralProfile synthesize(const CombSpec& spec, const SpectralProfile& reference) {
  spec.validate();
  const auto& grid = reference.grid();
  const double width = spec.tooth_width();
  if (width / grid.spacing() < kMinPointsPerTooth)
    throw ResolutionError("synthesize: tooth width " + std::to_string(width) + " Hz spans fewer than " +
                          std::to_string(static_cast<int>(kMinPointsPerTooth)) + " grid points");

  const std::size_t n_teeth = spec.n_teeth();
  const double lo = spec.center_offset - 0.5 * spec.bandwidth;
  const double hi = spec.center_offset + 0.5 * spec.bandwidth;
  const double contrast = spec.peak_od - spec.background_od;
  // Gaussian FWHM = width: exp(-4 ln2 x^2 / width^2).
  const double gauss_k = 4.0 * std::numbers::ln2 / (width * width);

  std::vector<double> od = reference.od();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double nu = grid[i];
    if (nu < lo || nu > hi) continue;
    const double pos = (nu - lo) / spec.tooth_spacing;
    const auto k = std::clamp(std::floor(pos), 0.0, static_cast<double>(n_teeth - 1));
    const double center = lo + (k + 0.5) * spec.tooth_spacing;
    if (spec.tooth_shape == ToothShape::square) {
      od[i] = std::abs(nu - center) <= 0.5 * width ? spec.peak_od : spec.background_od;
    } else {
      double sum = 0.0;
      // Neighbouring teeth overlap for low finesse.
      for (int dk = -3; dk <= 3; ++dk) {
        const double kk = k + dk;
        if (kk < 0.0 || kk > static_cast<double>(n_teeth - 1)) continue;
        const double x = nu - (lo + (kk + 0.5) * spec.tooth_spacing);
        sum += std::exp(-gauss_k * x * x);
      }
      od[i] = spec.background_od + contrast * std::min(sum, 1.0);
    }
  }
  return SpectralProfile(grid, std::move(od));
}

double storage_time(const CombSpec& spec) {
  detail::require(spec.tooth_spacing > 0.0, "storage_time: tooth_spacing must be > 0");
  return 1.0 / spec.tooth_spacing;
}

double analytic_efficiency(double peak_od, double finesse, double background_od) {
  detail::require(finesse >= 1.0, "analytic_efficiency: finesse must be >= 1");
  const double x = std::numbers::pi / finesse;
  const double sinc = std::sin(x) / x;
  const double df = peak_od / finesse;
  return df * df * std::exp(-df) * sinc * sinc * std::exp(-background_od);
}

double analytic_efficiency(const CombSpec& spec) {
  return analytic_efficiency(spec.peak_od, spec.finesse, spec.background_od);
}

CombMetrics comb_metrics(const SpectralProfile& profile) {
  const auto& od = profile.od();
  const auto& grid = profile.grid();
  const std::size_t n = od.size();
  const auto [min_it, max_it] = std::minmax_element(od.begin(), od.end());
  const double contrast = *max_it - *min_it;
  if (contrast < 1e-9 * std::max(1.0, *max_it))
    throw NoPeriodicityError("comb_metrics: profile has no contrast");
  const double mid = 0.5 * (*max_it + *min_it);

  // Band = from the first to the last trough sample.
  std::size_t first = n, last = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (od[i] < mid) {
      first = std::min(first, i);
      last = i;
    }
  }
  const std::size_t band_len = last - first + 1;

  // Teeth = runs above mid strictly inside the band.
  std::size_t runs = 0;
  bool in_run = false;
  for (std::size_t i = first; i <= last; ++i) {
    if (od[i] >= mid) {
      if (!in_run) ++runs;
      in_run = true;
    } else {
      in_run = false;
    }
  }
  if (runs < 3) throw NoPeriodicityError("comb_metrics: fewer than three teeth detected");

  // Autocorrelation of the mean-removed band; first maximum past the first
  // zero crossing is the tooth period.
  std::vector<double> band(od.begin() + static_cast<std::ptrdiff_t>(first),
                           od.begin() + static_cast<std::ptrdiff_t>(last + 1));
  double mean = 0.0;
  for (double v : band) mean += v;
  mean /= static_cast<double>(band.size());
  const std::size_t m = fft::next_pow2(2 * band.size());
  fft::cvec buf(m, 0.0);
  for (std::size_t i = 0; i < band.size(); ++i) buf[i] = band[i] - mean;
  fft::forward(buf);
  for (auto& v : buf) v = std::norm(v);
  fft::inverse(buf);
  std::size_t lag = 1;
  while (lag < band.size() / 2 && buf[lag].real() > 0.0) ++lag;
  std::size_t best = lag;
  for (std::size_t l = lag; l < band.size() / 2; ++l) {
    if (buf[l].real() > buf[best].real()) best = l;
    // Stop at the first peak: once we are well past it and negative again.
    if (buf[l].real() < 0.0 && buf[best].real() > 0.0 && l > best) break;
  }
  if (buf[best].real() <= 0.0) throw NoPeriodicityError("comb_metrics: no periodicity detected");
  double period_samples = static_cast<double>(best);
  if (best > 0 && best + 1 < m) {
    const double ym = buf[best - 1].real(), y0 = buf[best].real(), yp = buf[best + 1].real();
    const double denom = ym - 2.0 * y0 + yp;
    if (denom < 0.0) period_samples += 0.5 * (ym - yp) / denom;
  }

  const double spacing = grid.spacing();
  const double bandwidth = static_cast<double>(band_len) * spacing;
  const double coarse = period_samples * spacing;
  const double n_teeth = std::max(2.0, std::round(bandwidth / coarse));

  // Levels: trough minima, then tooth maxima refined by a parabola through the
  // log of the three samples around each peak (exact for Gaussian teeth).
  // Tooth widths come from the half-level crossings, interpolated linearly.
  std::vector<double> troughs, peaks, widths;
  for (std::size_t i = first; i <= last;) {
    const bool high = od[i] >= mid;
    std::size_t j = i;
    std::size_t extreme = i;
    while (j <= last && (od[j] >= mid) == high) {
      if (high ? od[j] > od[extreme] : od[j] < od[extreme]) extreme = j;
      ++j;
    }
    (high ? peaks : troughs).push_back(static_cast<double>(extreme));
    if (high) {
      const double left = static_cast<double>(i) - (od[i] - mid) / (od[i] - od[i - 1]);
      const double right = static_cast<double>(j - 1) + (od[j - 1] - mid) / (od[j - 1] - od[j]);
      widths.push_back((right - left) * grid.spacing());
    }
    i = j;
  }
  std::vector<double> trough_levels;
  for (double idx : troughs) trough_levels.push_back(od[static_cast<std::size_t>(idx)]);
  const double background = median(trough_levels);
  std::vector<double> peak_levels;
  for (double idx : peaks) {
    const auto k = static_cast<std::size_t>(idx);
    double level = od[k];
    if (k > 0 && k + 1 < n && od[k - 1] < od[k] && od[k + 1] < od[k] && od[k - 1] > background &&
        od[k + 1] > background) {
      const double ym = std::log(od[k - 1] - background);
      const double y0 = std::log(od[k] - background);
      const double yp = std::log(od[k + 1] - background);
      const double denom = ym - 2.0 * y0 + yp;
      if (denom < 0.0) {
        const double shift = 0.5 * (ym - yp) / denom;
        level = background + std::exp(y0 - 0.25 * (ym - yp) * shift);
      }
    }
    peak_levels.push_back(level);
  }

  CombMetrics out;
  out.bandwidth = bandwidth;
  out.n_teeth = static_cast<std::size_t>(n_teeth);
  out.tooth_spacing = bandwidth / n_teeth;
  // Total width over the tooth count tolerates teeth merged by tiny gaps.
  double covered = 0.0;
  for (double w : widths) covered += w;
  out.finesse = out.tooth_spacing / (covered / n_teeth);
  out.peak_od = median(peak_levels);
  out.background_od = background;
  return out;
}

}  // namespace afcmem
