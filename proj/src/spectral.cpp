#include "afcmem/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "afcmem/errors.hpp"
#include "afcmem/fft.hpp"

namespace afcmem {

namespace {

constexpr double kPassivityTolerance = 1e-12;
constexpr std::size_t kMinPointsPerFeature = 4;

// Width in samples of the narrowest run above the mid level between min and max.
// Returns 0 when the profile has no contrast.
std::size_t narrowest_feature(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*hi - *lo < 1e-9) return 0;
  const double mid = 0.5 * (*hi + *lo);
  std::size_t narrowest = v.size();
  std::size_t run = 0;
  bool touches_edge = true;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > mid) {
      ++run;
    } else {
      // Runs clipped by the grid edge say nothing about resolution.
      if (run > 0 && !touches_edge) narrowest = std::min(narrowest, run);
      run = 0;
      touches_edge = false;
    }
  }
  return narrowest;
}

}  // namespace

FrequencyGrid::FrequencyGrid(double center_offset, double span, std::size_t n_points)
    : center_offset_(center_offset), span_(span), n_points_(n_points) {
  detail::require(n_points >= 2, "FrequencyGrid: n_points must be >= 2");
  detail::require(std::isfinite(center_offset) && std::isfinite(span) && span > 0.0,
                  "FrequencyGrid: span must be finite and positive");
}

FrequencyGrid FrequencyGrid::from_start(double start, double spacing, std::size_t n_points) {
  detail::require(n_points >= 2, "FrequencyGrid: n_points must be >= 2");
  const double span = spacing * static_cast<double>(n_points - 1);
  return FrequencyGrid(start + 0.5 * span, span, n_points);
}

std::vector<double> FrequencyGrid::values() const {
  std::vector<double> out(n_points_);
  for (std::size_t i = 0; i < n_points_; ++i) out[i] = (*this)[i];
  return out;
}

std::size_t FrequencyGrid::nearest_index(double nu) const {
  const double pos = std::round((nu - start()) / spacing());
  if (!(pos > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(pos), n_points_ - 1);
}

SpectralProfile::SpectralProfile(FrequencyGrid grid, std::vector<double> od)
    : grid_(std::move(grid)), od_(std::move(od)) {
  if (od_.size() != grid_.size())
    throw GridMismatch("SpectralProfile: od length does not match grid");
  for (double v : od_) {
    if (!std::isfinite(v) || v < 0.0)
      throw InvalidInput("SpectralProfile: optical depth must be finite and >= 0");
  }
}

SpectralProfile SpectralProfile::flat(const FrequencyGrid& grid, double od) {
  return SpectralProfile(grid, std::vector<double>(grid.size(), od));
}

ComplexResponse::ComplexResponse(FrequencyGrid grid,
                                 std::vector<std::complex<double>> amplitude_transfer)
    : grid_(std::move(grid)), transfer_(std::move(amplitude_transfer)) {
  if (transfer_.size() != grid_.size())
    throw GridMismatch("ComplexResponse: transfer length does not match grid");
  for (const auto& t : transfer_) {
    if (!std::isfinite(t.real()) || !std::isfinite(t.imag()) ||
        std::abs(t) > 1.0 + kPassivityTolerance)
      throw InvalidInput("ComplexResponse: |transfer| must be finite and <= 1");
  }
}

ComplexResponse ComplexResponse::identity(const FrequencyGrid& grid) {
  return ComplexResponse(grid, std::vector<std::complex<double>>(grid.size(), 1.0));
}

std::vector<double> ComplexResponse::phase() const {
  std::vector<double> out(transfer_.size());
  std::transform(transfer_.begin(), transfer_.end(), out.begin(),
                 [](const std::complex<double>& t) { return std::arg(t); });
  return out;
}

std::vector<double> beer_lambert_transmission(std::span<const double> od, double loss_factor) {
  detail::require(loss_factor > 0.0 && loss_factor <= 1.0,
                  "beer_lambert_transmission: loss_factor must be in (0, 1]");
  std::vector<double> out(od.size());
  for (std::size_t i = 0; i < od.size(); ++i) {
    if (!std::isfinite(od[i]) || od[i] < 0.0)
      throw InvalidInput("beer_lambert_transmission: optical depth must be finite and >= 0");
    out[i] = loss_factor * std::exp(-od[i]);
  }
  return out;
}

std::vector<double> beer_lambert_transmission(const SpectralProfile& profile, double loss_factor) {
  return beer_lambert_transmission(std::span<const double>(profile.od()), loss_factor);
}

OdExtraction extract_od(const MeasuredSpectrum& i_in, const MeasuredSpectrum& i_out,
                        double loss_factor) {
  detail::require(loss_factor > 0.0 && loss_factor <= 1.0,
                  "extract_od: loss_factor must be in (0, 1]");
  if (!(i_in.grid == i_out.grid) || i_in.intensity.size() != i_in.grid.size() ||
      i_out.intensity.size() != i_out.grid.size())
    throw GridMismatch("extract_od: spectra must share an identical grid");

  std::vector<double> od(i_in.intensity.size());
  std::size_t clamped = 0;
  for (std::size_t i = 0; i < od.size(); ++i) {
    const double in = i_in.intensity[i];
    const double out = i_out.intensity[i];
    if (!(in > 0.0) || !std::isfinite(in))
      throw InvalidSpectrum("extract_od: input intensity must be positive");
    if (!(out > 0.0) || !std::isfinite(out))
      throw InvalidSpectrum("extract_od: output intensity must be positive at every point");
    const double raw = -std::log(out / (loss_factor * in));
    if (raw < 0.0) {
      ++clamped;
      od[i] = 0.0;
    } else {
      od[i] = raw;
    }
  }
  return {SpectralProfile(i_in.grid, std::move(od)), clamped};
}

std::vector<double> hilbert_transform(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n == 0) return {};

  // Layout: [zeros | tapered mirror | data | tapered mirror | zeros]
  const std::size_t total = fft::next_pow2(4 * n);
  const std::size_t pad_left = (total - n) / 2;
  fft::cvec buf(total, 0.0);
  for (std::size_t i = 0; i < n; ++i) buf[pad_left + i] = samples[i];

  const std::size_t mirror = std::min(n, pad_left);
  for (std::size_t j = 1; j <= mirror; ++j) {
    // Raised-cosine taper from 1 at the data edge to 0 at the mirror's far end.
    const double w = 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(j) /
                                           static_cast<double>(mirror + 1)));
    const std::size_t src = std::min(j, n - 1);
    buf[pad_left - j] = w * samples[src];
    buf[pad_left + n - 1 + j] = w * samples[n - 1 - src];
  }

  fft::forward(buf);
  // Multiplier -i*sgn(xi) for positive and negative frequency halves.
  const std::complex<double> minus_i(0.0, -1.0);
  buf[0] = 0.0;
  for (std::size_t k = 1; k < total; ++k) {
    if (k < total / 2) {
      buf[k] *= minus_i;
    } else if (k > total / 2) {
      buf[k] *= -minus_i;
    } else {
      buf[k] = 0.0;
    }
  }
  fft::inverse(buf);

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = buf[pad_left + i].real();
  return out;
}

ComplexResponse kramers_kronig_phase(const SpectralProfile& profile) {
  const auto& od = profile.od();
  const std::size_t narrow = narrowest_feature(od);
  if (narrow > 0 && narrow < kMinPointsPerFeature)
    throw ResolutionError("kramers_kronig_phase: narrowest feature spans " +
                          std::to_string(narrow) + " points, need at least " +
                          std::to_string(kMinPointsPerFeature));

  std::vector<double> half(od.size());
  std::transform(od.begin(), od.end(), half.begin(), [](double d) { return -0.5 * d; });
  const auto phi = hilbert_transform(half);

  std::vector<std::complex<double>> transfer(od.size());
  for (std::size_t i = 0; i < od.size(); ++i)
    transfer[i] = std::exp(-0.5 * od[i]) * std::polar(1.0, phi[i]);
  return ComplexResponse(profile.grid(), std::move(transfer));
}

MeasuredSpectrum read_spectrum_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open spectrum file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InvalidSpectrum(path.string() + ": missing header row");

  std::vector<double> freq;
  std::vector<double> intensity;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw InvalidSpectrum(path.string() + ":" + std::to_string(line_no) +
                            ": expected two comma-separated columns");
    try {
      std::size_t used = 0;
      const std::string a = line.substr(0, comma);
      const std::string b = line.substr(comma + 1);
      freq.push_back(std::stod(a, &used));
      intensity.push_back(std::stod(b, &used));
    } catch (const std::logic_error&) {
      throw InvalidSpectrum(path.string() + ":" + std::to_string(line_no) +
                            ": non-numeric value");
    }
  }
  if (freq.size() < 2) throw InvalidSpectrum(path.string() + ": need at least two rows");

  const double spacing = (freq.back() - freq.front()) / static_cast<double>(freq.size() - 1);
  if (!(spacing > 0.0)) throw InvalidSpectrum(path.string() + ": frequencies must increase");
  for (std::size_t i = 0; i < freq.size(); ++i) {
    const double expected = freq.front() + spacing * static_cast<double>(i);
    if (std::abs(freq[i] - expected) > 1e-6 * spacing)
      throw InvalidSpectrum(path.string() + ": frequency column is not uniformly spaced");
  }
  return {FrequencyGrid::from_start(freq.front(), spacing, freq.size()), std::move(intensity)};
}

void write_spectrum_csv(const std::filesystem::path& path, const FrequencyGrid& grid,
                        std::span<const double> values, const char* value_header) {
  if (values.size() != grid.size()) throw GridMismatch("write_spectrum_csv: length mismatch");
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "frequency_hz_detuning," << value_header << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i) out << grid[i] << ',' << values[i] << '\n';
}

}  // namespace afcmem
