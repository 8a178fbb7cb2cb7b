#include "afcmem/models.hpp"

#include <cmath>
#include <numbers>

namespace afcmem::models {

namespace {

constexpr double kInvSqrtPi = std::numbers::inv_sqrtpi;
constexpr double kInvSqrt2 = 0.70710678118654752440;

// exp(a) * erfc(z) without overflow, written with G = exp(a - z^2).
double exp_erfc(double a, double z) {
  if (z < 0.0) return std::exp(a) * std::erfc(z);
  return std::exp(a - z * z) * erfcx(z);
}

}  // namespace

double erfcx(double z) {
  if (z < 25.0) return std::exp(z * z) * std::erfc(z);
  // Asymptotic series; relative error below 1e-13 at z >= 25.
  const double inv2 = 1.0 / (z * z);
  return kInvSqrtPi / z * (1.0 - 0.5 * inv2 + 0.75 * inv2 * inv2 - 1.875 * inv2 * inv2 * inv2);
}

double lorentzian(double x, double center, double fwhm) {
  const double hw = 0.5 * fwhm;
  const double d = x - center;
  return hw * hw / (d * d + hw * hw);
}

double emg(double t, double amplitude, double mean, double sigma, double tau) {
  const double x = t - mean;
  const double a = sigma * sigma / (2.0 * tau * tau) - x / tau;
  const double z = (sigma / tau - x / sigma) * kInvSqrt2;
  return amplitude / (2.0 * tau) * exp_erfc(a, z);
}

void emg_gradient(double t, double amplitude, double mean, double sigma, double tau, double out[4]) {
  const double x = t - mean;
  const double a = sigma * sigma / (2.0 * tau * tau) - x / tau;
  const double z = (sigma / tau - x / sigma) * kInvSqrt2;
  const double e = exp_erfc(a, z);                     // exp(a) erfc(z)
  const double g = std::exp(-x * x / (2.0 * sigma * sigma));  // exp(a - z^2)
  const double pre = amplitude / (2.0 * tau);
  const double derfc = 2.0 * kInvSqrtPi * g;  // -d/dz [exp(a) erfc(z)]

  out[0] = e / (2.0 * tau);
  // d/dm: da/dm = 1/tau, dz/dm = 1/(sigma sqrt2)
  out[1] = pre * (e / tau - derfc * kInvSqrt2 / sigma);
  // d/dsigma: da = sigma/tau^2, dz = (1/tau + x/sigma^2)/sqrt2
  out[2] = pre * (e * sigma / (tau * tau) - derfc * (1.0 / tau + x / (sigma * sigma)) * kInvSqrt2);
  // d/dtau: f = (A/2) tau^-1 E
  const double da_dtau = -sigma * sigma / (tau * tau * tau) + x / (tau * tau);
  const double dz_dtau = -sigma / (tau * tau) * kInvSqrt2;
  out[3] = -pre * e / tau + pre * (e * da_dtau - derfc * dz_dtau);
}

double emg_cdf(double t, double mean, double sigma, double tau) {
  const double x = t - mean;
  if (sigma <= 0.0) return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x / tau);
  const double phi = 0.5 * std::erfc(-x / sigma * kInvSqrt2);
  // exp(-x/tau + sigma^2/(2 tau^2)) * Phi(x/sigma - sigma/tau)
  const double a = -x / tau + sigma * sigma / (2.0 * tau * tau);
  const double z = -(x / sigma - sigma / tau) * kInvSqrt2;
  return phi - 0.5 * exp_erfc(a, z);
}

double g2_cw(double t, double g2_0, double antibunch_time, double bunch_amplitude, double bunch_time) {
  const double at = std::abs(t);
  double v = 1.0 - (1.0 - g2_0) * std::exp(-at / antibunch_time);
  if (bunch_amplitude != 0.0) v += bunch_amplitude * std::exp(-at / bunch_time);
  return v;
}

}  // namespace afcmem::models
