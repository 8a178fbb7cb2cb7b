#pragma once

// Closed-form line shapes shared by the simulators and the fit engine.

namespace afcmem::models {

/// exp(z^2) erfc(z), accurate for large positive z.
double erfcx(double z);

/// Unit-peak Lorentzian of full width `fwhm` centred at `center`.
double lorentzian(double x, double center, double fwhm);

/// Exponentially modified Gaussian:
/// (A / 2 tau) exp(sigma^2 / (2 tau^2) - (t - m) / tau) erfc((sigma/tau - (t - m)/sigma) / sqrt 2).
/// Integrates to A over t.
double emg(double t, double amplitude, double mean, double sigma, double tau);

/// Partial derivatives of emg() with respect to (amplitude, mean, sigma, tau).
void emg_gradient(double t, double amplitude, double mean, double sigma, double tau, double out[4]);

/// Cumulative distribution of the unit-area EMG (sigma may be 0).
double emg_cdf(double t, double mean, double sigma, double tau);

/// 1 - (1 - g2_0) exp(-|t|/t_a) + b exp(-|t|/t_b)
double g2_cw(double t, double g2_0, double antibunch_time, double bunch_amplitude, double bunch_time);

}  // namespace afcmem::models
