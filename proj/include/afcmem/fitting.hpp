#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace afcmem {

enum class ModelKind { lorentzian, single_exponential, biexponential, emg, g2_cw, echo_decay };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

struct ParameterSpec {
  std::string name;
  double lower;
  double upper;
  bool fixed = false;
  bool positional = false;  // lives on the x axis (centres, means)
};

/// A model from the fixed library together with its parameter bounds.
///
///   lorentzian          amplitude, center, fwhm, offset
///   single_exponential  amplitude, tau
///   biexponential       w1, t1, w2, t2           (t1 < t2 enforced)
///   emg                 amplitude, mean, sigma, tau
///   g2_cw               norm, g2_0, antibunch_time, bunch_amplitude, bunch_time
///   echo_decay          i0, t2o                  y = i0 exp(-4 x / t2o)
class FitModel {
 public:
  explicit FitModel(ModelKind kind);

  ModelKind kind() const { return kind_; }
  std::size_t size() const { return params_.size(); }
  const std::vector<ParameterSpec>& parameters() const { return params_; }
  std::size_t index(std::string_view name) const;

  FitModel& set_bounds(std::string_view name, double lower, double upper);
  FitModel& fix(std::string_view name, bool fixed = true);

  double operator()(double x, std::span<const double> p) const;
  /// Analytic partial derivatives, written into `grad` (size()).
  void gradient(double x, std::span<const double> p, std::span<double> grad) const;

  void validate() const;

 private:
  ModelKind kind_;
  std::vector<ParameterSpec> params_;
};

struct FitOptions {
  std::size_t max_iterations = 200;
  double step_tolerance = 1e-10;  // relative
  std::optional<std::vector<double>> initial;
};

struct FitResult {
  ModelKind kind = ModelKind::lorentzian;
  std::vector<std::string> names;
  std::vector<double> parameters;
  std::vector<double> sigmas;
  double chi2 = 0.0;
  double reduced_chi2 = 0.0;
  std::size_t dof = 0;
  std::size_t iterations = 0;
  bool converged = false;
  bool degenerate = false;  // normal matrix singular at the optimum
  bool reliable = false;    // converged and not degenerate
  /// Largest relative difference between analytic and finite-difference
  /// Jacobians at the starting point.
  double jacobian_mismatch = 0.0;
  /// Norm of the scaled gradient J^T W r at the optimum.
  double gradient_norm = 0.0;
  std::vector<double> residuals;

  double value(std::string_view name) const;
  double sigma(std::string_view name) const;
};

/// Heuristic starting point; falls back to bound midpoints when the data
/// carry no usable structure.
std::vector<double> initial_guess(const FitModel& model, std::span<const double> x,
                                  std::span<const double> y);

/// Weighted Levenberg-Marquardt. Throws RankDeficientError when the Jacobian
/// is singular at the starting point; later trouble is reported in flags.
FitResult fit(const FitModel& model, std::span<const double> x, std::span<const double> y,
              std::optional<std::span<const double>> sigma = std::nullopt, const FitOptions& options = {});

/// Central finite-difference Jacobian row for the cross-check.
std::vector<double> numeric_gradient(const FitModel& model, double x, std::span<const double> p, double x_scale);

/// JSON report: model, parameters, sigmas, chi2, flags.
std::string fit_report_json(const FitResult& result);

}  // namespace afcmem
