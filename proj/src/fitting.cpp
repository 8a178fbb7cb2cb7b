#include "afcmem/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>

#include "afcmem/errors.hpp"
#include "afcmem/models.hpp"

namespace afcmem {

namespace {

constexpr double kBig = 1e30;
constexpr double kTiny = 1e-30;

std::vector<ParameterSpec> library(ModelKind kind) {
  switch (kind) {
    case ModelKind::lorentzian:
      return {{"amplitude", -kBig, kBig}, {"center", -kBig, kBig, false, true}, {"fwhm", kTiny, kBig},
              {"offset", -kBig, kBig}};
    case ModelKind::single_exponential:
      return {{"amplitude", 0.0, kBig}, {"tau", kTiny, kBig}};
    case ModelKind::biexponential:
      return {{"w1", 0.0, kBig}, {"t1", kTiny, kBig}, {"w2", 0.0, kBig}, {"t2", kTiny, kBig}};
    case ModelKind::emg:
      return {{"amplitude", 0.0, kBig}, {"mean", -kBig, kBig, false, true}, {"sigma", kTiny, kBig},
              {"tau", kTiny, kBig}};
    case ModelKind::g2_cw:
      return {{"norm", 0.0, kBig}, {"g2_0", 0.0, 1.0}, {"antibunch_time", kTiny, kBig},
              {"bunch_amplitude", 0.0, kBig}, {"bunch_time", kTiny, kBig}};
    case ModelKind::echo_decay:
      return {{"i0", 0.0, kBig}, {"t2o", kTiny, kBig}};
  }
  throw InvalidInput("unknown model kind");
}

double midpoint(const ParameterSpec& s) { return 0.5 * (s.lower + s.upper); }

std::vector<double> midpoints(const FitModel& model) {
  std::vector<double> p;
  for (const auto& s : model.parameters()) p.push_back(midpoint(s));
  return p;
}

// Weighted least-squares line through (x, log y); returns {slope, intercept}.
// Weights y^2 approximate constant relative noise on y.
std::optional<std::pair<double, double>> log_line(std::span<const double> x, std::span<const double> y,
                                                  double x_lo, double x_hi, std::span<const double> subtract = {}) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < x_lo || x[i] > x_hi) continue;
    const double v = subtract.empty() ? y[i] : y[i] - subtract[i];
    if (!(v > 0.0)) continue;
    const double w = v * v;
    const double ly = std::log(v);
    sw += w;
    sx += w * x[i];
    sy += w * ly;
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * ly;
    ++used;
  }
  if (used < 2) return std::nullopt;
  const double det = sw * sxx - sx * sx;
  if (!(std::abs(det) > 0.0)) return std::nullopt;
  const double slope = (sw * sxy - sx * sy) / det;
  const double intercept = (sy - slope * sx) / sw;
  return std::make_pair(slope, intercept);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

std::vector<double> guess_lorentzian(const FitModel& model, std::span<const double> x, std::span<const double> y) {
  const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
  if (*hi_it == *lo_it) return midpoints(model);
  const double base = median(std::vector<double>(y.begin(), y.end()));
  const bool peak = (*hi_it - base) >= (base - *lo_it);
  const std::size_t k = static_cast<std::size_t>((peak ? hi_it : lo_it) - y.begin());
  const double amp = y[k] - base;
  const double half = base + 0.5 * amp;
  auto beyond = [&](std::size_t i) { return peak ? y[i] < half : y[i] > half; };
  std::size_t l = k, r = k;
  while (l > 0 && !beyond(l)) --l;
  while (r + 1 < y.size() && !beyond(r)) ++r;
  double width = std::abs(x[r] - x[l]);
  if (!(width > 0.0)) width = 0.25 * std::abs(x.back() - x.front());
  return {amp, x[k], width, base};
}

std::vector<double> guess_exponential(const FitModel& model, std::span<const double> x, std::span<const double> y,
                                      double tau_scale) {
  const auto line = log_line(x, y, -kBig, kBig);
  if (!line || !(line->first < 0.0)) return midpoints(model);
  return {std::exp(line->second), -tau_scale / line->first};
}

std::vector<double> guess_biexponential(const FitModel& model, std::span<const double> x,
                                        std::span<const double> y) {
  const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  const double x0 = *xmin_it, x1 = *xmax_it;
  const double split = x0 + 0.25 * (x1 - x0);
  const auto tail = log_line(x, y, split, x1);
  if (!tail || !(tail->first < 0.0)) return midpoints(model);
  const double t2 = -1.0 / tail->first;
  const double w2 = std::exp(tail->second);
  std::vector<double> slow(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) slow[i] = w2 * std::exp(-x[i] / t2);
  // Fast component: residual above the slow one, up to where it fades into noise.
  double rmax = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= split) rmax = std::max(rmax, y[i] - slow[i]);
  }
  double head_end = split;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= split && x[i] > x0 && y[i] - slow[i] < 0.05 * rmax) head_end = std::min(head_end, x[i]);
  }
  const auto head = log_line(x, y, x0, head_end, slow);
  double t1 = 0.05 * t2, w1 = w2;
  if (head && head->first < 0.0) {
    t1 = -1.0 / head->first;
    w1 = std::exp(head->second);
  }
  if (t1 >= t2) t1 = 0.05 * t2;
  return {w1, t1, w2, t2};
}

std::vector<double> guess_emg(const FitModel& model, std::span<const double> x, std::span<const double> y) {
  if (x.size() < 3) return midpoints(model);
  const double floor = *std::min_element(y.begin(), y.end());
  double s0 = 0, s1 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = y[i] - floor;
    s0 += w;
    s1 += w * x[i];
  }
  if (!(s0 > 0.0)) return midpoints(model);
  const double mean = s1 / s0;
  double m2 = 0, m3 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = (y[i] - floor) / s0;
    const double d = x[i] - mean;
    m2 += w * d * d;
    m3 += w * d * d * d;
  }
  const double sd = std::sqrt(m2);
  double tau = m3 > 0.0 ? std::cbrt(0.5 * m3) : 0.5 * sd;
  tau = std::min(tau, 0.95 * sd);
  const double sigma = std::max(std::sqrt(std::max(m2 - tau * tau, 0.0)), 0.05 * sd);
  const double step = std::abs(x.back() - x.front()) / static_cast<double>(x.size() - 1);
  return {s0 * step, mean - tau, sigma, tau};
}

std::vector<double> guess_g2(const FitModel& model, std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return std::abs(x[a]) < std::abs(x[b]); });
  std::vector<double> outer;
  for (std::size_t i = n - std::max<std::size_t>(n / 5, 1); i < n; ++i) outer.push_back(y[order[i]]);
  const double norm = median(outer);
  if (!(norm > 0.0)) return midpoints(model);
  const double peak = *std::max_element(y.begin(), y.end()) / norm;
  const double bunch = std::max(0.05, peak - 1.0);
  const double g0 = std::clamp(y[order[0]] / norm - bunch, 0.0, 0.95);
  const double half = 0.5 * (1.0 + g0);
  double t_half = 0.0;
  for (std::size_t i : order) {
    if (y[i] / norm >= half) {
      t_half = std::abs(x[i]);
      break;
    }
  }
  if (!(t_half > 0.0)) t_half = 0.1 * std::abs(x[order.back()]);
  const double ta = t_half / std::log(2.0);
  return {norm, g0, ta, bunch, 5.0 * ta};
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::lorentzian: return "lorentzian";
    case ModelKind::single_exponential: return "single_exponential";
    case ModelKind::biexponential: return "biexponential";
    case ModelKind::emg: return "emg";
    case ModelKind::g2_cw: return "g2_cw";
    case ModelKind::echo_decay: return "echo_decay";
  }
  return "unknown";
}

ModelKind model_kind_from_string(std::string_view name) {
  for (auto k : {ModelKind::lorentzian, ModelKind::single_exponential, ModelKind::biexponential, ModelKind::emg,
                 ModelKind::g2_cw, ModelKind::echo_decay}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidInput("unknown fit model '" + std::string(name) + "'");
}

FitModel::FitModel(ModelKind kind) : kind_(kind), params_(library(kind)) {}

std::size_t FitModel::index(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  throw InvalidInput("model " + to_string(kind_) + " has no parameter '" + std::string(name) + "'");
}

FitModel& FitModel::set_bounds(std::string_view name, double lower, double upper) {
  auto& s = params_[index(name)];
  s.lower = lower;
  s.upper = upper;
  validate();
  return *this;
}

FitModel& FitModel::fix(std::string_view name, bool fixed) {
  params_[index(name)].fixed = fixed;
  return *this;
}

void FitModel::validate() const {
  for (const auto& s : params_) {
    if (!(s.lower <= s.upper)) throw InvalidInput("bounds of '" + s.name + "' are not ordered");
  }
}

double FitModel::operator()(double x, std::span<const double> p) const {
  switch (kind_) {
    case ModelKind::lorentzian:
      return p[0] * models::lorentzian(x, p[1], p[2]) + p[3];
    case ModelKind::single_exponential:
      return p[0] * std::exp(-x / p[1]);
    case ModelKind::biexponential:
      return p[0] * std::exp(-x / p[1]) + p[2] * std::exp(-x / p[3]);
    case ModelKind::emg:
      return models::emg(x, p[0], p[1], p[2], p[3]);
    case ModelKind::g2_cw:
      return p[0] * models::g2_cw(x, p[1], p[2], p[3], p[4]);
    case ModelKind::echo_decay:
      return p[0] * std::exp(-4.0 * x / p[1]);
  }
  return 0.0;
}

void FitModel::gradient(double x, std::span<const double> p, std::span<double> g) const {
  switch (kind_) {
    case ModelKind::lorentzian: {
      const double hw = 0.5 * p[2];
      const double d = x - p[1];
      const double den = d * d + hw * hw;
      const double l = hw * hw / den;
      g[0] = l;
      g[1] = p[0] * 2.0 * d * l / den;
      g[2] = p[0] * hw * d * d / (den * den);
      g[3] = 1.0;
      return;
    }
    case ModelKind::single_exponential: {
      const double e = std::exp(-x / p[1]);
      g[0] = e;
      g[1] = p[0] * e * x / (p[1] * p[1]);
      return;
    }
    case ModelKind::biexponential: {
      const double e1 = std::exp(-x / p[1]);
      const double e2 = std::exp(-x / p[3]);
      g[0] = e1;
      g[1] = p[0] * e1 * x / (p[1] * p[1]);
      g[2] = e2;
      g[3] = p[2] * e2 * x / (p[3] * p[3]);
      return;
    }
    case ModelKind::emg: {
      double out[4];
      models::emg_gradient(x, p[0], p[1], p[2], p[3], out);
      std::copy(out, out + 4, g.begin());
      return;
    }
    case ModelKind::g2_cw: {
      const double at = std::abs(x);
      const double ea = std::exp(-at / p[2]);
      const double eb = std::exp(-at / p[4]);
      g[0] = models::g2_cw(x, p[1], p[2], p[3], p[4]);
      g[1] = p[0] * ea;
      g[2] = -p[0] * (1.0 - p[1]) * ea * at / (p[2] * p[2]);
      g[3] = p[0] * eb;
      g[4] = p[0] * p[3] * eb * at / (p[4] * p[4]);
      return;
    }
    case ModelKind::echo_decay: {
      const double e = std::exp(-4.0 * x / p[1]);
      g[0] = e;
      g[1] = p[0] * e * 4.0 * x / (p[1] * p[1]);
      return;
    }
  }
}

std::vector<double> numeric_gradient(const FitModel& model, double x, std::span<const double> p, double x_scale) {
  std::vector<double> q(p.begin(), p.end());
  std::vector<double> g(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    double h = 1e-6 * std::abs(p[k]);
    if (model.parameters()[k].positional) h = std::max(h, 1e-9 * x_scale);
    if (h == 0.0) h = 1e-6;
    q[k] = p[k] + h;
    const double up = model(x, q);
    q[k] = p[k] - h;
    const double dn = model(x, q);
    q[k] = p[k];
    g[k] = (up - dn) / (2.0 * h);
  }
  return g;
}

std::vector<double> initial_guess(const FitModel& model, std::span<const double> x, std::span<const double> y) {
  if (x.empty() || x.size() != y.size()) throw InvalidInput("initial_guess needs non-empty x and y of equal length");
  std::vector<double> p;
  switch (model.kind()) {
    case ModelKind::lorentzian: p = guess_lorentzian(model, x, y); break;
    case ModelKind::single_exponential: p = guess_exponential(model, x, y, 1.0); break;
    case ModelKind::echo_decay: p = guess_exponential(model, x, y, 4.0); break;
    case ModelKind::biexponential: p = guess_biexponential(model, x, y); break;
    case ModelKind::emg: p = guess_emg(model, x, y); break;
    case ModelKind::g2_cw: p = guess_g2(model, x, y); break;
  }
  const auto& specs = model.parameters();
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!std::isfinite(p[k])) p[k] = midpoint(specs[k]);
    p[k] = std::clamp(p[k], specs[k].lower, specs[k].upper);
  }
  return p;
}

namespace {

struct Linearization {
  Eigen::VectorXd r;  // weighted residuals
  Eigen::MatrixXd J;  // weighted Jacobian of the model, free columns only
  double chi2 = 0.0;
};

class Problem {
 public:
  Problem(const FitModel& model, std::span<const double> x, std::span<const double> y, std::vector<double> w)
      : model_(model), x_(x), y_(y), w_(std::move(w)) {
    for (std::size_t k = 0; k < model.size(); ++k) {
      if (!model.parameters()[k].fixed) free_.push_back(k);
    }
  }

  const std::vector<std::size_t>& free() const { return free_; }

  double chi2(const std::vector<double>& p) const {
    double s = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const double r = (y_[i] - model_(x_[i], p)) * w_[i];
      s += r * r;
    }
    return s;
  }

  Linearization linearize(const std::vector<double>& p) const {
    Linearization lin;
    const std::size_t n = x_.size();
    lin.r.resize(static_cast<Eigen::Index>(n));
    lin.J.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(free_.size()));
    std::vector<double> g(model_.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      lin.r(row) = (y_[i] - model_(x_[i], p)) * w_[i];
      model_.gradient(x_[i], p, g);
      for (std::size_t c = 0; c < free_.size(); ++c) lin.J(row, static_cast<Eigen::Index>(c)) = g[free_[c]] * w_[i];
    }
    lin.chi2 = lin.r.squaredNorm();
    return lin;
  }

 private:
  const FitModel& model_;
  std::span<const double> x_;
  std::span<const double> y_;
  std::vector<double> w_;
  std::vector<std::size_t> free_;
};

bool rank_deficient(const Eigen::MatrixXd& A) {
  const Eigen::Index m = A.rows();
  if (m == 0) return false;
  Eigen::VectorXd d(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    if (!(A(k, k) > 0.0) || !std::isfinite(A(k, k))) return true;
    d(k) = 1.0 / std::sqrt(A(k, k));
  }
  const Eigen::MatrixXd C = d.asDiagonal() * A * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return !(ev(0) > 1e-13 * ev(m - 1));
}

void canonicalize(ModelKind kind, std::vector<double>& p) {
  if (kind == ModelKind::biexponential && p[1] > p[3]) {
    std::swap(p[0], p[2]);
    std::swap(p[1], p[3]);
  }
}

}  // namespace

double FitResult::value(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return parameters[i];
  }
  throw InvalidInput("fit result has no parameter '" + std::string(name) + "'");
}

double FitResult::sigma(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return sigmas[i];
  }
  throw InvalidInput("fit result has no parameter '" + std::string(name) + "'");
}

FitResult fit(const FitModel& model, std::span<const double> x, std::span<const double> y,
              std::optional<std::span<const double>> sigma, const FitOptions& options) {
  model.validate();
  const std::size_t n = x.size();
  if (y.size() != n) throw InvalidInput("fit: x and y lengths differ");
  if (n < model.size() + 1) throw InsufficientDataError("fit: need at least parameter count + 1 points");
  std::vector<double> w(n, 1.0);
  if (sigma) {
    if (sigma->size() != n) throw InvalidInput("fit: sigma length differs from data");
    for (std::size_t i = 0; i < n; ++i) {
      if (!((*sigma)[i] > 0.0)) throw InvalidInput("fit: sigma must be positive");
      w[i] = 1.0 / (*sigma)[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw InvalidInput("fit: data must be finite");
  }

  const auto& specs = model.parameters();
  std::vector<double> p = options.initial ? *options.initial : initial_guess(model, x, y);
  if (p.size() != model.size()) throw InvalidInput("fit: initial vector has the wrong length");
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::clamp(p[k], specs[k].lower, specs[k].upper);
  canonicalize(model.kind(), p);

  Problem problem(model, x, y, w);
  const auto& free = problem.free();
  const auto m = static_cast<Eigen::Index>(free.size());

  FitResult result;
  result.kind = model.kind();
  for (const auto& s : specs) result.names.push_back(s.name);

  // Jacobian cross-check at the starting point.
  {
    const auto [xlo, xhi] = std::minmax_element(x.begin(), x.end());
    const double x_scale = std::max(std::abs(*xhi - *xlo), std::max(std::abs(*xlo), std::abs(*xhi)));
    std::vector<double> ga(model.size());
    std::vector<double> diff(model.size(), 0.0), norm(model.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      model.gradient(x[i], p, ga);
      const auto gn = numeric_gradient(model, x[i], p, x_scale);
      for (std::size_t k = 0; k < model.size(); ++k) {
        diff[k] += (ga[k] - gn[k]) * (ga[k] - gn[k]);
        norm[k] += ga[k] * ga[k];
      }
    }
    for (std::size_t k = 0; k < model.size(); ++k) {
      if (norm[k] > 0.0) result.jacobian_mismatch = std::max(result.jacobian_mismatch, std::sqrt(diff[k] / norm[k]));
    }
  }

  Linearization lin = problem.linearize(p);
  if (!std::isfinite(lin.chi2)) throw NumericalError("fit: model is not finite at the starting point");
  Eigen::MatrixXd A = lin.J.transpose() * lin.J;
  if (rank_deficient(A)) throw RankDeficientError("fit: Jacobian is rank deficient at the starting point");

  double y_norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) y_norm += y[i] * w[i] * y[i] * w[i];
  y_norm = std::sqrt(y_norm);

  auto scaled_gradient = [&](const Linearization& l, const std::vector<double>& pp) {
    const Eigen::MatrixXd AA = l.J.transpose() * l.J;
    const Eigen::VectorXd g = l.J.transpose() * l.r;
    double s = 0.0;
    for (Eigen::Index c = 0; c < m; ++c) {
      const std::size_t k = free[static_cast<std::size_t>(c)];
      // Components pushing against an active bound do not count.
      if (pp[k] <= specs[k].lower && g(c) < 0.0) continue;
      if (pp[k] >= specs[k].upper && g(c) > 0.0) continue;
      const double d = AA(c, c) > 0.0 ? g(c) / std::sqrt(AA(c, c)) : 0.0;
      s += d * d;
    }
    return y_norm > 0.0 ? std::sqrt(s) / y_norm : std::sqrt(s);
  };

  double lambda = 1e-3;
  bool stalled = false;
  std::size_t it = 0;
  for (; it < options.max_iterations && !result.converged && !stalled; ++it) {
    A = lin.J.transpose() * lin.J;
    const Eigen::VectorXd g = lin.J.transpose() * lin.r;
    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd damped = A;
      for (Eigen::Index c = 0; c < m; ++c) damped(c, c) += lambda * std::max(A(c, c), 1e-300);
      const Eigen::VectorXd delta = damped.ldlt().solve(g);
      std::vector<double> trial = p;
      for (Eigen::Index c = 0; c < m; ++c) {
        const std::size_t k = free[static_cast<std::size_t>(c)];
        trial[k] = std::clamp(p[k] + delta(c), specs[k].lower, specs[k].upper);
      }
      canonicalize(model.kind(), trial);
      const double c2 = problem.chi2(trial);
      if (std::isfinite(c2) && c2 <= lin.chi2) {
        double step = 0.0;
        for (std::size_t k : free) {
          step = std::max(step, std::abs(trial[k] - p[k]) / (std::abs(p[k]) + options.step_tolerance));
        }
        p = std::move(trial);
        lin = problem.linearize(p);
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
        if (step <= options.step_tolerance || lin.chi2 == 0.0) result.converged = true;
      } else {
        lambda *= 10.0;
        if (lambda > 1e16) {
          stalled = true;
          break;
        }
      }
    }
  }
  result.iterations = it;
  result.gradient_norm = scaled_gradient(lin, p);
  if (stalled && result.gradient_norm <= 1e-8) result.converged = true;

  result.parameters = p;
  result.chi2 = lin.chi2;
  result.dof = n - free.size();
  result.reduced_chi2 = result.chi2 / static_cast<double>(result.dof);
  result.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.residuals[i] = y[i] - model(x[i], p);

  result.sigmas.assign(model.size(), 0.0);
  A = lin.J.transpose() * lin.J;
  if (rank_deficient(A)) {
    result.degenerate = true;
    for (std::size_t k : free) result.sigmas[k] = std::numeric_limits<double>::infinity();
  } else {
    const Eigen::MatrixXd cov = A.ldlt().solve(Eigen::MatrixXd::Identity(m, m));
    const double scale = sigma ? 1.0 : result.reduced_chi2;
    for (Eigen::Index c = 0; c < m; ++c) {
      result.sigmas[free[static_cast<std::size_t>(c)]] = std::sqrt(std::max(cov(c, c) * scale, 0.0));
    }
  }
  result.reliable = result.converged && !result.degenerate;
  return result;
}

std::string fit_report_json(const FitResult& result) {
  nlohmann::json j;
  j["model"] = to_string(result.kind);
  nlohmann::json params = nlohmann::json::object();
  nlohmann::json sig = nlohmann::json::object();
  for (std::size_t i = 0; i < result.names.size(); ++i) {
    params[result.names[i]] = result.parameters[i];
    if (std::isfinite(result.sigmas[i])) {
      sig[result.names[i]] = result.sigmas[i];
    } else {
      sig[result.names[i]] = nullptr;
    }
  }
  j["parameters"] = params;
  j["sigmas"] = sig;
  j["chi2"] = result.chi2;
  j["reduced_chi2"] = result.reduced_chi2;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["degenerate"] = result.degenerate;
  j["reliable"] = result.reliable;
  return j.dump(2);
}

}  // namespace afcmem
