#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "afcmem/errors.hpp"
#include "afcmem/fitting.hpp"

using namespace afcmem;

namespace {

struct Case {
  ModelKind kind;
  std::vector<double> truth;
  std::vector<double> x;
};

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

std::vector<double> logspace(double a, double b, std::size_t n) {
  auto v = linspace(std::log10(a), std::log10(b), n);
  for (double& x : v) x = std::pow(10.0, x);
  return v;
}

std::vector<Case> library_cases() {
  return {
      {ModelKind::lorentzian, {2.0, 1e6, 7.58e6, 0.3}, linspace(-40e6, 40e6, 81)},
      {ModelKind::single_exponential, {5.0, 2.0}, linspace(0.0, 10.0, 60)},
      {ModelKind::biexponential, {0.59, 6.75, 0.348, 385.0}, logspace(0.05, 2000.0, 80)},
      {ModelKind::emg, {1.0, 10e-9, 0.2e-9, 3.08e-9}, linspace(5e-9, 40e-9, 120)},
      {ModelKind::g2_cw, {100.0, 0.072, 0.6e-9, 0.3, 8e-9}, linspace(-30e-9, 30e-9, 241)},
      {ModelKind::echo_decay, {1.0, 2.6e-6}, linspace(0.1e-6, 1.5e-6, 15)},
  };
}

std::vector<double> evaluate(const FitModel& m, const std::vector<double>& x, const std::vector<double>& p) {
  std::vector<double> y;
  for (double xi : x) y.push_back(m(xi, p));
  return y;
}

}  // namespace

TEST(FitModel, ParameterCountsAndNames) {
  EXPECT_EQ(FitModel(ModelKind::lorentzian).size(), 4u);
  EXPECT_EQ(FitModel(ModelKind::single_exponential).size(), 2u);
  EXPECT_EQ(FitModel(ModelKind::biexponential).size(), 4u);
  EXPECT_EQ(FitModel(ModelKind::emg).size(), 4u);
  EXPECT_EQ(FitModel(ModelKind::g2_cw).size(), 5u);
  EXPECT_EQ(FitModel(ModelKind::echo_decay).size(), 2u);
  EXPECT_EQ(FitModel(ModelKind::lorentzian).index("fwhm"), 2u);
  EXPECT_THROW(FitModel(ModelKind::lorentzian).index("tau"), InvalidInput);
  EXPECT_THROW(FitModel(ModelKind::lorentzian).set_bounds("fwhm", 2.0, 1.0), InvalidInput);
  for (auto k : {ModelKind::lorentzian, ModelKind::emg, ModelKind::g2_cw}) {
    EXPECT_EQ(model_kind_from_string(to_string(k)), k);
  }
}

TEST(FitModel, AnalyticJacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> jitter(0.8, 1.25);
  for (const auto& c : library_cases()) {
    const FitModel m(c.kind);
    const double span = c.x.back() - c.x.front();
    for (int trial = 0; trial < 20; ++trial) {
      auto p = c.truth;
      for (auto& v : p) v *= jitter(rng);
      if (c.kind == ModelKind::g2_cw) p[1] = std::min(p[1], 0.9);
      std::vector<double> g(m.size());
      for (double x : c.x) {
        m.gradient(x, p, g);
        const auto n = numeric_gradient(m, x, p, span);
        for (std::size_t k = 0; k < m.size(); ++k) {
          const double scale = std::max({std::abs(g[k]), std::abs(n[k]), 1e-300});
          // Absolute floor relative to the largest value the column takes.
          double col_max = 0.0;
          std::vector<double> gg(m.size());
          for (double xx : c.x) {
            m.gradient(xx, p, gg);
            col_max = std::max(col_max, std::abs(gg[k]));
          }
          EXPECT_LE(std::abs(g[k] - n[k]), 1e-6 * std::max(scale, col_max))
              << to_string(c.kind) << " param " << m.parameters()[k].name << " at x=" << x;
        }
      }
    }
  }
}

TEST(Fit, NoiselessLorentzianRecoversWidth) {
  const FitModel m(ModelKind::lorentzian);
  const auto x = linspace(-40e6, 40e6, 161);
  const auto y = evaluate(m, x, {1.0, 0.0, 7.58e6, 0.0});
  const auto r = fit(m, x, y);
  EXPECT_TRUE(r.converged);
  EXPECT_TRUE(r.reliable);
  EXPECT_NEAR(r.value("fwhm"), 7.58e6, 7.58e6 * 1e-6);
  EXPECT_LT(r.jacobian_mismatch, 1e-6);
}

TEST(Fit, NoisyBiexponentialWithinFivePercent) {
  const FitModel m(ModelKind::biexponential);
  const std::vector<double> truth = {0.59, 6.75, 0.348, 385.0};
  const auto x = logspace(0.05, 2000.0, 120);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto y = evaluate(m, x, truth);
    std::vector<double> s;
    for (double& v : y) {
      s.push_back(0.01 * v);
      v += 0.01 * v * noise(rng);
    }
    const auto r = fit(m, x, y, std::span<const double>(s));
    ASSERT_TRUE(r.reliable);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(r.parameters[k], truth[k], 0.05 * truth[k]) << k;
  }
}

TEST(Fit, ZeroDataIsFlagged) {
  const auto x = linspace(0.0, 10.0, 30);
  const std::vector<double> y(30, 0.0);
  const auto r = fit(FitModel(ModelKind::single_exponential), x, y);
  EXPECT_FALSE(r.reliable);
  EXPECT_TRUE(r.degenerate || !r.converged);
  EXPECT_NEAR(r.value("amplitude"), 0.0, 1e-6);
}

TEST(Fit, IterationCapFlagsResult) {
  const FitModel m(ModelKind::lorentzian);
  const auto x = linspace(-40e6, 40e6, 161);
  const auto y = evaluate(m, x, {1.0, 3e6, 7.58e6, 0.1});
  FitOptions opt;
  opt.max_iterations = 1;
  opt.initial = std::vector<double>{0.5, -5e6, 20e6, 0.0};
  const auto r = fit(m, x, y, std::nullopt, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_FALSE(r.reliable);
  EXPECT_EQ(r.iterations, 1u);
}

TEST(Fit, Preconditions) {
  const FitModel m(ModelKind::lorentzian);
  const std::vector<double> x4 = {0, 1, 2, 3}, y4 = {0, 1, 0, 0};
  EXPECT_THROW(fit(m, x4, y4), InsufficientDataError);
  const std::vector<double> x = {0, 0, 0, 0, 0}, y = {1, 1, 1, 1, 1};
  EXPECT_THROW(fit(FitModel(ModelKind::single_exponential), x, y), RankDeficientError);
  const std::vector<double> xs = {0, 1, 2}, ys = {1, 2};
  EXPECT_THROW(fit(FitModel(ModelKind::single_exponential), xs, ys), InvalidInput);
}

TEST(Fit, BiexponentialOrderingIsCanonical) {
  const FitModel m(ModelKind::biexponential);
  const auto x = logspace(0.05, 2000.0, 80);
  const auto y = evaluate(m, x, {0.59, 6.75, 0.348, 385.0});
  FitOptions opt;
  opt.initial = std::vector<double>{0.3, 300.0, 0.6, 5.0};
  const auto r = fit(m, x, y, std::nullopt, opt);
  EXPECT_LT(r.value("t1"), r.value("t2"));
  EXPECT_NEAR(r.value("t1"), 6.75, 1e-6);
}

TEST(Fit, FixedParameterIsHeld) {
  FitModel m(ModelKind::g2_cw);
  m.fix("bunch_amplitude").fix("bunch_time");
  const auto x = linspace(-20e-9, 20e-9, 201);
  const auto y = evaluate(m, x, {50.0, 0.2, 1e-9, 0.0, 5e-9});
  FitOptions opt;
  opt.initial = std::vector<double>{40.0, 0.4, 2e-9, 0.0, 5e-9};
  const auto r = fit(m, x, y, std::nullopt, opt);
  EXPECT_EQ(r.value("bunch_amplitude"), 0.0);
  EXPECT_EQ(r.sigma("bunch_amplitude"), 0.0);
  EXPECT_NEAR(r.value("g2_0"), 0.2, 1e-8);
}

TEST(Fit, GradientVanishesAtOptimum) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (const auto& c : library_cases()) {
    const FitModel m(c.kind);
    auto y = evaluate(m, c.x, c.truth);
    const double level = *std::max_element(y.begin(), y.end());
    for (double& v : y) v += 0.01 * level * noise(rng);
    FitOptions opt;
    opt.initial = c.truth;
    const auto r = fit(m, c.x, y, std::nullopt, opt);
    EXPECT_TRUE(r.converged) << to_string(c.kind);
    EXPECT_LT(r.gradient_norm, 1e-8) << to_string(c.kind);
  }
}

TEST(Fit, UncertaintyCoverageNearOneSigma) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (const auto& c : library_cases()) {
    const FitModel m(c.kind);
    const auto clean = evaluate(m, c.x, c.truth);
    const double level = *std::max_element(clean.begin(), clean.end());
    const std::vector<double> sigma(c.x.size(), 0.005 * level);
    std::vector<int> covered(m.size(), 0);
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
      auto y = clean;
      for (double& v : y) v += sigma[0] * noise(rng);
      FitOptions opt;
      opt.initial = c.truth;
      const auto r = fit(m, c.x, y, std::span<const double>(sigma), opt);
      for (std::size_t k = 0; k < m.size(); ++k) {
        if (std::abs(r.parameters[k] - c.truth[k]) <= r.sigmas[k]) ++covered[k];
      }
    }
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double frac = static_cast<double>(covered[k]) / trials;
      EXPECT_NEAR(frac, 0.683, 0.05) << to_string(c.kind) << " " << m.parameters()[k].name;
    }
  }
}

TEST(InitialGuess, LorentzianCenterAtMaximum) {
  const FitModel m(ModelKind::lorentzian);
  const auto x = linspace(-40e6, 40e6, 81);
  const auto y = evaluate(m, x, {1.0, 11e6, 7.58e6, 0.2});
  const auto p = initial_guess(m, x, y);
  EXPECT_DOUBLE_EQ(p[1], 11e6);
  EXPECT_GT(p[0], 0.0);
}

TEST(InitialGuess, BiexponentialTimescalesWithinFactorThree) {
  const FitModel m(ModelKind::biexponential);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ut1(2.0, 20.0), uw(0.3, 0.7);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double t1 = ut1(rng), t2 = 50.0 * t1;
    const double w1 = uw(rng), w2 = 1.0 - w1;
    const auto x = logspace(0.01 * t1, 6.0 * t2, 100);
    auto y = evaluate(m, x, {w1, t1, w2, t2});
    for (double& v : y) v += 0.01 * v * noise(rng);
    const auto p = initial_guess(m, x, y);
    EXPECT_GT(p[1], t1 / 3);
    EXPECT_LT(p[1], t1 * 3);
    EXPECT_GT(p[3], t2 / 3);
    EXPECT_LT(p[3], t2 * 3);
  }
}

TEST(InitialGuess, FlatDataFallsBackToMidpoints) {
  FitModel m(ModelKind::lorentzian);
  m.set_bounds("fwhm", 1e6, 9e6).set_bounds("center", -4.0, 8.0);
  const auto x = linspace(0, 10, 20);
  const std::vector<double> y(20, 3.0);
  const auto p = initial_guess(m, x, y);
  for (std::size_t k = 0; k < m.size(); ++k) {
    EXPECT_DOUBLE_EQ(p[k], 0.5 * (m.parameters()[k].lower + m.parameters()[k].upper));
  }
}

TEST(FitReport, JsonCarriesFlags) {
  const FitModel m(ModelKind::echo_decay);
  const auto x = linspace(0.1e-6, 1.5e-6, 15);
  const auto y = evaluate(m, x, {1.0, 2.6e-6});
  const auto json = fit_report_json(fit(m, x, y));
  for (const char* key : {"\"model\"", "\"parameters\"", "\"sigmas\"", "\"chi2\"", "\"converged\"", "\"t2o\""}) {
    EXPECT_NE(json.find(key), std::string::npos) << key;
  }
}
