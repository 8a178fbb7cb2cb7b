#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "afcmem/errors.hpp"
#include "afcmem/fitting.hpp"
#include "afcmem/hole_dynamics.hpp"

using namespace afcmem;

namespace {

FrequencyGrid small_grid() { return FrequencyGrid(0.0, 16e9, 801); }  // 20 MHz spacing

SpectralProfile square_pump(const FrequencyGrid& g, double width) {
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) w[i] = std::abs(g[i]) <= 0.5 * width ? 1.0 : 0.0;
  return SpectralProfile(g, w);
}

PumpModel make_pump(const FrequencyGrid& g, double rate, double width, double homogeneous, double b) {
  return PumpModel{rate, homogeneous, b, square_pump(g, width)};
}

void expect_normalized(const PopulationState& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_NEAR(s.ground()[i] + s.aux1()[i] + s.aux2()[i], 1.0, 1e-12);
  }
}

}  // namespace

TEST(Persistence, Validation) {
  PersistenceModel p;
  EXPECT_NO_THROW(p.validate());
  p.t1sa = 500.0;
  EXPECT_THROW(p.validate(), InvalidInput);
  PersistenceModel q;
  q.w1 = 0.8;
  EXPECT_THROW(q.validate(), InvalidInput);
}

TEST(Burn, ZeroRateLeavesStateUnchanged) {
  const auto g = small_grid();
  const auto s0 = PopulationState::thermal(g);
  const auto s1 = burn(s0, make_pump(g, 0.0, 8e9, 200e6, 0.5), {}, 0.12);
  EXPECT_EQ(s1.ground(), s0.ground());
  EXPECT_EQ(s1.aux1(), s0.aux1());
}

TEST(Burn, CalibratedSaturatedBurnGives86PercentTransfer) {
  const PersistenceModel pers;
  const double rate = 2000.0;
  const double duration = 0.12;
  const double b = calibrate_branching(rate, pers, duration, 0.14);
  EXPECT_GT(b, 0.0);
  EXPECT_LE(b, 1.0);
  EXPECT_NEAR(ground_after_constant_pump(rate, b, pers, duration), 0.14, 1e-9);

  const auto g = small_grid();
  const auto s = burn(PopulationState::thermal(g), make_pump(g, rate, 2e9, 50e6, b), pers, duration);
  const std::size_t c = g.nearest_index(0.0);
  EXPECT_NEAR(s.ground()[c], 0.14, 1e-6);
  const auto od = population_to_od(s, SpectralProfile::flat(g, 1.1));
  EXPECT_NEAR(od[c], 0.154, 1e-6);
  EXPECT_NEAR(1.0 - od[c] / 1.1, 0.86, 1e-6);
}

TEST(Burn, UnreachableCalibrationRejected) {
  EXPECT_THROW(calibrate_branching(1.0, {}, 0.12, 0.14), InvalidInput);
}

TEST(Burn, SquarePumpMatchesDirectConvolutionOracle) {
  const auto g = small_grid();
  const double width = 8e9;
  const double gamma = 200e6;
  const double rate = 40.0;
  const double b = 0.5;
  const PersistenceModel pers;
  const auto pump = make_pump(g, rate, width, gamma, b);
  const auto s = burn(PopulationState::thermal(g), pump, pers, 0.12);

  // Brute-force linear convolution with a unit-peak Lorentzian.
  std::vector<double> r(g.size(), 0.0);
  const double hw = 0.5 * gamma;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double d = g[i] - g[j];
      r[i] += pump.pump_spectrum[j] * hw * hw / (d * d + hw * hw);
    }
  }
  const double peak = *std::max_element(r.begin(), r.end());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double expect = ground_after_constant_pump(rate * r[i] / peak, b, pers, 0.12);
    EXPECT_NEAR(s.ground()[i], expect, 1e-9) << "at " << g[i];
  }
  expect_normalized(s);
  const double fwhm = hole_fwhm(s);
  EXPECT_GT(fwhm, width);
  EXPECT_LT(fwhm, width + 3.0 * gamma);
}

TEST(LorentzianConvolve, AgreesWithDirectSum) {
  FrequencyGrid g(0, 2e9, 201);
  std::vector<double> w(g.size(), 0.0);
  w[50] = 1.0;
  w[120] = 0.5;
  w[121] = 0.25;
  const auto out = lorentzian_convolve(g, w, 1e8);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double ref = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double d = g[i] - g[j];
      ref += w[j] * 2.5e15 / (d * d + 2.5e15);
    }
    EXPECT_NEAR(out[i], ref, 1e-12);
  }
}

TEST(Burn, LongerBurnNeverRaisesGround) {
  const auto g = small_grid();
  const auto pump = make_pump(g, 30.0, 8e9, 200e6, 0.6);
  const PersistenceModel pers;
  auto prev = PopulationState::thermal(g).ground();
  for (double t : {0.01, 0.03, 0.06, 0.12, 0.5, 2.0}) {
    const auto s = burn(PopulationState::thermal(g), pump, pers, t);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_LE(s.ground()[i], prev[i] + 1e-15);
    prev = s.ground();
  }
}

TEST(Burn, ConservationThroughComposition) {
  const auto g = small_grid();
  const auto pump = make_pump(g, 30.0, 6e9, 200e6, 0.6);
  const PersistenceModel pers;
  auto s = PopulationState::thermal(g);
  for (int k = 0; k < 5; ++k) {
    s = burn(s, pump, pers, 0.05);
    expect_normalized(s);
    s = decay(s, pers, 1.3);
    expect_normalized(s);
  }
}

TEST(Decay, IdentitySemigroupAndFullRefill) {
  const auto g = small_grid();
  const PersistenceModel pers;
  const auto s = burn(PopulationState::thermal(g), make_pump(g, 30.0, 8e9, 200e6, 0.6), pers, 0.12);
  const auto same = decay(s, pers, 0.0);
  EXPECT_EQ(same.ground(), s.ground());

  const auto ab = decay(decay(s, pers, 3.0), pers, 40.0);
  const auto direct = decay(s, pers, 43.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(ab.aux1()[i], direct.aux1()[i], 1e-16);
    EXPECT_NEAR(ab.aux2()[i], direct.aux2()[i], 1e-16);
    EXPECT_NEAR(ab.ground()[i], direct.ground()[i], 1e-15);
  }
  const auto full = decay(s, pers, 1e6);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(full.aux1()[i], 0.0);
    EXPECT_EQ(full.aux2()[i], 0.0);
    EXPECT_EQ(full.ground()[i], 1.0);
  }
  EXPECT_THROW(decay(s, pers, -1.0), InvalidInput);
}

TEST(Decay, AreaRatioFollowsBiexponential) {
  const auto g = small_grid();
  const PersistenceModel pers;
  const auto ref = SpectralProfile::flat(g, 1.1);
  // Freshly burned hole, split between the classes in the ratio w1:w2.
  std::vector<double> gr(g.size(), 1.0), a1(g.size(), 0.0), a2(g.size(), 0.0);
  for (std::size_t i = 300; i < 500; ++i) {
    a1[i] = 0.86 * pers.class1_share();
    a2[i] = 0.86 - a1[i];
    gr[i] = 0.14;
  }
  const PopulationState s(g, gr, a1, a2);
  const double ratio = hole_area(decay(s, pers, 6.75), ref) / hole_area(decay(s, pers, 0.05), ref);
  // 0.59 e^-1 + 0.348 e^(-6.75/385) over the same at 50 ms
  EXPECT_NEAR(ratio, 0.5988, 5e-5);
}

TEST(Decay, AreaCurveRefitsToPersistenceParameters) {
  const auto g = small_grid();
  const PersistenceModel pers;
  const auto ref = SpectralProfile::flat(g, 1.1);
  const auto s = burn(PopulationState::thermal(g), make_pump(g, 30.0, 8e9, 200e6, 0.6), pers, 0.12);
  const double a0 = hole_area(s, ref) / (pers.w1 + pers.w2);
  std::vector<double> t, a;
  for (int k = 0; k < 60; ++k) {
    const double tk = 0.05 * std::pow(10.0, 4.6 * k / 59.0);
    t.push_back(tk);
    a.push_back(hole_area(decay(s, pers, tk), ref) / a0);
  }
  const auto r = fit(FitModel(ModelKind::biexponential), t, a);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.value("w1"), 0.59, 0.02 * 0.59);
  EXPECT_NEAR(r.value("t1"), 6.75, 0.02 * 6.75);
  EXPECT_NEAR(r.value("w2"), 0.348, 0.02 * 0.348);
  EXPECT_NEAR(r.value("t2"), 385.0, 0.02 * 385.0);
}

TEST(PopulationToOd, Products) {
  FrequencyGrid g(0, 1, 3);
  PopulationState s(g, {1.0, 0.14, 0.0}, {0.0, 0.5, 0.6}, {0.0, 0.36, 0.4});
  const auto od = population_to_od(s, SpectralProfile::flat(g, 1.1));
  EXPECT_DOUBLE_EQ(od[0], 1.1);
  EXPECT_NEAR(od[1], 0.154, 1e-15);
  EXPECT_EQ(od[2], 0.0);
  EXPECT_THROW(population_to_od(s, SpectralProfile::flat(FrequencyGrid(0, 2, 3), 1.0)), GridMismatch);
}

TEST(Serrodyne, IdealRampIsPureTranslation) {
  const auto s = serrodyne_spectrum(100e6, 2 * std::numbers::pi, 1024);
  EXPECT_NEAR(s.order_power(1), 1.0, 1e-6);
  for (int k : {-3, -2, -1, 0, 2, 3}) EXPECT_LT(s.order_power(k), 1e-6);
  EXPECT_DOUBLE_EQ(s.order_frequency(1), 100e6);
}

TEST(Serrodyne, ZeroAmplitudeStaysInCarrier) {
  const auto s = serrodyne_spectrum(100e6, 0.0, 256);
  EXPECT_NEAR(s.order_power(0), 1.0, 1e-12);
  for (int k : {-3, -2, -1, 1, 2, 3}) EXPECT_LT(s.order_power(k), 1e-20);
}

TEST(Serrodyne, PartialRampMatchesNaiveDft) {
  const std::size_t n = 512;
  const double amp = 0.9 * 2 * std::numbers::pi;
  const auto s = serrodyne_spectrum(50e6, amp, n);
  double sum = 0.0;
  for (int k = -3; k <= 3; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double u = static_cast<double>(j) / n;
      acc += std::polar(1.0, amp * u) * std::polar(1.0, -2 * std::numbers::pi * k * u);
    }
    EXPECT_NEAR(s.order_power(k), std::norm(acc / double(n)), 1e-12) << "order " << k;
    sum += s.order_power(k);
  }
  EXPECT_LE(sum, 1.0 + 1e-12);
  EXPECT_LT(s.relative_db(0), -10.0);
  EXPECT_LT(s.relative_db(-1), -10.0);
}
