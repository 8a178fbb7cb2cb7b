#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "afcmem/comb.hpp"
#include "afcmem/errors.hpp"
#include "afcmem/hole_dynamics.hpp"

using namespace afcmem;

namespace {

double oracle_efficiency(double d, double f, double d0) {
  const double x = std::numbers::pi / f;
  return std::pow(d / f, 2) * std::exp(-d / f) * std::pow(std::sin(x) / x, 2) * std::exp(-d0);
}

CombSpec make_spec(double spacing, double bandwidth, double finesse, ToothShape shape = ToothShape::square) {
  CombSpec s;
  s.tooth_spacing = spacing;
  s.bandwidth = bandwidth;
  s.finesse = finesse;
  s.tooth_shape = shape;
  return s;
}

void expect_rel(double got, double want, double rel, const char* what) {
  EXPECT_LE(std::abs(got - want), rel * std::abs(want)) << what << ": got " << got << " want " << want;
}

}  // namespace

TEST(CombSpec, TeethCountAndStorageTime) {
  auto s = make_spec(33.33e6, 8e9, 2.0);
  EXPECT_EQ(s.n_teeth(), 240u);
  EXPECT_NEAR(storage_time(s), 30e-9, 0.01e-9);
  EXPECT_NEAR(storage_time(make_spec(11.11e6, 8e9, 2)), 90e-9, 0.01e-9);
  EXPECT_DOUBLE_EQ(storage_time(make_spec(200e6, 8e9, 2)), 5e-9);
  EXPECT_DOUBLE_EQ(CombSpec::for_storage_time(90e-9, 8e9).tooth_spacing, 1.0 / 90e-9);
}

TEST(CombSpec, StorageTimeTimesSpacingIsOne) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1e7, 2e8);
  for (int k = 0; k < 1000; ++k) {
    const double delta = u(rng);
    auto s = make_spec(delta, 10 * delta, 2.0);
    EXPECT_LE(std::abs(storage_time(s) * delta - 1.0), std::numeric_limits<double>::epsilon());
  }
}

TEST(CombSpec, Validation) {
  EXPECT_THROW(make_spec(33.33e6, 8.01e9, 2.0).validate(), InvalidInput);  // not an integer multiple
  EXPECT_THROW(make_spec(5e9, 8e9, 2.0).validate(), InvalidInput);         // fewer than two teeth
  EXPECT_THROW(make_spec(1e8, 1e9, 0.5).validate(), InvalidInput);
  auto s = make_spec(1e8, 1e9, 2.0);
  s.background_od = 1.2;
  EXPECT_THROW(s.validate(), InvalidInput);
}

TEST(AnalyticEfficiency, Values) {
  EXPECT_NEAR(analytic_efficiency(1.1, 2.0, 0.05), 0.0673, 5e-5);
  EXPECT_EQ(analytic_efficiency(0.0, 2.0, 0.05), 0.0);
  EXPECT_NEAR(analytic_efficiency(1.1, 2.0, 0.0), 0.0707, 5e-5);
  for (double d : {0.3, 1.1, 2.5, 6.0}) {
    for (double f : {1.5, 2.0, 3.7, 10.0}) EXPECT_NEAR(analytic_efficiency(d, f, 0.1), oracle_efficiency(d, f, 0.1), 1e-15);
  }
}

TEST(AnalyticEfficiency, MaximumAtFiniteFinesse) {
  for (double d : {1.1, 3.0, 8.0}) {
    double best = -1.0, best_f = 0.0;
    for (double f = 1.0; f <= 40.0; f += 0.01) {
      const double e = analytic_efficiency(d, f, 0.05);
      if (e > best) {
        best = e;
        best_f = f;
      }
    }
    EXPECT_GT(best_f, 1.0);
    EXPECT_LT(best_f, 40.0);
    EXPECT_GT(best, analytic_efficiency(d, 40.0, 0.05));
  }
}

TEST(Synthesize, SquareTeethAreTwoLevel) {
  FrequencyGrid g(0, 2e9, 4001);
  const auto spec = make_spec(20e6, 1e9, 2.0);
  const auto od = synthesize(spec, g);
  std::size_t high = 0, low = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::abs(g[i]) > 0.5e9) {
      EXPECT_EQ(od[i], spec.peak_od);
      continue;
    }
    const bool at_low = std::abs(od[i] - 0.05) < 1e-12;
    const bool at_high = std::abs(od[i] - 1.1) < 1e-12;
    EXPECT_TRUE(at_low || at_high);
    at_low ? ++low : ++high;
  }
  EXPECT_NEAR(static_cast<double>(high) / static_cast<double>(high + low), 0.5, 0.03);
}

TEST(Synthesize, UnitFinesseIsFlatInBand) {
  FrequencyGrid g(0, 2e9, 4001);
  const auto od = synthesize(make_spec(20e6, 1e9, 1.0), g);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(od[i], 1.1);
}

TEST(Synthesize, StandardCombLevels) {
  FrequencyGrid g(285e6, 9e9, 36001);
  auto spec = make_spec(1.0 / 30e-9, 8e9, 2.0);
  spec.center_offset = 285e6;
  const auto m = comb_metrics(synthesize(spec, g));
  EXPECT_NEAR(m.finesse, 2.0, 0.02);
  EXPECT_NEAR(m.peak_od, 1.1, 0.011);
  EXPECT_NEAR(m.background_od, 0.05, 0.0005);
  EXPECT_EQ(m.n_teeth, 240u);
}

TEST(Synthesize, UnderresolvedRejected) {
  FrequencyGrid g(0, 2e9, 201);
  EXPECT_THROW(synthesize(make_spec(20e6, 1e9, 2.0), g), ResolutionError);
}

TEST(CombMetrics, RoundTripSquare) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uf(1.0, 6.0), ud(0.3, 4.0), ud0(0.0, 0.2);
  std::uniform_int_distribution<int> un(4, 40);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = un(rng);
    auto s = make_spec(25e6, n * 25e6, uf(rng));
    s.peak_od = ud(rng);
    s.background_od = std::min(ud0(rng), 0.5 * s.peak_od);
    s.center_offset = 1e8;
    const double width = s.tooth_width();
    const double spacing = width / 40.0;
    const auto points = static_cast<std::size_t>((s.bandwidth * 1.2) / spacing) + 1;
    FrequencyGrid g(s.center_offset, spacing * static_cast<double>(points - 1), points);
    const auto m = comb_metrics(synthesize(s, g));
    expect_rel(m.tooth_spacing, s.tooth_spacing, 0.01, "spacing");
    expect_rel(m.finesse, s.finesse, 0.01, "finesse");
    expect_rel(m.peak_od, s.peak_od, 0.01, "peak");
    if (s.background_od > 0.01) expect_rel(m.background_od, s.background_od, 0.01, "background");
    expect_rel(m.bandwidth, s.bandwidth, 0.01, "bandwidth");
    EXPECT_EQ(m.n_teeth, s.n_teeth());
  }
}

TEST(CombMetrics, RoundTripGaussianResolvedTeeth) {
  for (double f : {4.0, 5.0, 8.0}) {
    auto s = make_spec(20e6, 20 * 20e6, f, ToothShape::gaussian);
    FrequencyGrid g(0, 0.6e9, 12001);
    const auto m = comb_metrics(synthesize(s, g));
    expect_rel(m.tooth_spacing, s.tooth_spacing, 0.01, "spacing");
    expect_rel(m.finesse, f, 0.01, "finesse");
    expect_rel(m.peak_od, s.peak_od, 0.01, "peak");
    expect_rel(m.background_od, s.background_od, 0.01, "background");
  }
}

TEST(CombMetrics, FlatProfileHasNoPeriodicity) {
  FrequencyGrid g(0, 1e9, 1001);
  EXPECT_THROW(comb_metrics(SpectralProfile::flat(g, 1.1)), NoPeriodicityError);
}

TEST(CombMetrics, BurnedCombReachesLowBackground) {
  // Pump the troughs of a 30 ns comb, then grade the resulting OD profile.
  auto spec = make_spec(1.0 / 30e-9, 20.0 / 30e-9, 2.0);
  FrequencyGrid g(0, 1.0e9, 5001);
  const auto target = synthesize(spec, g);
  std::vector<double> weights(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    weights[i] = (std::abs(g[i]) <= 0.5 * spec.bandwidth && target[i] < 0.5) ? 1.0 : 0.0;
  }
  const PersistenceModel pers;
  const double rate = 2000.0;
  const double b = calibrate_branching(rate, pers, 0.12, 0.14);
  const PumpModel pump{3.5 * rate, 1e6, b, SpectralProfile(g, weights)};
  auto state = burn(PopulationState::thermal(g), pump, pers, 0.12);
  state = decay(state, pers, 0.18);
  const auto od = population_to_od(state, SpectralProfile::flat(g, 1.1));
  const auto m = comb_metrics(od);
  EXPECT_LE(m.background_od, 0.1);
  EXPECT_NEAR(m.tooth_spacing, spec.tooth_spacing, 0.01 * spec.tooth_spacing);
  EXPECT_GT(m.peak_od, 0.8);
}
