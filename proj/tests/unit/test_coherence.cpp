#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "afcmem/coherence.hpp"
#include "afcmem/errors.hpp"
#include "afcmem/fft.hpp"

using namespace afcmem;

namespace {

HeterodyneConfig config(double noise = 0.0) {
  HeterodyneConfig c;
  c.duration = 1e-6;
  c.sample_rate = 2e9;
  c.noise_rms = noise;
  return c;
}

double stddev(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST(EchoIntensity, Values) {
  const EchoDecayModel m{3.0, 2.6e-6};
  EXPECT_DOUBLE_EQ(echo_intensity(m, 0.0), 3.0);
  EXPECT_NEAR(echo_intensity(m, 0.65e-6), 3.0 / std::exp(1.0), 1e-15);
  EXPECT_DOUBLE_EQ(echo_intensity({1.0, 2.6e-6}, 1e-6), std::exp(-4.0 / 2.6));
  EXPECT_NEAR(echo_intensity({1.0, 2.6e-6}, 1e-6), 0.2146, 2e-4);
  EXPECT_THROW(echo_intensity(m, -1e-9), InvalidInput);
  EXPECT_THROW(echo_intensity({0.0, 1e-6}, 0.0), InvalidInput);
  EXPECT_THROW(echo_intensity({1.0, 0.0}, 0.0), InvalidInput);
}

TEST(EchoIntensity, FieldLabels) {
  EXPECT_DOUBLE_EQ(t2o_for_field(0.03), 2.0e-6);
  EXPECT_DOUBLE_EQ(t2o_for_field(0.06), 2.6e-6);
  EXPECT_DOUBLE_EQ(t2o_for_field(0.09), 2.6e-6);
  EXPECT_THROW(t2o_for_field(0.5), InvalidInput);
}

TEST(Heterodyne, NoiselessPeakAtBeatFrequency) {
  const auto s = synthesize_heterodyne(1.0, config(), 1);
  fft::cvec buf = s.samples();
  fft::forward(buf);
  std::size_t best = 1;
  for (std::size_t k = 1; k < buf.size() / 2; ++k) {
    if (std::abs(buf[k]) > std::abs(buf[best])) best = k;
  }
  EXPECT_DOUBLE_EQ(static_cast<double>(best) / s.duration(), 85e6);
}

TEST(Heterodyne, Preconditions) {
  auto c = config();
  c.sample_rate = 150e6;
  EXPECT_THROW(synthesize_heterodyne(1.0, c, 1), NyquistError);
  c = config();
  c.duration = 100e-9;
  const auto s = synthesize_heterodyne(1.0, c, 1);
  EXPECT_THROW(extract_echo_amplitude(s, 85e6), InsufficientDataError);
}

TEST(Extract, NoiselessIsExactAndLinear) {
  auto c = config();
  for (double f : {85e6, 85.37e6}) {
    c.beat_frequency = f;
    const double a1 = extract_echo_amplitude(synthesize_heterodyne(0.7, c, 1), f);
    const double a2 = extract_echo_amplitude(synthesize_heterodyne(1.4, c, 1), f);
    EXPECT_NEAR(a1, 0.7, 1e-3);
    EXPECT_NEAR(a2 / a1, 2.0, 1e-12);
  }
}

TEST(Extract, DcInputGivesNothing) {
  const TemporalWaveform dc(0.0, 0.5e-9, std::vector<std::complex<double>>(2000, 3.0));
  // Window sidelobe leakage only.
  EXPECT_LT(extract_echo_amplitude(dc, 85e6), 1e-5);
}

TEST(Extract, PureNoiseFloor) {
  const auto c = config(0.1);
  const double sigma = amplitude_noise_sigma(0.1, 2000);
  const double a = extract_echo_amplitude(synthesize_heterodyne(0.0, c, 17), 85e6);
  EXPECT_LT(a, 5 * sigma);
}

TEST(Extract, RoundTripWithinTwoPercent) {
  const auto c = config(0.1);  // amplitude over per-sample noise = 10
  int within = 0;
  double mean = 0.0;
  const int trials = 300;
  for (int k = 0; k < trials; ++k) {
    const double a = extract_echo_amplitude(synthesize_heterodyne(1.0, c, 1000 + k), 85e6);
    mean += a / trials;
    if (std::abs(a - 1.0) <= 0.02) ++within;
  }
  EXPECT_GE(within, trials * 99 / 100);
  EXPECT_NEAR(mean, 1.0, 0.005);
}

TEST(Extract, NoiseSigmaMatchesMonteCarlo) {
  const auto c = config(1.0);
  std::vector<double> est;
  for (int k = 0; k < 800; ++k) est.push_back(extract_echo_amplitude(synthesize_heterodyne(1.0, c, 50 + k), 85e6));
  EXPECT_NEAR(stddev(est) / amplitude_noise_sigma(1.0, 2000), 1.0, 0.08);
}

TEST(Extract, AveragingTwentyShotsShrinksSpread) {
  const auto c = config(2.0);
  std::vector<double> single, averaged;
  for (int k = 0; k < 400; ++k) {
    single.push_back(extract_echo_amplitude(synthesize_heterodyne(1.0, c, 7000 + k), 85e6));
    std::vector<TemporalWaveform> shots;
    for (int r = 0; r < 20; ++r) shots.push_back(synthesize_heterodyne(1.0, c, 100000 + 20 * k + r));
    averaged.push_back(extract_echo_amplitude(average_traces(shots), 85e6));
  }
  EXPECT_NEAR(stddev(single) / stddev(averaged), std::sqrt(20.0), 0.15 * std::sqrt(20.0));
}

TEST(Average, RejectsMismatchedGrids) {
  std::vector<TemporalWaveform> v = {TemporalWaveform(0.0, 1e-9, std::vector<std::complex<double>>(4)),
                                     TemporalWaveform(0.0, 2e-9, std::vector<std::complex<double>>(4))};
  EXPECT_THROW(average_traces(v), GridMismatch);
  EXPECT_THROW(average_traces(std::span<const TemporalWaveform>()), InvalidInput);
}

TEST(Hahn, TimelineBookkeeping) {
  HahnSequence h;
  h.t12 = 0.8e-6;
  const auto tl = h.timeline();
  ASSERT_EQ(tl.size(), 3u);
  EXPECT_DOUBLE_EQ(tl[0].duration, 25e-9);
  EXPECT_DOUBLE_EQ(tl[1].duration, 50e-9);
  EXPECT_DOUBLE_EQ(tl[1].start, 0.8e-6);
  EXPECT_DOUBLE_EQ(tl[2].start, 1.6e-6);
  EXPECT_DOUBLE_EQ(tl[2].start - tl[0].start, 2 * h.t12);
}

TEST(EchoDecayPipeline, RecoversCoherenceTime) {
  EchoDecayConfig cfg;
  for (int k = 0; k < 15; ++k) cfg.t12.push_back(0.1e-6 + k * 0.1e-6);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    cfg.seed = seed;
    const auto m = measure_echo_decay(cfg);
    EXPECT_TRUE(m.fit.reliable);
    EXPECT_NEAR(m.t2o, 2.6e-6, 0.05 * 2.6e-6) << "seed " << seed;
    EXPECT_GT(m.t2o_sigma, 0.0);
  }
}

TEST(EchoDecayPipeline, DeterministicAndExported) {
  EchoDecayConfig cfg;
  cfg.t12 = {0.2e-6, 0.5e-6, 0.9e-6, 1.3e-6};
  cfg.averages = 4;
  const auto a = measure_echo_decay(cfg);
  const auto b = measure_echo_decay(cfg);
  EXPECT_EQ(a.intensity, b.intensity);
  const auto path = std::filesystem::temp_directory_path() / "afcmem_decay.csv";
  write_decay_csv(path, a);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t12_s,intensity,sigma");
}
