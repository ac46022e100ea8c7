#include <gtest/gtest.h>

#include <cmath>

#include "msrg/dense_oracle.hpp"
#include "msrg/restoration.hpp"
#include "msrg/synthesis.hpp"
#include "oracles/oracles.hpp"

using namespace msrg;

namespace {

double energy(const PixelField& f) {
  double e = 0.0;
  for (double v : f.values()) e += v * v;
  return e;
}

PixelField shifted(const PixelField& f, int dx, int dy) {
  PixelField out(f.size());
  for (int y = 0; y < f.side(); ++y)
    for (int x = 0; x < f.side(); ++x) out.at(x + dx, y + dy) = f.at(x, y);
  return out;
}

}  // namespace

TEST(PosteriorMean, MatchesDenseSolve) {
  SeededRng rng(51);
  for (int trial = 0; trial < 8; ++trial) {
    const Hyperparams h(std::exp(4.0 * rng.uniform() - 2.0), std::exp(4.0 * rng.uniform() - 2.0),
                        std::exp(4.0 * rng.uniform() - 4.0));
    const PixelField g = oracle::random_field(LatticeSize(8), rng, 5.0);
    const PixelField spectral = posterior_mean(g, h).restored;
    const PixelField dense = dense::posterior_mean_dense(g, h);
    EXPECT_LE(oracle::max_abs_diff(spectral.values(), dense.values()), 1e-8 * oracle::max_abs(dense.values()))
        << "trial " << trial;
  }
}

TEST(PosteriorMean, HugeBetaReturnsData) {
  SeededRng rng(52);
  const PixelField g = oracle::random_field(LatticeSize(16), rng, 50.0);
  const auto out = posterior_mean(g, Hyperparams(1.0, 1e12, 1.0));
  EXPECT_LE(oracle::max_abs_diff(out.restored.values(), g.values()), 1e-9 * oracle::max_abs(g.values()));
}

TEST(PosteriorMean, HugeAlphaFlattensToScaledMean) {
  SeededRng rng(53);
  const PixelField g = oracle::random_field(LatticeSize(8), rng, 10.0);
  double mean = 0.0;
  for (double v : g.values()) mean += v;
  mean /= 64.0;
  const Hyperparams h(1e10, 1.0, 1.0);
  const auto out = posterior_mean(g, h);
  const double level = wiener_gain(h, 0.0) * mean;
  for (double v : out.restored.values()) EXPECT_NEAR(v, level, 1e-6 * oracle::max_abs(g.values()));
}

TEST(PosteriorMean, GainSummaryIsInsideUnitInterval) {
  SeededRng rng(54);
  const PixelField g = oracle::random_field(LatticeSize(12), rng);
  const Hyperparams h(0.3, 2.0, 0.1);
  const auto out = posterior_mean(g, h);
  EXPECT_GT(out.gains.min, 0.0);
  EXPECT_LT(out.gains.max, 1.0);
  EXPECT_LE(out.gains.min, out.gains.mean);
  EXPECT_LE(out.gains.mean, out.gains.max);
  EXPECT_DOUBLE_EQ(out.gains.max, wiener_gain(h, 0.0));
  EXPECT_DOUBLE_EQ(out.gains.min, wiener_gain(h, 8.0));
}

TEST(PosteriorMean, Linearity) {
  SeededRng rng(55);
  const LatticeSize N(10);
  const PixelField g1 = oracle::random_field(N, rng), g2 = oracle::random_field(N, rng);
  const double a = 2.5, b = -0.75;
  PixelField mix(N);
  for (std::size_t i = 0; i < mix.values().size(); ++i) mix.values()[i] = a * g1.values()[i] + b * g2.values()[i];
  const Hyperparams h(0.4, 1.5, 0.02);
  const auto r1 = posterior_mean(g1, h).restored, r2 = posterior_mean(g2, h).restored;
  const auto rm = posterior_mean(mix, h).restored;
  for (std::size_t i = 0; i < rm.values().size(); ++i)
    EXPECT_NEAR(rm.values()[i], a * r1.values()[i] + b * r2.values()[i], 1e-12);
}

TEST(PosteriorMean, ShiftEquivariance) {
  SeededRng rng(56);
  const PixelField g = oracle::random_field(LatticeSize(9), rng, 3.0);
  const Hyperparams h(0.8, 0.5, 0.05);
  const auto a = posterior_mean(shifted(g, 2, -3), h).restored;
  const auto b = shifted(posterior_mean(g, h).restored, 2, -3);
  EXPECT_LE(oracle::max_abs_diff(a.values(), b.values()), 1e-12 * oracle::max_abs(b.values()));
}

TEST(PosteriorMean, EnergyContraction) {
  SeededRng rng(57);
  for (int trial = 0; trial < 20; ++trial) {
    const PixelField g = oracle::random_field(LatticeSize(16), rng, 20.0);
    const Hyperparams h(std::exp(6.0 * rng.uniform() - 3.0), std::exp(6.0 * rng.uniform() - 3.0),
                        std::exp(6.0 * rng.uniform() - 3.0));
    EXPECT_LE(energy(posterior_mean(g, h).restored), energy(g));
  }
}

TEST(PosteriorMean, NoClampingInsideTheMath) {
  PixelField g{LatticeSize(4)};
  for (double& v : g.values()) v = -500.0;
  const auto out = posterior_mean(g, Hyperparams(1.0, 1e12, 1.0));
  for (double v : out.restored.values()) EXPECT_NEAR(v, -500.0, 1e-6);
}
