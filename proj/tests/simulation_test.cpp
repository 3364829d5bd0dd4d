#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "speckle/distances.hpp"
#include "speckle/distfit.hpp"
#include "speckle/estimators.hpp"
#include "speckle/ingest.hpp"
#include "speckle/simulation.hpp"
#include "test_support.hpp"

namespace {

using namespace speckle;

std::vector<double> to_vector(const AmplitudeSample& s) { return {s.values().begin(), s.values().end()}; }

AmplitudeSample phasor(std::uint64_t count, std::size_t n, std::uint64_t seed) {
  return sim::sample_phasor_sum({n, sim::FixedScatterers{count}, seed});
}

TEST(Simulation, ConfigValidation) {
  EXPECT_THROW(sim::sample_phasor_sum({0, sim::FixedScatterers{3}, 1}), InvalidArgument);
  EXPECT_THROW(sim::sample_phasor_sum({5, sim::FixedScatterers{0}, 1}), InvalidArgument);
  EXPECT_THROW(sim::sample_phasor_sum({5, sim::NegBinomialScatterers{0.0, 2.0}, 1}), InvalidArgument);
  EXPECT_THROW(sim::sample_phasor_sum({5, sim::NegBinomialScatterers{10.0, -1.0}, 1}), InvalidArgument);
  EXPECT_THROW(sim::sample_rayleigh(0, 1.0, 1), InvalidArgument);
  EXPECT_THROW(sim::sample_k(10, 0.0, 1), InvalidArgument);
  EXPECT_THROW(sim::sample_burr(10, 1.0, 0.0, 1.0, 1), InvalidArgument);
}

TEST(Simulation, SinglePhasorHasUnitModulus) {
  for (std::uint64_t seed : {0ull, 7ull, 123456789ull}) {
    const auto s = phasor(1, 1000, seed);
    EXPECT_FALSE(s.normalized());
    for (double v : s.values()) EXPECT_EQ(v, 1.0);
  }
}

TEST(Simulation, ManyPhasorsApproachBenchmarkContrast) {
  const auto s = phasor(500, 100000, 11);
  EXPECT_NEAR(estimators::contrast_ratio(s), benchmark::kContrastRatio, 0.01);
}

TEST(Simulation, NegativeBinomialIsSuperRayleigh) {
  const auto s = sim::sample_phasor_sum({100000, sim::NegBinomialScatterers{500.0, 2.0}, 5});
  const double cr = estimators::contrast_ratio(s);
  EXPECT_GT(cr, benchmark::kContrastRatio + 0.05);
  // The fluctuating-count limit is K(alpha): compare against the compound sampler.
  EXPECT_NEAR(cr, estimators::contrast_ratio(sim::sample_k(100000, 2.0, 6)), 0.02);
}

TEST(Simulation, RayleighInverseCdf) {
  EXPECT_NEAR(sim::rayleigh_quantile(1.0 - std::exp(-1.0), std::numbers::sqrt2 / 2.0), 1.0, 1e-15);
  EXPECT_EQ(sim::rayleigh_quantile(0.0, 3.0), 0.0);
}

TEST(Simulation, RayleighMoments) {
  const auto s = sim::sample_rayleigh(1000000, std::numbers::sqrt2 / 2.0, 2024);
  EXPECT_NEAR(speckle::detail::mean(s.values()), std::sqrt(std::numbers::pi) / 2.0, 0.005);
  EXPECT_NEAR(std::sqrt(speckle::detail::mean_square(s.values())), 1.0, 0.005);
}

TEST(Simulation, KUnitMeanSquare) {
  const auto s = sim::sample_k(1000000, 4.0, 3);
  EXPECT_NEAR(std::sqrt(speckle::detail::mean_square(s.values())), 1.0, 0.01);
}

TEST(Simulation, KWithLargeAlphaIsRayleigh) {
  const auto s = ingest::normalize_rms(sim::sample_k(1000000, 1e4, 8));
  EXPECT_LT(distances::d_ks(s), 0.01);
}

TEST(Simulation, KHistogramMatchesDensity) {
  for (double alpha : {0.5, 2.0, 8.0}) {
    const auto s = sim::sample_k(1000000, alpha, 77);
    const double mu = speckle::detail::mean_square(s.values());
    const auto [centers, dens] = test::histogram_density(s.values(), 0.0, 4.0, 80);
    const std::vector<double> params = {alpha, mu};
    double mse = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      const double gap = dens[i] - distfit::pdf(distfit::Family::k_dist, params, centers[i]);
      mse += gap * gap;
    }
    EXPECT_LT(mse / static_cast<double>(centers.size()), 1e-3) << "alpha=" << alpha;
  }
}

TEST(Simulation, BurrInverseCdf) {
  EXPECT_NEAR(sim::burr_quantile(0.75, 1.0, 2.0, 1.0), std::sqrt(3.0), 1e-14);
  EXPECT_EQ(sim::burr_quantile(0.0, 1.0, 2.0, 1.0), 0.0);
  EXPECT_EQ(sim::burr_quantile(0.0, 3.0, 0.7, 5.0), 0.0);
}

TEST(Simulation, BurrMatchesAnalyticCdf) {
  const double alpha = 1.0, c = 2.0, k = 1.5;
  const auto s = sim::sample_burr(1000000, alpha, c, k, 99);
  auto cdf = [&](double x) { return 1.0 - std::pow(1.0 + std::pow(x / alpha, c), -k); };
  std::vector<double> v = to_vector(s);
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = cdf(v[i]);
    sup = std::max({sup, (i + 1) / n - f, f - i / n});
  }
  EXPECT_LT(sup, 0.005);
}

TEST(Simulation, Deterministic) {
  EXPECT_EQ(to_vector(phasor(7, 5000, 42)), to_vector(phasor(7, 5000, 42)));
  const sim::SimConfig nb{5000, sim::NegBinomialScatterers{20.0, 1.5}, 9};
  EXPECT_EQ(to_vector(sim::sample_phasor_sum(nb)), to_vector(sim::sample_phasor_sum(nb)));
  EXPECT_EQ(to_vector(sim::sample_rayleigh(3000, 1.0, 5)), to_vector(sim::sample_rayleigh(3000, 1.0, 5)));
  EXPECT_EQ(to_vector(sim::sample_k(3000, 2.0, 5)), to_vector(sim::sample_k(3000, 2.0, 5)));
  EXPECT_EQ(to_vector(sim::sample_burr(3000, 1.0, 2.0, 1.5, 5)), to_vector(sim::sample_burr(3000, 1.0, 2.0, 1.5, 5)));
}

TEST(Simulation, PrefixStableAcrossBlocks) {
  // A longer run extends a shorter one: each block depends only on seed and start index.
  const auto short_run = to_vector(sim::sample_rayleigh(sim::kBlockSize + 10, 1.0, 3));
  const auto long_run = to_vector(sim::sample_rayleigh(3 * sim::kBlockSize, 1.0, 3));
  EXPECT_TRUE(std::equal(short_run.begin(), short_run.end(), long_run.begin()));
}

TEST(Simulation, DifferentSeedsSameLaw) {
  const auto a = to_vector(phasor(20, 20000, 1));
  const auto b = to_vector(phasor(20, 20000, 2));
  EXPECT_NE(a, b);
  EXPECT_GT(test::two_sample_ks_pvalue(a, b), 1e-3);
  const auto c = to_vector(sim::sample_k(20000, 3.0, 1));
  const auto d = to_vector(sim::sample_k(20000, 3.0, 2));
  EXPECT_GT(test::two_sample_ks_pvalue(c, d), 1e-3);
}

TEST(Simulation, OutputsFiniteAndNonnegative) {
  for (const auto& s : {phasor(3, 5000, 1), sim::sample_phasor_sum({5000, sim::NegBinomialScatterers{2.0, 0.3}, 1}),
                        sim::sample_k(5000, 0.2, 1), sim::sample_burr(5000, 2.0, 0.5, 0.5, 1)}) {
    for (double v : s.values()) {
      ASSERT_TRUE(std::isfinite(v));
      ASSERT_GE(v, 0.0);
    }
  }
}

TEST(Simulation, PhasorSumConvergesToBenchmark) {
  double prev = 1.0;
  for (std::uint64_t count : {1u, 2u, 5u, 10u, 50u, 500u}) {
    const double d = distances::d_ks(ingest::normalize_rms(phasor(count, 100000, 31)));
    EXPECT_LE(d, prev + 0.005) << "N=" << count;
    prev = d;
  }
  EXPECT_LT(prev, 0.01);
}

}  // namespace
