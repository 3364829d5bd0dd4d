#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "speckle/stats.hpp"

namespace {

using namespace speckle;
using stats::PairedSeries;

TEST(PairedSeries, Validation) {
  EXPECT_THROW(PairedSeries({1, 2}, {1, 2}), InvalidArgument);
  EXPECT_THROW(PairedSeries({1, 2, 3}, {1, 2}), InvalidArgument);
  EXPECT_THROW(PairedSeries({1, 2, NAN}, {1, 2, 3}), InvalidArgument);
}

TEST(Pearson, Examples) {
  EXPECT_NEAR(stats::pearson_r(PairedSeries({1, 2, 3}, {2, 4, 6})), 1.0, 1e-15);
  EXPECT_NEAR(stats::pearson_r(PairedSeries({1, 2, 3}, {-1, -2, -3})), -1.0, 1e-15);
  EXPECT_NEAR(stats::pearson_r(PairedSeries({1, 2, 3}, {1, 3, 2})), 0.5, 1e-15);
  EXPECT_THROW(stats::pearson_r(PairedSeries({1, 2, 3}, {5, 5, 5})), InvalidArgument);
}

TEST(Pearson, AffineAndSymmetric) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  std::vector<double> x(40), y(40);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = n(rng);
    y[i] = 0.3 * x[i] + n(rng);
  }
  const double r = stats::pearson_r(PairedSeries(x, y));
  EXPECT_NEAR(stats::pearson_r(PairedSeries(y, x)), r, 1e-15);
  std::vector<double> y2 = y;
  for (double& v : y2) v = 4.5 * v - 3.0;
  EXPECT_NEAR(stats::pearson_r(PairedSeries(x, y2)), r, 1e-12);
  for (double a : {-2.5, 0.1, 7.0}) {
    std::vector<double> line = x;
    for (double& v : line) v = a * v + 1.25;
    EXPECT_NEAR(stats::pearson_r(PairedSeries(x, line)), a > 0 ? 1.0 : -1.0, 1e-12);
  }
}

TEST(Regression, Examples) {
  const auto exact = stats::linear_regression(PairedSeries({0, 1, 2, 5}, {1, 4, 7, 16}));
  EXPECT_NEAR(exact.slope, 3.0, 1e-14);
  EXPECT_NEAR(exact.intercept, 1.0, 1e-14);
  EXPECT_NEAR(exact.r, 1.0, 1e-14);
  const auto hand = stats::linear_regression(PairedSeries({0, 1, 2}, {0, 0, 3}));
  EXPECT_NEAR(hand.slope, 1.5, 1e-15);
  EXPECT_NEAR(hand.intercept, -0.5, 1e-15);
  EXPECT_THROW(stats::linear_regression(PairedSeries({1, 2, 3}, {4, 4, 4})), InvalidArgument);
  EXPECT_THROW(stats::linear_regression(PairedSeries({2, 2, 2}, {1, 2, 3})), InvalidArgument);
}

TEST(Regression, RSquaredIsExplainedVariance) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  std::vector<double> x(100), y(100);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = n(rng);
    y[i] = 2.0 - x[i] + 0.5 * n(rng);
  }
  const auto fit = stats::linear_regression(PairedSeries(x, y));
  double my = 0.0;
  for (double v : y) my += v;
  my /= y.size();
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ss_tot += (y[i] - my) * (y[i] - my);
    const double e = y[i] - fit.intercept - fit.slope * x[i];
    ss_res += e * e;
  }
  EXPECT_NEAR(fit.r * fit.r, 1.0 - ss_res / ss_tot, 1e-12);
}

TEST(Fisher, Examples) {
  const auto same = stats::fisher_compare(0.4, 56, 0.4, 56);
  EXPECT_EQ(same.z, 0.0);
  EXPECT_EQ(same.p_two_sided, 1.0);
  const auto f = stats::fisher_compare(0.5, 103, 0.0, 103);
  EXPECT_NEAR(f.z, 3.8841809960604663, 1e-12);
  EXPECT_NEAR(f.p_two_sided, 0.00010267540182064643, 1e-12);
  const auto swapped = stats::fisher_compare(0.0, 103, 0.5, 103);
  EXPECT_EQ(swapped.z, -f.z);
  EXPECT_EQ(swapped.p_two_sided, f.p_two_sided);
}

TEST(Fisher, Errors) {
  EXPECT_THROW(stats::fisher_compare(1.0, 10, 0.2, 10), InvalidArgument);
  EXPECT_THROW(stats::fisher_compare(0.1, 3, 0.2, 10), InvalidArgument);
  EXPECT_THROW(stats::fisher_compare(0.1, 10, -1.0, 10), InvalidArgument);
}

TEST(Fisher, PValueDecreasesWithGap) {
  double prev = 1.0;
  for (double r1 = 0.0; r1 < 0.95; r1 += 0.05) {
    const double p = stats::fisher_compare(r1, 50, 0.0, 50).p_two_sided;
    EXPECT_LE(p, prev);
    EXPECT_GT(p, 0.0);
    prev = p;
  }
}

TEST(NormalCdf, ReferencePoints) {
  EXPECT_DOUBLE_EQ(stats::normal_cdf(0.0), 0.5);
  EXPECT_NEAR(stats::normal_cdf(1.959963984540054), 0.975, 1e-15);
  EXPECT_NEAR(stats::normal_cdf(-8.0), 6.22096057427178e-16, 1e-28);
}

TEST(Spearman, Examples) {
  EXPECT_NEAR(stats::spearman_rho(PairedSeries({1, 2, 3, 4}, {10, 20, 35, 90})), 1.0, 1e-15);
  EXPECT_NEAR(stats::spearman_rho(PairedSeries({1, 2, 3, 4}, {4, 3, 2, 1})), -1.0, 1e-15);
  EXPECT_NEAR(stats::spearman_rho(PairedSeries({1, 2, 3, 4}, {1, 3, 2, 4})), 0.8, 1e-15);
}

TEST(Spearman, TiesUseAverageRanks) {
  // Ranks x: 1, 2.5, 2.5, 4; y: 1, 2, 3, 4; Pearson on ranks.
  const double rho = stats::spearman_rho(PairedSeries({1, 2, 2, 3}, {1, 2, 3, 4}));
  const double expected = stats::pearson_r(PairedSeries({1, 2.5, 2.5, 4}, {1, 2, 3, 4}));
  EXPECT_NEAR(rho, expected, 1e-15);
}

TEST(Spearman, MonotoneTransformInvariant) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  std::vector<double> x(30), y(30);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = u(rng);
    y[i] = x[i] + u(rng);
  }
  const double rho = stats::spearman_rho(PairedSeries(x, y));
  std::vector<double> tx = x, ty = y;
  for (double& v : tx) v = std::exp(v);
  for (double& v : ty) v = -1.0 / v;
  EXPECT_NEAR(stats::spearman_rho(PairedSeries(tx, ty)), rho, 1e-14);
}

}  // namespace
