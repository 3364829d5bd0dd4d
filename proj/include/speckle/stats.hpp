#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "speckle/error.hpp"

namespace speckle::stats {

/// Paired observations (x_i, y_i); equal lengths of at least three, finite.
class PairedSeries {
 public:
  PairedSeries(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size()) throw InvalidArgument("paired series must have equal lengths");
    if (x_.size() < 3) throw InvalidArgument("paired series needs at least three pairs");
    for (std::size_t i = 0; i < x_.size(); ++i) {
      if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) throw InvalidArgument("paired series values must be finite");
    }
  }

  [[nodiscard]] std::span<const double> x() const noexcept { return x_; }
  [[nodiscard]] std::span<const double> y() const noexcept { return y_; }
  [[nodiscard]] std::size_t size() const noexcept { return x_.size(); }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

struct Regression {
  double slope;
  double intercept;
  double r;
};

struct FisherResult {
  double z;
  double p_two_sided;
};

namespace detail {

struct Moments {
  double mx, my, sxx, syy, sxy;
};

inline Moments centered_moments(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  Moments m{std::accumulate(x.begin(), x.end(), 0.0) / n, std::accumulate(y.begin(), y.end(), 0.0) / n, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - m.mx;
    const double dy = y[i] - m.my;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  return m;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  const auto m = centered_moments(x, y);
  if (!(m.sxx > 0.0) || !(m.syy > 0.0)) throw InvalidArgument("correlation undefined for zero variance");
  return std::clamp(m.sxy / std::sqrt(m.sxx * m.syy), -1.0, 1.0);
}

// Average ranks (1-based); ties share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace detail

/// Standard normal CDF.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double pearson_r(const PairedSeries& s) { return detail::pearson(s.x(), s.y()); }

/// Ordinary least squares y = slope * x + intercept, with Pearson r.
inline Regression linear_regression(const PairedSeries& s) {
  const auto m = detail::centered_moments(s.x(), s.y());
  if (!(m.sxx > 0.0)) throw InvalidArgument("regression undefined for zero x variance");
  const double slope = m.sxy / m.sxx;
  return {slope, m.my - slope * m.mx, pearson_r(s)};
}

/// Independent-samples comparison of two correlation coefficients via Fisher's z.
inline FisherResult fisher_compare(double r1, std::size_t n1, double r2, std::size_t n2) {
  if (!(std::abs(r1) < 1.0) || !(std::abs(r2) < 1.0)) throw InvalidArgument("Fisher comparison needs |r| < 1");
  if (n1 <= 3 || n2 <= 3) throw InvalidArgument("Fisher comparison needs more than three observations per sample");
  const double se = std::sqrt(1.0 / static_cast<double>(n1 - 3) + 1.0 / static_cast<double>(n2 - 3));
  const double z = (std::atanh(r1) - std::atanh(r2)) / se;
  return {z, std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)))};
}

/// Spearman rank correlation (average ranks for ties).
inline double spearman_rho(const PairedSeries& s) {
  const auto rx = detail::average_ranks(s.x());
  const auto ry = detail::average_ranks(s.y());
  return detail::pearson(rx, ry);
}

}  // namespace speckle::stats
