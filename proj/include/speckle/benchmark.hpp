#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "speckle/error.hpp"
#include "speckle/quadrature.hpp"

// The benchmark distribution: Rayleigh with scale sqrt(2)/2, which is the law
// of RMS-normalized fully developed speckle amplitude.
namespace speckle::benchmark {

inline constexpr double kSigma = std::numbers::sqrt2 / 2.0;
/// Contrast ratio (std/mean) of any Rayleigh amplitude, sqrt(4/pi - 1).
inline const double kContrastRatio = std::sqrt(4.0 / std::numbers::pi - 1.0);
/// Support cut for the characteristic-function integral: exp(-x^2) < 1e-12 beyond it.
inline constexpr double kCfCutoff = 5.5;

namespace detail {
inline void require_nonnegative(double x) {
  if (!(x >= 0.0)) throw InvalidArgument("benchmark functions are defined for x >= 0");
}
}  // namespace detail

/// 2x exp(-x^2)
inline double pdf(double x) {
  detail::require_nonnegative(x);
  return 2.0 * x * std::exp(-x * x);
}

/// 1 - exp(-x^2)
inline double cdf(double x) {
  detail::require_nonnegative(x);
  return -std::expm1(-x * x);
}

/// E[exp(j t X)] for X ~ benchmark, by adaptive quadrature on [0, kCfCutoff].
inline std::complex<double> cf(double t) {
  if (!std::isfinite(t)) throw InvalidArgument("benchmark cf: t must be finite");
  if (t == 0.0) return {1.0, 0.0};
  auto integrand = [t](double x) {
    const double w = 2.0 * x * std::exp(-x * x);
    return std::complex<double>(w * std::cos(t * x), w * std::sin(t * x));
  };
  // Oscillatory for large t: seed the adaptive rule with one piece per half period.
  const int pieces = std::max(1, static_cast<int>(std::ceil(kCfCutoff * std::abs(t) / std::numbers::pi)));
  const double h = kCfCutoff / pieces;
  std::complex<double> total{0.0, 0.0};
  for (int i = 0; i < pieces; ++i) {
    total += quadrature::integrate<std::complex<double>>(integrand, i * h, (i + 1) * h,
                                                         1e-8 / pieces);
  }
  return total;
}

/// cf() over a grid. Tables are memoized per grid; safe for concurrent callers.
inline std::vector<std::complex<double>> cf_table(std::span<const double> grid) {
  static std::mutex mutex;
  static std::map<std::vector<double>, std::vector<std::complex<double>>> cache;
  std::vector<double> key(grid.begin(), grid.end());
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  std::vector<std::complex<double>> table;
  table.reserve(grid.size());
  for (double t : grid) table.push_back(cf(t));
  std::lock_guard lock(mutex);
  if (cache.size() > 64) cache.clear();
  return cache.emplace(std::move(key), table).first->second;
}

}  // namespace speckle::benchmark
