#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "speckle/error.hpp"

namespace speckle {

/// One-dimensional speckle amplitude sample.
///
/// Values are finite and nonnegative. `normalized` marks a sample whose root
/// mean square has been scaled to one; the distance functions require it.
class AmplitudeSample {
 public:
  AmplitudeSample() = default;

  explicit AmplitudeSample(std::vector<double> values, bool normalized = false)
      : values_(std::move(values)), normalized_(normalized) {
    for (double v : values_) {
      if (!std::isfinite(v) || v < 0.0) {
        throw InvalidArgument("amplitude sample values must be finite and nonnegative");
      }
    }
  }

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] bool empty() const noexcept { return values_.empty(); }
  [[nodiscard]] bool normalized() const noexcept { return normalized_; }

  [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }

  /// Moves the values out, leaving the sample empty.
  [[nodiscard]] std::vector<double> release() && { return std::move(values_); }

 private:
  std::vector<double> values_;
  bool normalized_ = false;
};

namespace detail {

inline double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// Sample standard deviation, n-1 divisor, two-pass.
inline double sample_stddev(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

inline double mean_square(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

}  // namespace detail
}  // namespace speckle
