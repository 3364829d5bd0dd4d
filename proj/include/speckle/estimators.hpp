#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "speckle/error.hpp"
#include "speckle/sample.hpp"

// Nonparametric views of an amplitude sample: eCDF, Gaussian KDE, empirical
// characteristic function and contrast ratio.
namespace speckle::estimators {

enum class GridDomain { amplitude, frequency };

/// Strictly increasing evaluation abscissae.
class EvalGrid {
 public:
  EvalGrid(std::vector<double> points, GridDomain domain) : points_(std::move(points)), domain_(domain) {
    if (points_.empty()) throw InvalidArgument("evaluation grid is empty");
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (!std::isfinite(points_[i])) throw InvalidArgument("evaluation grid points must be finite");
      if (i > 0 && !(points_[i] > points_[i - 1])) throw InvalidArgument("evaluation grid must be strictly increasing");
    }
    if (domain_ == GridDomain::amplitude && points_.front() < 0.0) {
      throw InvalidArgument("amplitude grid must start at >= 0");
    }
  }

  /// n evenly spaced points on [lo, hi] (n == 1 gives {lo}).
  static EvalGrid uniform(double lo, double hi, std::size_t n, GridDomain domain) {
    if (n == 0) throw InvalidArgument("grid needs at least one point");
    if (n > 1 && !(hi > lo)) throw InvalidArgument("grid upper bound must exceed lower bound");
    std::vector<double> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
      pts[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return EvalGrid(std::move(pts), domain);
  }

  [[nodiscard]] std::span<const double> points() const noexcept { return points_; }
  [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
  [[nodiscard]] GridDomain domain() const noexcept { return domain_; }

 private:
  std::vector<double> points_;
  GridDomain domain_;
};

inline constexpr double kDefaultCutoff = 0.05;
inline constexpr std::size_t kDefaultAmplitudePoints = 512;
inline constexpr std::size_t kDefaultFrequencyPoints = 128;
inline constexpr double kDefaultFrequencyMax = 20.0;

struct KdeSettings {
  /// Fixed bandwidth; nullopt selects h = (0.75 n)^(-1/5) * sample std.
  std::optional<double> bandwidth;
  /// Abscissae below this value are dropped from KDE output (left boundary).
  double boundary_cutoff = kDefaultCutoff;

  void validate() const {
    if (bandwidth && !(*bandwidth > 0.0)) throw InvalidArgument("fixed KDE bandwidth must be > 0");
    if (!(boundary_cutoff >= 0.0)) throw InvalidArgument("KDE boundary cutoff must be >= 0");
  }
};

struct DensityPoint {
  double x;
  double density;
};

struct CfPoint {
  double t;
  std::complex<double> value;
};

/// Default amplitude grid: `n` uniform points on [cutoff, max(3, sample max)].
inline EvalGrid default_amplitude_grid(const AmplitudeSample& sample, double cutoff = kDefaultCutoff,
                                       std::size_t n = kDefaultAmplitudePoints) {
  if (sample.empty()) throw InvalidArgument("empty sample");
  const double top = std::max(3.0, *std::max_element(sample.values().begin(), sample.values().end()));
  return EvalGrid::uniform(cutoff, std::max(top, cutoff + 1.0), n, GridDomain::amplitude);
}

inline EvalGrid default_frequency_grid(double t_max = kDefaultFrequencyMax, std::size_t n = kDefaultFrequencyPoints) {
  return EvalGrid::uniform(0.0, t_max, n, GridDomain::frequency);
}

/// Fraction of sample values <= t.
inline double ecdf_eval(const AmplitudeSample& sample, double t) {
  if (sample.empty()) throw InvalidArgument("eCDF of an empty sample");
  const auto count = std::count_if(sample.values().begin(), sample.values().end(), [t](double v) { return v <= t; });
  return static_cast<double>(count) / static_cast<double>(sample.size());
}

inline double kde_bandwidth(std::span<const double> values, const KdeSettings& settings) {
  settings.validate();
  if (settings.bandwidth) return *settings.bandwidth;
  if (values.size() < 2) throw InvalidArgument("automatic KDE bandwidth needs at least two values");
  const double sd = speckle::detail::sample_stddev(values);
  if (!(sd > 0.0)) throw InvalidArgument("automatic KDE bandwidth undefined for a zero-variance sample");
  return std::pow(0.75 * static_cast<double>(values.size()), -0.2) * sd;
}

/// Gaussian KDE at every grid point >= the boundary cutoff.
///
/// Kernel terms beyond 9 bandwidths (relative weight < 3e-18) are skipped.
inline std::vector<DensityPoint> kde_eval(std::span<const double> values, const EvalGrid& grid,
                                          const KdeSettings& settings) {
  if (values.empty()) throw InvalidArgument("KDE of an empty sample");
  const double h = kde_bandwidth(values, settings);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double norm = 1.0 / (static_cast<double>(sorted.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  constexpr double kReach = 9.0;

  std::vector<DensityPoint> out;
  out.reserve(grid.size());
  for (double x : grid.points()) {
    if (x < settings.boundary_cutoff) continue;
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), x - kReach * h);
    const auto last = std::upper_bound(first, sorted.end(), x + kReach * h);
    double sum = 0.0;
    for (auto it = first; it != last; ++it) {
      const double u = (x - *it) / h;
      sum += std::exp(-0.5 * u * u);
    }
    out.push_back({x, sum * norm});
  }
  if (out.empty()) throw InvalidArgument("no grid points remain above the KDE boundary cutoff");
  return out;
}

inline std::vector<DensityPoint> kde_eval(const AmplitudeSample& sample, const EvalGrid& grid,
                                          const KdeSettings& settings) {
  return kde_eval(sample.values(), grid, settings);
}

/// (1/n) sum_i exp(j t X_i) at every grid frequency.
inline std::vector<CfPoint> ecf_eval(std::span<const double> values, const EvalGrid& grid) {
  if (values.empty()) throw InvalidArgument("eCF of an empty sample");
  if (grid.domain() != GridDomain::frequency) throw InvalidArgument("eCF needs a frequency grid");
  const double inv_n = 1.0 / static_cast<double>(values.size());
  std::vector<CfPoint> out;
  out.reserve(grid.size());
  for (double t : grid.points()) {
    double re = 0.0;
    double im = 0.0;
    for (double x : values) {
      re += std::cos(t * x);
      im += std::sin(t * x);
    }
    out.push_back({t, {re * inv_n, im * inv_n}});
  }
  return out;
}

inline std::vector<CfPoint> ecf_eval(const AmplitudeSample& sample, const EvalGrid& grid) {
  return ecf_eval(sample.values(), grid);
}

/// Sample standard deviation (n-1) over sample mean.
inline double contrast_ratio(const AmplitudeSample& sample) {
  if (sample.empty()) throw InvalidArgument("contrast ratio of an empty sample");
  const double m = speckle::detail::mean(sample.values());
  if (!(m > 0.0)) throw InvalidArgument("contrast ratio undefined for zero sample mean");
  return speckle::detail::sample_stddev(sample.values()) / m;
}

}  // namespace speckle::estimators
