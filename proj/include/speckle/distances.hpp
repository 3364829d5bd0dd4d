#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "speckle/benchmark.hpp"
#include "speckle/error.hpp"
#include "speckle/estimators.hpp"
#include "speckle/sample.hpp"

// Distances between a normalized amplitude sample and the benchmark Rayleigh
// distribution, one per domain: CDF (KS), PDF (MSE of the KDE), characteristic
// function (MMD), and contrast ratio.
namespace speckle::distances {

/// Grid and KDE configuration shared by the four distances.
struct DistanceSettings {
  estimators::KdeSettings kde;
  std::size_t grid_points = estimators::kDefaultAmplitudePoints;
  std::size_t freq_points = estimators::kDefaultFrequencyPoints;
  double freq_max = estimators::kDefaultFrequencyMax;

  void validate() const {
    kde.validate();
    if (grid_points < 1) throw InvalidArgument("grid must have at least one point");
    if (freq_points < 1) throw InvalidArgument("frequency grid must have at least one point");
    if (!(freq_max > 0.0)) throw InvalidArgument("maximum frequency must be > 0");
  }

  [[nodiscard]] estimators::EvalGrid amplitude_grid(const AmplitudeSample& sample) const {
    return estimators::default_amplitude_grid(sample, kde.boundary_cutoff, grid_points);
  }
  [[nodiscard]] estimators::EvalGrid frequency_grid() const {
    return estimators::default_frequency_grid(freq_max, freq_points);
  }
};

struct GridMeta {
  std::size_t grid_points = 0;  // amplitude grid points kept after the cutoff
  double grid_min = 0.0;
  double grid_max = 0.0;
  std::size_t freq_points = 0;
  double freq_max = 0.0;
  double bandwidth = 0.0;
  double cutoff = 0.0;
};

struct DistanceReport {
  double d_ks = 0.0;
  double d_mse = 0.0;
  double d_mmd = 0.0;
  double d_cr = 0.0;
  std::size_t n = 0;
  GridMeta grid_meta;
};

namespace detail {
inline void require_normalized(const AmplitudeSample& sample) {
  if (!sample.normalized()) {
    throw InvalidArgument("distances require an RMS-normalized sample (call normalize_rms first)");
  }
  if (sample.empty()) throw InvalidArgument("distances require a nonempty sample");
}
}  // namespace detail

/// sup_x |eCDF(x) - CDF(x)|, evaluated at the order statistics on both sides of
/// each jump.
inline double d_ks(const AmplitudeSample& sample) {
  detail::require_normalized(sample);
  std::vector<double> sorted(sample.values().begin(), sample.values().end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = benchmark::cdf(sorted[i]);
    sup = std::max({sup, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return sup;
}

/// Mean squared gap between density estimates and the benchmark PDF over their abscissae.
inline double d_mse(std::span<const estimators::DensityPoint> density) {
  if (density.empty()) throw InvalidArgument("MSE distance over an empty grid");
  double sum = 0.0;
  for (const auto& p : density) {
    const double gap = p.density - benchmark::pdf(p.x);
    sum += gap * gap;
  }
  return sum / static_cast<double>(density.size());
}

inline double d_mse(const AmplitudeSample& sample, const estimators::EvalGrid& grid,
                    const estimators::KdeSettings& kde) {
  detail::require_normalized(sample);
  const auto density = estimators::kde_eval(sample, grid, kde);
  return d_mse(density);
}

/// Root-mean-square modulus of eCF - CF over the frequency grid.
inline double d_mmd(std::span<const estimators::CfPoint> ecf) {
  if (ecf.empty()) throw InvalidArgument("MMD distance over an empty grid");
  std::vector<double> ts;
  ts.reserve(ecf.size());
  for (const auto& p : ecf) ts.push_back(p.t);
  const auto reference = benchmark::cf_table(ts);
  double sum = 0.0;
  for (std::size_t j = 0; j < ecf.size(); ++j) sum += std::norm(ecf[j].value - reference[j]);
  return std::sqrt(sum / static_cast<double>(ecf.size()));
}

inline double d_mmd(const AmplitudeSample& sample, const estimators::EvalGrid& freq_grid) {
  detail::require_normalized(sample);
  const auto ecf = estimators::ecf_eval(sample, freq_grid);
  return d_mmd(ecf);
}

/// Signed: sample contrast ratio minus sqrt(4/pi - 1).
inline double d_cr(const AmplitudeSample& sample) {
  detail::require_normalized(sample);
  return estimators::contrast_ratio(sample) - benchmark::kContrastRatio;
}

inline DistanceReport distance_report(const AmplitudeSample& sample, const DistanceSettings& settings = {}) {
  detail::require_normalized(sample);
  settings.validate();
  if (sample.size() < 2) throw InvalidArgument("distance report needs at least two values");
  const auto grid = settings.amplitude_grid(sample);
  const auto freq = settings.frequency_grid();
  const auto density = estimators::kde_eval(sample, grid, settings.kde);

  DistanceReport report;
  report.d_ks = d_ks(sample);
  report.d_mse = d_mse(density);
  report.d_mmd = d_mmd(sample, freq);
  report.d_cr = d_cr(sample);
  report.n = sample.size();
  report.grid_meta = GridMeta{density.size(),
                              density.front().x,
                              density.back().x,
                              freq.size(),
                              settings.freq_max,
                              estimators::kde_bandwidth(sample.values(), settings.kde),
                              settings.kde.boundary_cutoff};
  return report;
}

}  // namespace speckle::distances
