#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <variant>
#include <vector>

#include "speckle/error.hpp"
#include "speckle/sample.hpp"

// Monte-Carlo speckle generators. Every sampler is a pure function of its
// arguments and seed.
//
// Streams are produced in fixed blocks of kBlockSize draws; the block starting
// at index s uses a 64-bit Mersenne Twister seeded with (seed XOR s). Output is
// therefore independent of how the index range is split across workers.
namespace speckle::sim {

inline constexpr std::size_t kBlockSize = 1u << 16;

/// Fixed number of unit phasors per amplitude.
struct FixedScatterers {
  std::uint64_t count = 1;
};

/// Negative-binomial number of phasors: mean `mean`, variance mean + mean^2/alpha.
struct NegBinomialScatterers {
  double mean = 1.0;
  double alpha = 1.0;
};

using ScattererModel = std::variant<FixedScatterers, NegBinomialScatterers>;

struct SimConfig {
  std::size_t n_samples = 1;
  ScattererModel scatterers = FixedScatterers{};
  std::uint64_t seed = 0;

  void validate() const {
    if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
    if (const auto* f = std::get_if<FixedScatterers>(&scatterers)) {
      if (f->count < 1) throw InvalidArgument("scatterer count must be >= 1");
    } else {
      const auto& nb = std::get<NegBinomialScatterers>(scatterers);
      if (!(nb.mean > 0.0) || !std::isfinite(nb.mean)) throw InvalidArgument("scatterer mean must be > 0");
      if (!(nb.alpha > 0.0) || !std::isfinite(nb.alpha)) throw InvalidArgument("alpha must be > 0");
    }
  }

  [[nodiscard]] double mean_scatterers() const {
    if (const auto* f = std::get_if<FixedScatterers>(&scatterers)) return static_cast<double>(f->count);
    return std::get<NegBinomialScatterers>(scatterers).mean;
  }
};

/// Uniform double in [0, 1) from the top 53 bits of one engine output.
inline double uniform01(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Inverse Rayleigh CDF: sigma * sqrt(-2 ln(1 - u)).
inline double rayleigh_quantile(double u, double sigma) {
  return sigma * std::sqrt(-2.0 * std::log1p(-u));
}

/// Inverse Burr XII CDF: alpha * ((1 - u)^(-1/k) - 1)^(1/c).
inline double burr_quantile(double u, double alpha, double c, double k) {
  return alpha * std::pow(std::expm1(-std::log1p(-u) / k), 1.0 / c);
}

namespace detail {

template <typename Fill>
std::vector<double> generate_blocks(std::size_t n, std::uint64_t seed, Fill&& fill) {
  std::vector<double> out(n);
  for (std::size_t start = 0; start < n; start += kBlockSize) {
    std::mt19937_64 engine(seed ^ static_cast<std::uint64_t>(start));
    const std::size_t stop = std::min(n, start + kBlockSize);
    for (std::size_t i = start; i < stop; ++i) out[i] = fill(engine);
  }
  return out;
}

inline void require_count(std::size_t n) {
  if (n < 1) throw InvalidArgument("sample count must be >= 1");
}

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be a positive finite number");
}

}  // namespace detail

/// Amplitudes |sum_k exp(j phi_k)| / sqrt(mean count), phi_k ~ U(-pi, pi).
///
/// With FixedScatterers{N} the law tends to Rayleigh with E[A^2] = 1 as N grows.
/// A draw with zero phasors (possible under the negative-binomial model) is 0.
inline AmplitudeSample sample_phasor_sum(const SimConfig& config) {
  config.validate();
  const double scale = 1.0 / std::sqrt(config.mean_scatterers());
  auto sum_phasors = [scale](std::mt19937_64& engine, std::uint64_t count) {
    double re = 0.0;
    double im = 0.0;
    for (std::uint64_t k = 0; k < count; ++k) {
      const double phase = std::numbers::pi * (2.0 * uniform01(engine) - 1.0);
      re += std::cos(phase);
      im += std::sin(phase);
    }
    return std::hypot(re, im) * scale;
  };

  std::vector<double> values;
  if (const auto* f = std::get_if<FixedScatterers>(&config.scatterers)) {
    const std::uint64_t count = f->count;
    if (count == 1) {
      // One unit phasor: modulus is exactly 1 whatever the phase.
      values.assign(config.n_samples, 1.0);
    } else {
      values = detail::generate_blocks(config.n_samples, config.seed,
                                       [&](std::mt19937_64& e) { return sum_phasors(e, count); });
    }
  } else {
    const auto nb = std::get<NegBinomialScatterers>(config.scatterers);
    // Poisson count with a gamma-distributed rate is negative binomial.
    values = detail::generate_blocks(config.n_samples, config.seed, [&](std::mt19937_64& e) {
      std::gamma_distribution<double> rate(nb.alpha, nb.mean / nb.alpha);
      const double lambda = rate(e);
      std::poisson_distribution<std::uint64_t> count(lambda);
      const std::uint64_t m = lambda > 0.0 ? count(e) : 0;
      return sum_phasors(e, m);
    });
  }
  return AmplitudeSample(std::move(values));
}

inline AmplitudeSample sample_rayleigh(std::size_t n, double sigma, std::uint64_t seed) {
  detail::require_count(n);
  detail::require_positive(sigma, "sigma");
  return AmplitudeSample(detail::generate_blocks(
      n, seed, [sigma](std::mt19937_64& e) { return rayleigh_quantile(uniform01(e), sigma); }));
}

/// K-distributed amplitudes with unit mean square: the local mean intensity is
/// Gamma(alpha, 1/alpha) and the amplitude is Rayleigh given that intensity.
inline AmplitudeSample sample_k(std::size_t n, double alpha, std::uint64_t seed) {
  detail::require_count(n);
  detail::require_positive(alpha, "alpha");
  return AmplitudeSample(detail::generate_blocks(n, seed, [alpha](std::mt19937_64& e) {
    std::gamma_distribution<double> intensity(alpha, 1.0 / alpha);
    const double w = intensity(e);
    return std::sqrt(-w * std::log1p(-uniform01(e)));
  }));
}

inline AmplitudeSample sample_burr(std::size_t n, double alpha, double c, double k, std::uint64_t seed) {
  detail::require_count(n);
  detail::require_positive(alpha, "alpha");
  detail::require_positive(c, "c");
  detail::require_positive(k, "k");
  return AmplitudeSample(detail::generate_blocks(
      n, seed, [=](std::mt19937_64& e) { return burr_quantile(uniform01(e), alpha, c, k); }));
}

}  // namespace speckle::sim
