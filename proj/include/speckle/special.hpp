#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "speckle/error.hpp"
#include "speckle/quadrature.hpp"

namespace speckle::special {

namespace detail {

// log cosh(x) without overflow.
inline double log_cosh(double x) {
  x = std::abs(x);
  return x + std::log1p(std::exp(-2.0 * x)) - std::log(2.0);
}

}  // namespace detail

/// Natural log of the modified Bessel function of the second kind K_nu(z), z > 0.
///
/// Evaluated from K_nu(z) = int_0^inf exp(-z cosh u) cosh(nu u) du. The
/// integrand is rescaled by its peak value so that large orders and large
/// arguments do not overflow; the tail is cut where it drops below e^-45 of
/// the peak.
inline double log_bessel_k(double nu, double z) {
  if (!(z > 0.0) || !std::isfinite(nu)) throw InvalidArgument("log_bessel_k: requires finite nu and z > 0");
  if (std::isinf(z)) return -std::numeric_limits<double>::infinity();
  nu = std::abs(nu);
  auto phi = [&](double u) { return -z * std::cosh(u) + detail::log_cosh(nu * u); };
  auto dphi = [&](double u) { return -z * std::sinh(u) + nu * std::tanh(nu * u); };

  double peak = 0.0;
  if (nu * nu > z) {
    double lo = 0.0;
    double hi = std::asinh(nu / z) + 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-14 * (1.0 + hi); ++i) {
      const double mid = 0.5 * (lo + hi);
      (dphi(mid) > 0.0 ? lo : hi) = mid;
    }
    peak = 0.5 * (lo + hi);
  }
  const double top = phi(peak);
  const double t = std::tanh(nu * peak);
  const double curvature = z * std::cosh(peak) - nu * nu * (1.0 - t * t);
  const double width = 1.0 / std::sqrt(std::max(curvature, 1e-300));

  constexpr double kDrop = 45.0;
  double step = std::min(width, 1.0);
  double upper = peak + step;
  while (phi(upper) - top > -kDrop) {
    step *= 2.0;
    upper = peak + step;
  }
  double lower = 0.0;
  if (peak > 0.0) {
    step = std::min(width, peak);
    lower = std::max(0.0, peak - step);
    while (lower > 0.0 && phi(lower) - top > -kDrop) {
      step *= 2.0;
      lower = std::max(0.0, peak - step);
    }
  }

  auto scaled = [&](double u) { return std::exp(phi(u) - top); };
  const double span = upper - lower;
  const int pieces = std::clamp(static_cast<int>(std::ceil(span / (2.0 * width))), 1, 256);
  const double h = span / pieces;
  // phi(u) - top cancels terms of size |top|; ask for no more than that allows.
  const double rel = std::max(1e-13, 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(top)));
  const double tol = rel * std::min(width, span) / pieces;
  double total = 0.0;
  for (int i = 0; i < pieces; ++i) {
    total += quadrature::integrate(scaled, lower + i * h, lower + (i + 1) * h, tol);
  }
  return top + std::log(total);
}

inline double bessel_k(double nu, double z) { return std::exp(log_bessel_k(nu, z)); }

}  // namespace speckle::special
