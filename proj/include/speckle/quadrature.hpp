#pragma once

#include <array>
#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace speckle::quadrature {

namespace detail {

// 15-point Kronrod abscissae on [-1, 1] (nonnegative half) and weights; the
// odd-indexed nodes are the embedded 7-point Gauss rule.
inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T, typename F>
std::pair<T, double> kronrod15(F& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const T fc = f(mid);
  T kronrod = fc * kKronrodWeights[7];
  T gauss = fc * kGaussWeights[3];
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = half * kNodes[i];
    const T sum = f(mid - dx) + f(mid + dx);
    kronrod += sum * kKronrodWeights[i];
    if (i % 2 == 1) gauss += sum * kGaussWeights[i / 2];
  }
  kronrod *= half;
  gauss *= half;
  return {kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over [a, b].
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate drops below `abs_tol` (or below the roundoff floor of the result),
/// or `max_intervals` pieces exist. T may be real or complex.
template <typename T = double, typename F>
T integrate(F&& f, double a, double b, double abs_tol = 1e-10, std::size_t max_intervals = 2000) {
  struct Piece {
    double a, b;
    T value;
    double err;
  };
  auto by_error = [](const Piece& x, const Piece& y) { return x.err < y.err; };
  std::vector<Piece> heap;
  auto [v0, e0] = detail::kronrod15<T>(f, a, b);
  heap.push_back({a, b, v0, e0});
  T total = v0;
  double total_err = e0;
  while (heap.size() < max_intervals) {
    const double floor = 50.0 * std::numeric_limits<double>::epsilon() * std::abs(total);
    if (total_err <= std::max(abs_tol, floor)) break;
    std::pop_heap(heap.begin(), heap.end(), by_error);
    const Piece worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end(), by_error);
      break;
    }
    auto [lv, le] = detail::kronrod15<T>(f, worst.a, mid);
    auto [rv, re] = detail::kronrod15<T>(f, mid, worst.b);
    heap.push_back({worst.a, mid, lv, le});
    std::push_heap(heap.begin(), heap.end(), by_error);
    heap.push_back({mid, worst.b, rv, re});
    std::push_heap(heap.begin(), heap.end(), by_error);
    total = T{};
    total_err = 0.0;
    for (const auto& p : heap) {
      total += p.value;
      total_err += p.err;
    }
  }
  return total;
}

}  // namespace speckle::quadrature
