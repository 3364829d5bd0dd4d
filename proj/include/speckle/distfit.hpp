#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "speckle/error.hpp"
#include "speckle/estimators.hpp"
#include "speckle/nelder_mead.hpp"
#include "speckle/sample.hpp"
#include "speckle/special.hpp"

// Parametric amplitude models fitted by maximum likelihood, and a goodness of
// fit score measured against the sample's KDE.
namespace speckle::distfit {

/// Declaration order doubles as the tie-break order when ranking fits.
enum class Family { rayleigh, weibull, gamma, generalized_gamma, nakagami, k_dist, burr };

inline constexpr std::array<Family, 7> kAllFamilies = {Family::rayleigh,         Family::weibull,  Family::gamma,
                                                       Family::generalized_gamma, Family::nakagami, Family::k_dist,
                                                       Family::burr};

inline std::string_view family_tag(Family f) {
  switch (f) {
    case Family::rayleigh: return "rayleigh";
    case Family::weibull: return "weibull";
    case Family::gamma: return "gamma";
    case Family::generalized_gamma: return "generalized_gamma";
    case Family::nakagami: return "nakagami";
    case Family::k_dist: return "k_dist";
    case Family::burr: return "burr";
  }
  return "unknown";
}

inline std::string valid_family_tags() {
  std::string out;
  for (Family f : kAllFamilies) {
    if (!out.empty()) out += ", ";
    out += family_tag(f);
  }
  return out;
}

inline Family parse_family(std::string_view tag) {
  for (Family f : kAllFamilies) {
    if (family_tag(f) == tag) return f;
  }
  throw InvalidArgument("unknown family '" + std::string(tag) + "'; valid tags: " + valid_family_tags());
}

// Parameter order per family:
//   rayleigh (sigma)
//   weibull (scale lambda, shape k)            f = k/l (x/l)^(k-1) exp(-(x/l)^k)
//   gamma (shape a, scale b)                   f = x^(a-1) exp(-x/b) / (Gamma(a) b^a)
//   generalized_gamma (scale a, power c, shape d)
//                                              f = c x^(cd-1) exp(-(x/a)^c) / (a^(cd) Gamma(d))
//   nakagami (shape m >= 0.5, spread omega)    f = 2 m^m x^(2m-1) exp(-m x^2/omega) / (Gamma(m) omega^m)
//   k_dist (alpha, mean square mu)             f = 4/Gamma(a) sqrt(a/mu) (a x^2/mu)^(a/2) K_(a-1)(2 sqrt(a x^2/mu))
//   burr (scale alpha, c, k)                   f = (c k/alpha) (x/alpha)^(c-1) (1 + (x/alpha)^c)^(-k-1)
inline std::vector<std::string_view> param_names(Family f) {
  switch (f) {
    case Family::rayleigh: return {"sigma"};
    case Family::weibull: return {"scale", "shape"};
    case Family::gamma: return {"shape", "scale"};
    case Family::generalized_gamma: return {"scale", "power", "shape"};
    case Family::nakagami: return {"shape", "spread"};
    case Family::k_dist: return {"alpha", "mean_square"};
    case Family::burr: return {"alpha", "c", "k"};
  }
  return {};
}

inline std::size_t param_count(Family f) { return param_names(f).size(); }

inline bool params_in_domain(Family f, std::span<const double> p) {
  if (p.size() != param_count(f)) return false;
  for (double v : p) {
    if (!(v > 0.0) || !std::isfinite(v)) return false;
  }
  return f != Family::nakagami || p[0] >= 0.5;
}

namespace detail {

inline void require_domain(Family f, std::span<const double> p) {
  if (!params_in_domain(f, p)) {
    throw InvalidArgument("parameters out of domain for family " + std::string(family_tag(f)));
  }
}

// a * log(x) with the convention 0 * log(0) = 0.
inline double xlog(double a, double logx) { return a == 0.0 ? 0.0 : a * logx; }

inline double k_log_pdf(double alpha, double mu, double x) {
  if (x == 0.0) {
    if (alpha > 0.5) return -std::numeric_limits<double>::infinity();
    if (alpha < 0.5) return std::numeric_limits<double>::infinity();
    return std::log(2.0 * std::sqrt(alpha / mu));
  }
  // With w = x sqrt(alpha / mu): pdf = 4 sqrt(alpha / mu) w^alpha K_{alpha-1}(2w) / Gamma(alpha).
  const double c = std::sqrt(alpha / mu);
  const double log_w = std::log(c) + std::log(x);
  const double z = 2.0 * c * x;
  double log_k = 0.0;
  if (z > 1e-300) {
    log_k = special::log_bessel_k(alpha - 1.0, z);
  } else {
    // Leading small-argument term; only reached for x within ~1e-300 of zero.
    const double nu = std::abs(alpha - 1.0);
    log_k = nu > 0.0 ? std::lgamma(nu) - std::log(2.0) - nu * log_w : std::log(-log_w - std::numbers::egamma);
  }
  return std::log(4.0) - std::lgamma(alpha) + std::log(c) + alpha * log_w + log_k;
}

}  // namespace detail

/// Log density; may return -inf (or +inf at x = 0 for divergent shapes).
inline double log_pdf(Family f, std::span<const double> p, double x) {
  detail::require_domain(f, p);
  if (!(x >= 0.0)) throw InvalidArgument("density is defined for x >= 0");
  const double lx = std::log(x);
  switch (f) {
    case Family::rayleigh: {
      const double s = p[0];
      return lx - 2.0 * std::log(s) - x * x / (2.0 * s * s);
    }
    case Family::weibull: {
      const double lam = p[0], k = p[1];
      return std::log(k / lam) + detail::xlog(k - 1.0, lx - std::log(lam)) - std::pow(x / lam, k);
    }
    case Family::gamma: {
      const double a = p[0], b = p[1];
      return detail::xlog(a - 1.0, lx) - x / b - std::lgamma(a) - a * std::log(b);
    }
    case Family::generalized_gamma: {
      const double a = p[0], c = p[1], d = p[2];
      return std::log(c) + detail::xlog(c * d - 1.0, lx) - std::pow(x / a, c) - c * d * std::log(a) - std::lgamma(d);
    }
    case Family::nakagami: {
      const double m = p[0], om = p[1];
      return std::log(2.0) + m * std::log(m) - std::lgamma(m) - m * std::log(om) + detail::xlog(2.0 * m - 1.0, lx) -
             m * x * x / om;
    }
    case Family::k_dist:
      return detail::k_log_pdf(p[0], p[1], x);
    case Family::burr: {
      const double a = p[0], c = p[1], k = p[2];
      return std::log(c * k / a) + detail::xlog(c - 1.0, lx - std::log(a)) - (k + 1.0) * std::log1p(std::pow(x / a, c));
    }
  }
  return -std::numeric_limits<double>::infinity();
}

inline double pdf(Family f, std::span<const double> p, double x) { return std::exp(log_pdf(f, p, x)); }

struct FitResult {
  Family family = Family::rayleigh;
  std::vector<double> params;
  double log_likelihood = 0.0;
  /// Mean squared gap to the KDE; set by gof_mse / rank_families.
  std::optional<double> gof;
  bool converged = false;
  std::size_t iterations = 0;
  /// Zero amplitudes excluded from the likelihood.
  std::size_t dropped_zeros = 0;
  std::size_t n_used = 0;
};

inline constexpr std::size_t kMinFitSize = 10;
inline constexpr std::size_t kStarts = 5;
inline constexpr double kMaxKAlpha = 1e6;

struct FitOptions {
  optim::NelderMeadOptions simplex{1e-8, 2000};
};

namespace detail {

// Positive values and the sums the closed-form likelihoods need.
struct Prepared {
  std::vector<double> x;
  std::vector<double> logx;
  double n = 0.0;
  double sum_x = 0.0;
  double sum_x2 = 0.0;
  double sum_x4 = 0.0;
  double sum_logx = 0.0;
  double median = 0.0;
  std::size_t dropped = 0;

  explicit Prepared(std::span<const double> values) {
    for (double v : values) {
      if (v > 0.0) {
        x.push_back(v);
      } else {
        ++dropped;
      }
    }
    n = static_cast<double>(x.size());
    logx.reserve(x.size());
    for (double v : x) {
      logx.push_back(std::log(v));
      sum_x += v;
      sum_x2 += v * v;
      sum_x4 += v * v * v * v;
      sum_logx += logx.back();
    }
    if (!x.empty()) {
      std::vector<double> sorted = x;
      const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
      std::nth_element(sorted.begin(), mid, sorted.end());
      median = *mid;
    }
  }

  double mean() const { return sum_x / n; }
  double mean_square() const { return sum_x2 / n; }
  double variance() const { return std::max(0.0, sum_x2 / n - mean() * mean()) * n / std::max(1.0, n - 1.0); }
};

// Natural cubic spline through equally spaced nodes.
class UniformSpline {
 public:
  UniformSpline(double lo, double step, std::vector<double> y) : lo_(lo), step_(step), y_(std::move(y)) {
    const std::size_t n = y_.size();
    m_.assign(n, 0.0);
    if (n < 3) return;
    // Thomas algorithm for the second derivatives, natural end conditions.
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double rhs = 6.0 * (y_[i + 1] - 2.0 * y_[i] + y_[i - 1]) / (step_ * step_);
      const double denom = 4.0 - c[i - 1];
      c[i] = 1.0 / denom;
      d[i] = (rhs - d[i - 1]) / denom;
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m_[i] = d[i] - c[i] * m_[i + 1];
    }
  }

  double operator()(double x) const {
    const double pos = (x - lo_) / step_;
    const auto last = static_cast<double>(y_.size() - 2);
    const double cell = std::clamp(std::floor(pos), 0.0, last);
    const auto i = static_cast<std::size_t>(cell);
    const double t = pos - cell;
    const double u = 1.0 - t;
    const double h2 = step_ * step_ / 6.0;
    return u * y_[i] + t * y_[i + 1] + h2 * ((u * u * u - u) * m_[i] + (t * t * t - t) * m_[i + 1]);
  }

 private:
  double lo_;
  double step_;
  std::vector<double> y_;
  std::vector<double> m_;
};

// K log-likelihood at (alpha, mu). Large samples interpolate the log density
// over log x between exact node evaluations.
inline double k_log_likelihood(const Prepared& s, double alpha, double mu) {
  constexpr std::size_t kExactLimit = 2048;
  constexpr std::size_t kNodes = 512;
  double ll = 0.0;
  if (s.x.size() <= kExactLimit) {
    for (double v : s.x) ll += k_log_pdf(alpha, mu, v);
    return ll;
  }
  const auto [lo_it, hi_it] = std::minmax_element(s.logx.begin(), s.logx.end());
  const double lo = *lo_it;
  const double hi = std::max(*hi_it, lo + 1e-9);
  const double step = (hi - lo) / static_cast<double>(kNodes - 1);
  std::vector<double> nodes(kNodes);
  for (std::size_t i = 0; i < kNodes; ++i) nodes[i] = k_log_pdf(alpha, mu, std::exp(lo + step * static_cast<double>(i)));
  const UniformSpline spline(lo, step, std::move(nodes));
  for (double lx : s.logx) ll += spline(lx);
  return ll;
}

inline double log_likelihood(Family f, std::span<const double> p, const Prepared& s) {
  if (!params_in_domain(f, p)) return -std::numeric_limits<double>::infinity();
  const double n = s.n;
  switch (f) {
    case Family::rayleigh: {
      const double sg = p[0];
      return s.sum_logx - 2.0 * n * std::log(sg) - s.sum_x2 / (2.0 * sg * sg);
    }
    case Family::weibull: {
      const double lam = p[0], k = p[1];
      const double llam = std::log(lam);
      double tail = 0.0;
      for (double lx : s.logx) tail += std::exp(k * (lx - llam));
      return n * std::log(k / lam) + (k - 1.0) * (s.sum_logx - n * llam) - tail;
    }
    case Family::gamma: {
      const double a = p[0], b = p[1];
      return (a - 1.0) * s.sum_logx - s.sum_x / b - n * (std::lgamma(a) + a * std::log(b));
    }
    case Family::generalized_gamma: {
      const double a = p[0], c = p[1], d = p[2];
      const double la = std::log(a);
      double tail = 0.0;
      for (double lx : s.logx) tail += std::exp(c * (lx - la));
      return n * (std::log(c) - c * d * la - std::lgamma(d)) + (c * d - 1.0) * s.sum_logx - tail;
    }
    case Family::nakagami: {
      const double m = p[0], om = p[1];
      return n * (std::log(2.0) + m * std::log(m) - std::lgamma(m) - m * std::log(om)) + (2.0 * m - 1.0) * s.sum_logx -
             m * s.sum_x2 / om;
    }
    case Family::k_dist:
      return k_log_likelihood(s, p[0], p[1]);
    case Family::burr: {
      const double a = p[0], c = p[1], k = p[2];
      const double la = std::log(a);
      double tail = 0.0;
      for (double lx : s.logx) tail += std::log1p(std::exp(c * (lx - la)));
      return n * std::log(c * k / a) + (c - 1.0) * (s.sum_logx - n * la) - (k + 1.0) * tail;
    }
  }
  return -std::numeric_limits<double>::infinity();
}

// Moment-based starting points, kStarts per family (optimizer coordinates
// exclude the pinned K mean square).
inline std::vector<std::vector<double>> starting_points(Family f, const Prepared& s) {
  const double mean = s.mean();
  const double var = std::max(s.variance(), 1e-12 * mean * mean);
  const double cr = std::sqrt(var) / mean;
  const double m2 = s.mean_square();
  const double k_w = std::clamp(std::pow(cr, -1.086), 0.2, 50.0);
  const double lam_w = mean / std::tgamma(1.0 + 1.0 / k_w);
  const double a_g = mean * mean / var;
  const double b_g = var / mean;
  const double var2 = std::max(s.sum_x4 / s.n - m2 * m2, 1e-12 * m2 * m2);
  const double m_n = std::max(0.5, m2 * m2 / var2);

  switch (f) {
    case Family::weibull:
      return {{lam_w, k_w}, {lam_w, 0.5 * k_w}, {lam_w, 2.0 * k_w}, {0.7 * lam_w, k_w}, {1.4 * lam_w, k_w}};
    case Family::gamma:
      return {{a_g, b_g}, {2.0 * a_g, 0.5 * b_g}, {0.5 * a_g, 2.0 * b_g}, {a_g, 1.5 * b_g}, {1.5 * a_g, b_g}};
    case Family::nakagami:
      return {{m_n, m2}, {2.0 * m_n, m2}, {std::max(0.5, 0.5 * m_n), m2}, {m_n, 1.3 * m2}, {m_n, 0.7 * m2}};
    case Family::generalized_gamma:
      return {{b_g, 1.0, a_g},
              {std::sqrt(m2 / m_n), 2.0, m_n},
              {lam_w, k_w, 1.0},
              {lam_w, 0.5 * k_w, 2.0},
              {lam_w, 2.0 * k_w, 0.5}};
    case Family::burr: {
      std::vector<std::vector<double>> starts;
      for (auto [c, k] : std::array<std::pair<double, double>, 5>{{{2.0, 1.0}, {3.0, 1.0}, {2.0, 3.0}, {4.0, 0.5}, {k_w, 5.0}}}) {
        starts.push_back({s.median / std::pow(std::expm1(std::log(2.0) / k), 1.0 / c), c, k});
      }
      return starts;
    }
    case Family::k_dist: {
      // Intensity moments of K: <I^2>/<I>^2 = 2 (1 + 1/alpha).
      const double excess = s.sum_x4 / s.n / (2.0 * m2 * m2) - 1.0;
      const double a0 = excess > 0.0 ? std::clamp(1.0 / excess, 0.05, 1e5) : 1e3;
      return {{a0}, {0.25 * a0}, {4.0 * a0}, {0.5}, {20.0}};
    }
    case Family::rayleigh:
      break;
  }
  return {{std::sqrt(m2 / 2.0)}};
}

}  // namespace detail

namespace detail {

// Gamma(x) / Gamma(x + 1/2). The lgamma difference loses ~x*eps relative
// accuracy, so large x uses the asymptotic series (error < 1e-17 for x >= 1000).
inline double gamma_half_ratio(double x) {
  if (x < 1000.0) return std::exp(std::lgamma(x) - std::lgamma(x + 0.5));
  const double u = 1.0 / x;
  const double series = 1.0 + u * (-1.0 / 8 + u * (1.0 / 128 + u * (5.0 / 1024 - u * 21.0 / 32768)));
  return 1.0 / (std::sqrt(x) * series);
}

}  // namespace detail

/// Closed-form Rayleigh scale MLE, sqrt(sum A^2 / (2n)).
inline double rayleigh_sigma_mle(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("Rayleigh MLE of an empty sample");
  return std::sqrt(speckle::detail::mean_square(values) / 2.0);
}

/// Bayes estimate sqrt(2) Gamma(n+2) / (2 Gamma(n+5/2)) * sqrt(sum A^2).
inline double bayes_sigma(const AmplitudeSample& sample) {
  if (sample.empty()) throw InvalidArgument("Bayes sigma of an empty sample");
  const double n = static_cast<double>(sample.size());
  double sum_sq = 0.0;
  for (double v : sample.values()) sum_sq += v * v;
  return std::numbers::sqrt2 / 2.0 * detail::gamma_half_ratio(n + 2.0) * std::sqrt(sum_sq);
}

/// Maximum-likelihood fit of one family.
///
/// Rayleigh is closed form over all values. The other families drop zeros,
/// need at least kMinFitSize positive values, and maximize the likelihood with
/// a log-parameterized simplex from kStarts moment-based starts. The K mean
/// square is pinned to the sample mean square.
inline FitResult mle_fit(Family family, const AmplitudeSample& sample, const FitOptions& options = {}) {
  if (sample.empty()) throw InvalidArgument("cannot fit an empty sample");
  const detail::Prepared prepared(sample.values());
  FitResult result;
  result.family = family;
  result.dropped_zeros = prepared.dropped;
  result.n_used = prepared.x.size();

  if (family == Family::rayleigh) {
    result.params = {rayleigh_sigma_mle(sample.values())};
    if (!(result.params[0] > 0.0)) throw InvalidArgument("cannot fit an all-zero sample");
    result.log_likelihood = detail::log_likelihood(family, result.params, prepared);
    result.converged = true;
    return result;
  }
  if (prepared.x.size() < kMinFitSize) {
    throw InvalidArgument("fitting " + std::string(family_tag(family)) + " needs at least " +
                          std::to_string(kMinFitSize) + " positive values");
  }
  if (!(prepared.variance() > 0.0)) throw InvalidArgument("cannot fit a zero-variance sample");

  const double mu = prepared.mean_square();
  auto to_params = [&](const std::vector<double>& theta) {
    std::vector<double> p(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) p[i] = std::exp(theta[i]);
    if (family == Family::k_dist) p.push_back(mu);
    return p;
  };
  auto objective = [&](const std::vector<double>& theta) {
    if (family == Family::k_dist && std::exp(theta[0]) > kMaxKAlpha) return std::numeric_limits<double>::infinity();
    return -detail::log_likelihood(family, to_params(theta), prepared) / prepared.n;
  };

  std::optional<optim::NelderMeadResult> best;
  std::size_t iterations = 0;
  for (const auto& start : detail::starting_points(family, prepared)) {
    std::vector<double> theta(start.size());
    for (std::size_t i = 0; i < start.size(); ++i) theta[i] = std::log(start[i]);
    std::vector<double> step(theta.size(), 0.3);
    auto run = optim::nelder_mead(objective, theta, step, options.simplex);
    iterations += run.iterations;
    if (run.converged) {
      // Restart from the optimum to rule out a collapsed simplex.
      auto again = optim::nelder_mead(objective, run.x, std::vector<double>(theta.size(), 0.05), options.simplex);
      iterations += again.iterations;
      if (again.value <= run.value) {
        again.converged = again.converged && run.converged;
        run = std::move(again);
      }
    }
    const bool better = !best || (run.converged && !best->converged) ||
                        (run.converged == best->converged && run.value < best->value);
    if (better) best = std::move(run);
  }

  result.params = to_params(best->x);
  result.log_likelihood = -best->value * prepared.n;
  result.converged = best->converged && std::isfinite(best->value);
  result.iterations = iterations;
  return result;
}

/// Mean over the density points of (fitted pdf - KDE)^2.
inline double gof_mse(const FitResult& fit, std::span<const estimators::DensityPoint> kde) {
  if (!fit.converged) throw InvalidArgument("goodness of fit requires a converged fit");
  if (kde.empty()) throw InvalidArgument("goodness of fit over an empty grid");
  double sum = 0.0;
  for (const auto& p : kde) {
    const double gap = pdf(fit.family, fit.params, p.x) - p.density;
    sum += gap * gap;
  }
  return sum / static_cast<double>(kde.size());
}

/// gof_mse against the sample's KDE; the score is also stored into `fit`.
inline double gof_mse(FitResult& fit, const AmplitudeSample& sample, const estimators::EvalGrid& grid,
                      const estimators::KdeSettings& kde) {
  if (!sample.normalized()) throw InvalidArgument("goodness of fit requires an RMS-normalized sample");
  const auto density = estimators::kde_eval(sample, grid, kde);
  fit.gof = gof_mse(fit, density);
  return *fit.gof;
}

/// Fits every family and sorts by goodness of fit (ascending). Ties go to the
/// family with fewer parameters, then declaration order; fits that failed or
/// did not converge come last.
inline std::vector<FitResult> rank_families(const AmplitudeSample& sample, std::span<const Family> families,
                                            const estimators::EvalGrid& grid, const estimators::KdeSettings& kde,
                                            const FitOptions& options = {}) {
  if (!sample.normalized()) throw InvalidArgument("ranking requires an RMS-normalized sample");
  const auto density = estimators::kde_eval(sample, grid, kde);
  std::vector<FitResult> results;
  for (Family f : families) {
    FitResult fit;
    try {
      fit = mle_fit(f, sample, options);
    } catch (const InvalidArgument&) {
      fit.family = f;
      fit.converged = false;
    }
    if (fit.converged) fit.gof = gof_mse(fit, density);
    results.push_back(std::move(fit));
  }
  std::stable_sort(results.begin(), results.end(), [](const FitResult& a, const FitResult& b) {
    const bool a_ok = a.converged && a.gof && std::isfinite(*a.gof);
    const bool b_ok = b.converged && b.gof && std::isfinite(*b.gof);
    if (a_ok != b_ok) return a_ok;
    if (a_ok && *a.gof != *b.gof) return *a.gof < *b.gof;
    if (param_count(a.family) != param_count(b.family)) return param_count(a.family) < param_count(b.family);
    return static_cast<int>(a.family) < static_cast<int>(b.family);
  });
  return results;
}

}  // namespace speckle::distfit
