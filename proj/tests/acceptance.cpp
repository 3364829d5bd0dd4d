// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "speckle/speckle.hpp"
#include "test_support.hpp"

namespace {

using namespace speckle;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return stats::spearman_rho(stats::PairedSeries(x, y));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

AmplitudeSample with_values(const AmplitudeSample& s, std::vector<double> v) { return AmplitudeSample(std::move(v), s.normalized()); }

// 1. Benchmark null behavior.
Outcome benchmark_null() {
  int passing = 0;
  double worst_time = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto t0 = Clock::now();
    const auto s = ingest::normalize_rms(sim::sample_rayleigh(100000, benchmark::kSigma, seed));
    const auto r = distances::distance_report(s);
    worst_time = std::max(worst_time, seconds_since(t0));
    passing += (r.d_ks < 0.01 && r.d_mse < 1e-3 && r.d_mmd < 0.01 && std::abs(r.d_cr) < 0.01) ? 1 : 0;
  }
  return {passing >= 19 && worst_time < 5.0,
          fmt("%d/20 seeds within all thresholds, slowest seed %.2fs", passing, worst_time)};
}

// 2. Distances grow as scatterer density falls.
Outcome density_trend() {
  const std::vector<double> means = {1, 2, 3, 5, 8, 15, 50, 150, 500};
  const auto t0 = Clock::now();
  int majority = 0;
  std::string detail;
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    std::vector<double> ks, mse, mmd, cr;
    for (double m : means) {
      // Shape tracks density: alpha = mean count.
      const sim::SimConfig config{132000, sim::NegBinomialScatterers{m, m}, seed * 1000 + static_cast<std::uint64_t>(m)};
      const auto r = distances::distance_report(ingest::normalize_rms(sim::sample_phasor_sum(config)));
      ks.push_back(r.d_ks);
      mse.push_back(r.d_mse);
      mmd.push_back(r.d_mmd);
      cr.push_back(r.d_cr);
    }
    const double rho[4] = {spearman(means, ks), spearman(means, mse), spearman(means, mmd), spearman(means, cr)};
    const bool ok = std::all_of(std::begin(rho), std::end(rho), [](double v) { return v <= -0.9; });
    majority += ok ? 1 : 0;
    detail += fmt("seed %d rho=(%.2f,%.2f,%.2f,%.2f) ", static_cast<int>(seed), rho[0], rho[1], rho[2], rho[3]);
  }
  const double elapsed = seconds_since(t0);
  return {majority >= 2 && elapsed < 60.0, detail + fmt("%.1fs", elapsed)};
}

// 3. Distances shrink with ROI area on a fully developed synthetic image.
Outcome roi_trend() {
  const std::size_t rows = 220, cols = 600;
  const auto& fractions = pipeline::default_sweep_fractions();
  constexpr int kImages = 10;
  std::vector<double> ks(fractions.size()), mse(fractions.size()), mmd(fractions.size()), cr(fractions.size());
  test::TempDir dir;
  for (int image = 0; image < kImages; ++image) {
    // Through the real ingest path: log-compressed 16-bit PNG, then inverted.
    // Fully developed: the N -> infinity Rayleigh limit. A finite phasor count
    // leaves a contrast-ratio bias that floors |d_cr| at large areas.
    auto s = sim::sample_rayleigh(rows * cols, std::numbers::sqrt2 / 2.0, 300u + static_cast<std::uint64_t>(image));
    ingest::PixelMatrix amplitudes{rows, cols, std::move(s).release(), 0.0};
    const std::string path = dir.file("speckle" + std::to_string(image) + ".png");
    ingest::save_png(path, ingest::log_compress(amplitudes, 4.0, 65535.0), 16);
    pipeline::InputSpec spec{path};
    spec.dynamic_range = 4.0;
    const auto linear = pipeline::load_linear_image(spec);
    const auto sweep = pipeline::roi_sweep(linear, {0, 0, cols, rows}, fractions, {});
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      if (!sweep[i].report) return {false, "sweep row skipped: " + sweep[i].warning};
      ks[i] += sweep[i].report->d_ks / kImages;
      mse[i] += sweep[i].report->d_mse / kImages;
      mmd[i] += sweep[i].report->d_mmd / kImages;
      cr[i] += std::abs(sweep[i].report->d_cr) / kImages;
    }
  }
  const double rho[4] = {spearman(fractions, ks), spearman(fractions, mse), spearman(fractions, mmd),
                         spearman(fractions, cr)};
  const bool ok = std::all_of(std::begin(rho), std::end(rho), [](double v) { return v <= -0.8; });
  return {ok, fmt("rho=(%.2f,%.2f,%.2f,%.2f), full-ROI mean d_ks=%.4f d_mse=%.2e d_mmd=%.4f |d_cr|=%.4f", rho[0],
                  rho[1], rho[2], rho[3], ks.back(), mse.back(), mmd.back(), cr.back())};
}

// 4. Rayleigh MLE pinned by normalization; Bayes estimator converges.
Outcome normalization_theorem() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto raw = seed % 2 == 0 ? sim::sample_k(20000, 0.5 + seed, seed) : sim::sample_burr(20000, 2.0, 1.5, 2.0, seed);
    const auto s = ingest::normalize_rms(raw);
    worst = std::max(worst, std::abs(distfit::mle_fit(distfit::Family::rayleigh, s).params[0] - std::numbers::sqrt2 / 2.0));
  }
  const auto big = ingest::normalize_rms(sim::sample_rayleigh(1000000, 3.0, 4));
  const double bayes_gap = std::abs(distfit::bayes_sigma(big) - std::numbers::sqrt2 / 2.0);
  return {worst <= 1e-12 && bayes_gap <= 1e-6, fmt("max |MLE - sqrt2/2| = %.1e, |Bayes(n=1e6) - sqrt2/2| = %.2e", worst, bayes_gap)};
}

// 5. Contrast ratio constant.
Outcome contrast_constant() {
  const double cr = estimators::contrast_ratio(sim::sample_rayleigh(1000000, benchmark::kSigma, 5));
  return {std::abs(cr - 0.5227) <= 0.005, fmt("CR = %.5f", cr)};
}

// 6. Parameter recovery.
Outcome parameter_recovery() {
  const double truth[3] = {1.0, 2.0, 1.5};
  std::vector<double> err[3];
  const auto t0 = Clock::now();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto fit = distfit::mle_fit(distfit::Family::burr, sim::sample_burr(100000, 1.0, 2.0, 1.5, 600 + seed));
    for (int i = 0; i < 3; ++i) err[i].push_back(std::abs(fit.params[i] - truth[i]) / truth[i]);
  }
  const double med[3] = {median(err[0]), median(err[1]), median(err[2])};
  const double ray = distfit::mle_fit(distfit::Family::rayleigh, AmplitudeSample({3.0, 4.0})).params[0];
  const bool ok = med[0] < 0.05 && med[1] < 0.05 && med[2] < 0.05 && ray == 2.5;
  return {ok, fmt("median rel. error (alpha,c,k) = (%.4f,%.4f,%.4f), Rayleigh{3,4} = %.17g, %.0fs", med[0], med[1],
                  med[2], ray, seconds_since(t0))};
}

// 7. Three-parameter families win on K-distributed speckle.
Outcome gof_ranking() {
  int majority = 0;
  std::string detail;
  for (std::uint64_t seed : {71u, 72u, 73u}) {
    const auto s = ingest::normalize_rms(sim::sample_k(100000, 2.0, seed));
    const distances::DistanceSettings settings;
    const auto ranked = distfit::rank_families(s, distfit::kAllFamilies, settings.amplitude_grid(s), settings.kde);
    double burr = INFINITY, rayleigh = INFINITY;
    int three_param_top3 = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      const auto& r = ranked[i];
      const double g = r.gof ? *r.gof : INFINITY;
      if (r.family == distfit::Family::burr) burr = g;
      if (r.family == distfit::Family::rayleigh) rayleigh = g;
      if (i < 3 && distfit::param_count(r.family) == 3) ++three_param_top3;
    }
    const bool ok = burr < rayleigh && three_param_top3 >= 2;
    majority += ok ? 1 : 0;
    detail += fmt("seed %d: top3=%s,%s,%s; ", static_cast<int>(seed), std::string(distfit::family_tag(ranked[0].family)).c_str(),
                  std::string(distfit::family_tag(ranked[1].family)).c_str(),
                  std::string(distfit::family_tag(ranked[2].family)).c_str());
  }
  return {majority >= 2, detail + fmt("%d/3 seeds pass", majority)};
}

// 8. Rayleigh GoF equals d_mse.
Outcome gof_identity() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = ingest::normalize_rms(sim::sample_k(50000, 1.0 + seed, seed));
    const distances::DistanceSettings settings;
    const auto grid = settings.amplitude_grid(s);
    auto fit = distfit::mle_fit(distfit::Family::rayleigh, s);
    const double gof = distfit::gof_mse(fit, s, grid, settings.kde);
    worst = std::max(worst, std::abs(gof - distances::d_mse(s, grid, settings.kde)));
  }
  return {worst <= 1e-12, fmt("max |gof - d_mse| = %.1e", worst)};
}

// 9. Independent oracles.
Outcome oracle_equivalence() {
  std::mt19937_64 rng(9);
  double ks_worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 999;
    std::gamma_distribution<double> g(0.5 + trial % 7, 1.0);
    std::vector<double> raw(n);
    for (double& x : raw) x = g(rng);
    const auto s = ingest::normalize_rms(AmplitudeSample(raw));
    const std::vector<double> v(s.values().begin(), s.values().end());
    const double brute = test::brute_force_ks(v, [](double x) { return benchmark::cdf(x); }, 0.0, 4.0, 100000);
    ks_worst = std::max(ks_worst, std::abs(distances::d_ks(s) - brute));
  }
  double cf_worst = 0.0;
  for (double t : {0.5, 1.0, 2.0, 5.0, 10.0}) {
    const auto ref = test::trapezoid<std::complex<double>>(
        [t](double x) { return std::polar(2.0 * x * std::exp(-x * x), t * x); }, 0.0, 8.0, 1000000);
    cf_worst = std::max(cf_worst, std::abs(benchmark::cf(t) - ref));
  }
  return {ks_worst <= 1e-3 && cf_worst <= 1e-6, fmt("max KS gap %.1e, max CF gap %.1e", ks_worst, cf_worst)};
}

// 10. Scale, permutation and reproducibility invariance.
Outcome invariance() {
  const auto raw = sim::sample_phasor_sum({30000, sim::NegBinomialScatterers{10.0, 3.0}, 10});
  const auto base = distances::distance_report(ingest::normalize_rms(raw));
  bool exact_ok = true;
  double exact_worst = 0.0, grid_worst = 0.0;
  for (double k : {0.125, 4.0, 1024.0, 3.7, 1e-4, 2.5e5}) {
    std::vector<double> v(raw.values().begin(), raw.values().end());
    for (double& x : v) x *= k;
    const auto r = distances::distance_report(ingest::normalize_rms(AmplitudeSample(v)));
    if (k == 0.125 || k == 4.0 || k == 1024.0) {
      exact_ok = exact_ok && r.d_ks == base.d_ks && r.d_cr == base.d_cr;
    } else {
      exact_worst = std::max({exact_worst, std::abs(r.d_ks - base.d_ks), std::abs(r.d_cr - base.d_cr)});
    }
    grid_worst = std::max({grid_worst, std::abs(r.d_mse - base.d_mse), std::abs(r.d_mmd - base.d_mmd)});
  }

  auto normalized = ingest::normalize_rms(raw);
  std::vector<double> shuffled(normalized.values().begin(), normalized.values().end());
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(4));
  const auto perm = with_values(normalized, shuffled);
  const auto rp = distances::distance_report(perm);
  const double perm_gap = std::max({std::abs(rp.d_mse - base.d_mse), std::abs(rp.d_mmd - base.d_mmd),
                                    std::abs(rp.d_cr - base.d_cr),
                                    std::abs(distfit::mle_fit(distfit::Family::rayleigh, perm).params[0] -
                                             distfit::mle_fit(distfit::Family::rayleigh, normalized).params[0])});
  const bool perm_ok = rp.d_ks == base.d_ks && perm_gap <= 1e-12;

  const auto again = sim::sample_phasor_sum({30000, sim::NegBinomialScatterers{10.0, 3.0}, 10});
  const bool sim_bits = std::equal(raw.values().begin(), raw.values().end(), again.values().begin(), again.values().end());
  const auto rerun = distances::distance_report(ingest::normalize_rms(again));
  const bool dist_bits = rerun.d_ks == base.d_ks && rerun.d_mse == base.d_mse && rerun.d_mmd == base.d_mmd &&
                         rerun.d_cr == base.d_cr;

  const bool ok = exact_ok && exact_worst <= 1e-14 && grid_worst <= 1e-12 && perm_ok && sim_bits && dist_bits;
  return {ok, fmt("power-of-two scales exact=%s, other scales ks/cr gap %.1e, grid gap %.1e, permutation gap %.1e, "
                  "reproducible=%s",
                  exact_ok ? "yes" : "no", exact_worst, grid_worst, perm_gap, sim_bits && dist_bits ? "yes" : "no")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "benchmark null behavior", benchmark_null},
      {2, "distances grow as scatterer density falls", density_trend},
      {3, "distances shrink with ROI area", roi_trend},
      {4, "normalization pins the Rayleigh scale", normalization_theorem},
      {5, "contrast-ratio constant", contrast_constant},
      {6, "parameter recovery", parameter_recovery},
      {7, "three-parameter families rank best on K speckle", gof_ranking},
      {8, "Rayleigh GoF equals d_mse", gof_identity},
      {9, "oracle equivalence", oracle_equivalence},
      {10, "invariance suite", invariance},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] criterion %d: %s -- %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
