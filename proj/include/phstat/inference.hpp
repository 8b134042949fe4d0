#pragma once

// Replication-based inference on H0 death times: order-statistic tests with
// percentile-bootstrap style intervals, signal counting, the two-sample
// Kolmogorov-Smirnov test and the goodness-of-fit suite.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "phstat/diagrams.hpp"
#include "phstat/distfit.hpp"
#include "phstat/error.hpp"
#include "phstat/geometry.hpp"
#include "phstat/parallel.hpp"
#include "phstat/random.hpp"
#include "phstat/rips.hpp"

namespace phstat {

using DeathList = std::vector<double>;

/// n_reps simulated death lists of n_points draws each. Replicate r uses the
/// sub-stream derive_seed(seed, r), so the output is independent of
/// scheduling.
inline std::vector<DeathList> replicate_diagrams(const FittedDistribution& dist,
                                                 std::size_t n_points, std::size_t n_reps,
                                                 Seed seed) {
  detail::require(n_points >= 1, Errc::invalid_parameter, "replicate_diagrams: n_points must be at least 1");
  detail::require(n_reps >= 1, Errc::invalid_parameter, "replicate_diagrams: n_reps must be at least 1");
  std::vector<DeathList> reps(n_reps);
  detail::parallel_for(n_reps, [&](std::size_t r) {
    reps[r] = sample(dist, n_points, derive_seed(seed, r));
  });
  return reps;
}

/// T_j: the j-th largest value (T_1 is the maximum), 1-based.
inline double order_statistic(std::span<const double> deaths, std::size_t j) {
  detail::require(j >= 1 && j <= deaths.size(), Errc::index,
                  "order_statistic: j must lie in [1, length]");
  std::vector<double> v(deaths.begin(), deaths.end());
  const auto nth = v.begin() + static_cast<std::ptrdiff_t>(j - 1);
  std::nth_element(v.begin(), nth, v.end(), std::greater<>());
  return *nth;
}

struct InferenceReport {
  std::size_t j = 1;
  double observed = 0.0;   // observed T_j
  double ci_upper = 0.0;   // one-sided interval [0, ci_upper]
  double p_value = 1.0;
  std::size_t n_reps = 0;
  bool significant = false;
};

inline constexpr double default_alpha = 0.05;

/// One-sided test of the observed T_j against simulated T_j values:
/// p = #{sims with T_j >= observed} / n_reps, interval upper bound = 95th
/// percentile (nearest rank) of the simulated T_j.
inline InferenceReport test_order_statistic(std::span<const double> observed,
                                            std::span<const DeathList> sims, std::size_t j,
                                            double alpha = default_alpha) {
  detail::require(!sims.empty(), Errc::empty_sims, "test_order_statistic: no simulated diagrams");
  detail::require(alpha > 0.0 && alpha < 1.0, Errc::invalid_parameter,
                  "test_order_statistic: alpha must lie in (0, 1)");
  InferenceReport rep;
  rep.j = j;
  rep.observed = order_statistic(observed, j);
  rep.n_reps = sims.size();
  std::vector<double> simulated;
  simulated.reserve(sims.size());
  for (const auto& s : sims) simulated.push_back(order_statistic(s, j));
  const auto at_least = std::count_if(simulated.begin(), simulated.end(),
                                      [&](double t) { return t >= rep.observed; });
  rep.p_value = static_cast<double>(at_least) / static_cast<double>(sims.size());
  rep.ci_upper = nearest_rank(simulated, 95.0);
  rep.significant = rep.p_value < alpha;
  return rep;
}

struct SignalCount {
  std::size_t n_components = 1;  // significant T_j's plus the infinite class
  std::vector<InferenceReport> tests;
};

/// Tests T_1, T_2, ... against the given replicates and stops at the first
/// insignificant one (or after max_j tests when max_j > 0).
inline SignalCount count_signals(std::span<const double> observed, std::span<const DeathList> sims,
                                 double alpha = default_alpha, std::size_t max_j = 0) {
  SignalCount out;
  if (observed.empty()) return out;
  std::size_t limit = max_j == 0 ? observed.size() : std::min(max_j, observed.size());
  for (const auto& s : sims) limit = std::min(limit, s.size());
  for (std::size_t j = 1; j <= limit; ++j) {
    auto rep = test_order_statistic(observed, sims, j, alpha);
    const bool significant = rep.significant;
    out.tests.push_back(rep);
    if (!significant) break;
    ++out.n_components;
  }
  return out;
}

/// As above with n_reps replicates of `dist`, each as long as `observed`.
inline SignalCount count_signals(std::span<const double> observed, const FittedDistribution& dist,
                                 std::size_t n_reps, Seed seed, double alpha = default_alpha,
                                 std::size_t max_j = 0) {
  if (observed.empty()) return {};
  const auto sims = replicate_diagrams(dist, observed.size(), n_reps, seed);
  return count_signals(observed, sims, alpha, max_j);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov tail P(K > lambda) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2).
inline double kolmogorov_tail(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // the alternating series converges slowly here; use the Jacobi form of the CDF
    constexpr double pi2_8 = std::numbers::pi * std::numbers::pi / 8.0;
    double cdf = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double odd = 2.0 * k - 1.0;
      cdf += std::exp(-odd * odd * pi2_8 / (lambda * lambda));
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Two-sample KS: sup |F_x - F_y| with the asymptotic p-value at effective
/// size n m / (n + m).
inline KsResult ks_two_sample(std::span<const double> xs, std::span<const double> ys) {
  detail::require(!xs.empty() && !ys.empty(), Errc::empty_input, "ks_two_sample: empty sample");
  std::vector<double> a(xs.begin(), xs.end()), b(ys.begin(), ys.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult out;
  out.statistic = d;
  const double ne = na * nb / (na + nb);
  out.p_value = kolmogorov_tail(std::sqrt(ne) * d);
  return out;
}

// ---------------------------------------------------------------------------
// Goodness-of-fit suite

struct SuiteConfig {
  ShapeConfig shape;
  std::optional<double> maxscale = 1.0;  // empty: optimal_maxscale per collection
};

struct CollectionRecord {
  std::size_t index = 0;
  double maxscale = 0.0;
  FittedDistribution fit;
  double skew_real = 0.0;
  double skew_sim = 0.0;
  double kurt_real = 0.0;
  double kurt_sim = 0.0;
  double bottleneck = 0.0;
};

struct SuiteReport {
  std::vector<CollectionRecord> records;
  std::map<Family, std::size_t> family_counts;

  std::vector<double> bottlenecks() const {
    std::vector<double> out;
    for (const auto& r : records) out.push_back(r.bottleneck);
    return out;
  }
};

/// One collection: fresh sample -> H0 diagram -> best fit -> one simulated
/// diagram of n - 1 draws -> paired statistics.
inline CollectionRecord run_collection(const SuiteConfig& cfg, std::size_t index, Seed seed) {
  const auto cloud = sample_shape(cfg.shape, derive_seed(seed, 0));
  const auto dist = pairwise_distances(cloud);
  const double maxscale = cfg.maxscale ? *cfg.maxscale : optimal_maxscale(dist);
  const auto real = finite_deaths(h0_persistence(dist, maxscale));
  CollectionRecord rec;
  rec.index = index;
  rec.maxscale = maxscale;
  rec.fit = select_best(real, maxscale);
  const auto sim = sample(rec.fit, real.size(), derive_seed(seed, 1));
  rec.skew_real = skewness(real);
  rec.skew_sim = skewness(sim);
  rec.kurt_real = kurtosis(real);
  rec.kurt_sim = kurtosis(sim);
  rec.bottleneck = bottleneck(h0_points(real), h0_points(sim));
  return rec;
}

inline SuiteReport goodness_suite(const SuiteConfig& cfg, std::size_t n_collections, Seed seed) {
  detail::require(n_collections >= 2, Errc::invalid_parameter,
                  "goodness_suite: need at least 2 collections");
  SuiteReport report;
  report.records.resize(n_collections);
  detail::parallel_for(n_collections, [&](std::size_t c) {
    report.records[c] = run_collection(cfg, c, derive_seed(seed, c));
  });
  for (const auto& r : report.records) ++report.family_counts[r.fit.family()];
  return report;
}

}  // namespace phstat
