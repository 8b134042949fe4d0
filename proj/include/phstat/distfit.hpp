#pragma once

// Finite-support parametric models for H0 death times: beta on [0, s] and the
// generalized Pareto distribution (GPD).
//
// GPD parametrization (shape k, scale sigma, location theta):
//   f(x) = (1/sigma) * (1 + k (x - theta) / sigma)^(-1 - 1/k),   x >= theta,
// with upper endpoint theta - sigma / k when k < 0, and the exponential
// distribution as the k -> 0 limit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <boost/math/tools/minima.hpp>

#include "phstat/error.hpp"
#include "phstat/random.hpp"

namespace phstat {

enum class Family { beta, gpd };

inline std::string_view family_name(Family f) noexcept {
  return f == Family::beta ? "beta" : "gpd";
}

struct BetaModel {
  double a = 1.0;
  double b = 1.0;
  double support = 1.0;  // upper end s of [0, s]
};

struct GpdModel {
  double k = 0.0;
  double sigma = 1.0;
  double theta = 0.0;
};

struct FittedDistribution {
  std::variant<BetaModel, GpdModel> model;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  std::size_t n_fit = 0;

  Family family() const noexcept {
    return std::holds_alternative<BetaModel>(model) ? Family::beta : Family::gpd;
  }
  const BetaModel& beta() const { return std::get<BetaModel>(model); }
  const GpdModel& gpd() const { return std::get<GpdModel>(model); }

  /// Parameter count for the information criteria: (a, b) for beta, whose
  /// support is fixed in advance; (k, sigma, theta) for the GPD, whose
  /// location is taken from the data.
  int n_params() const noexcept { return family() == Family::beta ? 2 : 3; }
};

/// Information criteria from a log-likelihood: {aic, bic}.
inline std::pair<double, double> information_criteria(double loglik, int n_params, std::size_t n) {
  const double p = n_params;
  return {2.0 * p - 2.0 * loglik, p * std::log(static_cast<double>(n)) - 2.0 * loglik};
}

inline double support_lower(const FittedDistribution& dist) {
  if (dist.family() == Family::beta) return 0.0;
  return dist.gpd().theta;
}

inline double support_upper(const FittedDistribution& dist) {
  if (dist.family() == Family::beta) return dist.beta().support;
  const auto& g = dist.gpd();
  return g.k < 0.0 ? g.theta - g.sigma / g.k : std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Densities

inline double beta_pdf(const BetaModel& m, double x) {
  const double y = x / m.support;
  if (y < 0.0 || y > 1.0) return 0.0;
  if (y == 0.0) {
    if (m.a < 1.0) return std::numeric_limits<double>::infinity();
    return m.a == 1.0 ? m.b / m.support : 0.0;
  }
  if (y == 1.0) {
    if (m.b < 1.0) return std::numeric_limits<double>::infinity();
    return m.b == 1.0 ? m.a / m.support : 0.0;
  }
  const double log_pdf = (m.a - 1.0) * std::log(y) + (m.b - 1.0) * std::log1p(-y) -
                         (std::lgamma(m.a) + std::lgamma(m.b) - std::lgamma(m.a + m.b));
  return std::exp(log_pdf) / m.support;
}

inline double beta_cdf(const BetaModel& m, double x) {
  const double y = x / m.support;
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  return boost::math::ibeta(m.a, m.b, y);
}

namespace detail {

inline constexpr double gpd_zero_shape = 1e-10;

/// log f for z = x - theta >= 0 inside the support; -inf outside.
inline double gpd_log_pdf(double k, double sigma, double z) {
  if (z < 0.0) return -std::numeric_limits<double>::infinity();
  if (std::abs(k) < gpd_zero_shape) return -std::log(sigma) - z / sigma;
  const double t = k * z / sigma;
  if (t <= -1.0) {
    // upper endpoint; only k = -1 has a finite positive density there
    if (t == -1.0 && k == -1.0) return -std::log(sigma);
    return -std::numeric_limits<double>::infinity();
  }
  return -std::log(sigma) - (1.0 + 1.0 / k) * std::log1p(t);
}

}  // namespace detail

inline double gpd_pdf(const GpdModel& m, double x) {
  return std::exp(detail::gpd_log_pdf(m.k, m.sigma, x - m.theta));
}

inline double gpd_cdf(const GpdModel& m, double x) {
  const double z = x - m.theta;
  if (z <= 0.0) return 0.0;
  if (std::abs(m.k) < detail::gpd_zero_shape) return -std::expm1(-z / m.sigma);
  const double t = m.k * z / m.sigma;
  if (t <= -1.0) return 1.0;
  return -std::expm1(-std::log1p(t) / m.k);
}

inline double pdf(const FittedDistribution& dist, double x) {
  return dist.family() == Family::beta ? beta_pdf(dist.beta(), x) : gpd_pdf(dist.gpd(), x);
}

inline double cdf(const FittedDistribution& dist, double x) {
  return dist.family() == Family::beta ? beta_cdf(dist.beta(), x) : gpd_cdf(dist.gpd(), x);
}

// ---------------------------------------------------------------------------
// Beta

/// Offset applied to values on the closed support boundary before beta
/// fitting, in units of the support.
inline constexpr double beta_boundary_nudge = 1e-9;

inline double beta_loglik(const BetaModel& m, std::span<const double> xs) {
  double sum = 0.0;
  const double log_norm =
      std::lgamma(m.a) + std::lgamma(m.b) - std::lgamma(m.a + m.b) + std::log(m.support);
  for (double x : xs) {
    const double y = std::clamp(x / m.support, beta_boundary_nudge, 1.0 - beta_boundary_nudge);
    sum += (m.a - 1.0) * std::log(y) + (m.b - 1.0) * std::log1p(-y) - log_norm;
  }
  return sum;
}

/// Maximum-likelihood beta fit on [0, support]. Newton iterations on the
/// digamma score equations from a method-of-moments start; tolerance 1e-10 on
/// the score norm, at most 200 iterations.
inline FittedDistribution fit_beta(std::span<const double> xs, double support = 1.0) {
  detail::require(xs.size() >= 10, Errc::empty_input, "fit_beta: need at least 10 values");
  detail::require(support > 0.0 && std::isfinite(support), Errc::invalid_parameter,
                  "fit_beta: support must be positive");
  const double n = static_cast<double>(xs.size());
  double mean_log = 0.0, mean_log1m = 0.0, mean = 0.0;
  for (double x : xs) {
    detail::require(std::isfinite(x) && x >= 0.0 && x <= support, Errc::support,
                    "fit_beta: value outside [0, support]");
    const double y = std::clamp(x / support, beta_boundary_nudge, 1.0 - beta_boundary_nudge);
    mean += y;
    mean_log += std::log(y);
    mean_log1m += std::log1p(-y);
  }
  mean /= n;
  mean_log /= n;
  mean_log1m /= n;
  double var = 0.0;
  for (double x : xs) {
    const double y = std::clamp(x / support, beta_boundary_nudge, 1.0 - beta_boundary_nudge);
    var += (y - mean) * (y - mean);
  }
  var /= n;
  const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
  detail::require(*hi_it > *lo_it && var > 0.0, Errc::degenerate_input, "fit_beta: all values are equal");

  double common = mean * (1.0 - mean) / var - 1.0;
  if (!(common > 0.0)) common = 1.0;
  double a = mean * common;
  double b = (1.0 - mean) * common;

  using boost::math::digamma;
  using boost::math::trigamma;
  constexpr int max_iter = 200;
  constexpr double tol = 1e-10;
  bool converged = false;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double psi_ab = digamma(a + b);
    // score of the mean log-likelihood
    const double g1 = mean_log - digamma(a) + psi_ab;
    const double g2 = mean_log1m - digamma(b) + psi_ab;
    if (std::hypot(g1, g2) < tol) {
      converged = true;
      break;
    }
    // negative Hessian (Fisher information), positive definite
    const double t_ab = trigamma(a + b);
    const double h11 = trigamma(a) - t_ab;
    const double h22 = trigamma(b) - t_ab;
    const double h12 = -t_ab;
    const double det = h11 * h22 - h12 * h12;
    double da = (h22 * g1 - h12 * g2) / det;
    double db = (h11 * g2 - h12 * g1) / det;
    double step = 1.0;
    while (a + step * da <= 0.0 || b + step * db <= 0.0) step *= 0.5;
    a += step * da;
    b += step * db;
  }
  if (!converged || !std::isfinite(a) || !std::isfinite(b))
    throw Error(Errc::convergence, "fit_beta: Newton iterations did not converge");

  FittedDistribution out;
  out.model = BetaModel{a, b, support};
  out.n_fit = xs.size();
  out.loglik = beta_loglik(out.beta(), xs);
  std::tie(out.aic, out.bic) = information_criteria(out.loglik, out.n_params(), out.n_fit);
  return out;
}

/// Beta support used for a death sample: raw values when they are all below
/// 1, otherwise [0, maxscale] (or [0, max] when maxscale is not finite).
inline double beta_support_for(std::span<const double> xs, double maxscale) {
  const double top = xs.empty() ? 0.0 : *std::max_element(xs.begin(), xs.end());
  if (top < 1.0) return 1.0;
  if (std::isfinite(maxscale) && maxscale >= top) return maxscale;
  return top;
}

// ---------------------------------------------------------------------------
// Generalized Pareto

inline double gpd_loglik(const GpdModel& m, std::span<const double> xs) {
  double sum = 0.0;
  for (double x : xs) sum += detail::gpd_log_pdf(m.k, m.sigma, x - m.theta);
  return sum;
}

namespace detail {

inline constexpr double gpd_k_min = -1.0;  // likelihood is unbounded below -1
inline constexpr double gpd_k_max = 2.0;
inline constexpr double gpd_k_grid_step = 0.1;

struct ProfilePoint {
  double sigma;
  double loglik;
};

/// Maximizes the GPD log-likelihood over sigma for fixed shape k.
inline ProfilePoint gpd_profile(std::span<const double> z, double k, double z_max, double z_mean) {
  if (std::abs(k) < gpd_zero_shape) {
    const double sigma = z_mean;
    double ll = 0.0;
    for (double v : z) ll += -std::log(sigma) - v / sigma;
    return {sigma, ll};
  }
  // support constraint sigma > -k * z_max for k < 0
  const double lb = k < 0.0 ? -k * z_max : 0.0;
  auto neg_ll = [&](double t) {
    const double sigma = lb + std::exp(t);
    double ll = 0.0;
    for (double v : z) ll += gpd_log_pdf(k, sigma, v);
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::max();
  };
  const double scale = std::max(z_mean, std::numeric_limits<double>::min());
  const double lo = std::log(scale) - 30.0;
  const double hi = std::log(scale) + 8.0;
  std::uintmax_t iters = 200;
  const auto [t, value] = boost::math::tools::brent_find_minima(neg_ll, lo, hi, 40, iters);
  return {lb + std::exp(t), -value};
}

}  // namespace detail

/// GPD fit with the location fixed at theta. The shape is restricted to
/// [-1, 2]; (k, sigma) maximize the likelihood via the profile over k (a
/// coarse grid followed by Brent refinement around the best grid point).
inline FittedDistribution fit_gpd(std::span<const double> xs, double theta) {
  detail::require(xs.size() >= 10, Errc::empty_input, "fit_gpd: need at least 10 values");
  std::vector<double> z;
  z.reserve(xs.size());
  for (double x : xs) {
    detail::require(std::isfinite(x), Errc::support, "fit_gpd: non-finite value");
    detail::require(x >= theta, Errc::support, "fit_gpd: value below the location theta");
    z.push_back(x - theta);
  }
  const auto [zmin_it, zmax_it] = std::minmax_element(z.begin(), z.end());
  detail::require(*zmax_it > *zmin_it, Errc::degenerate_input, "fit_gpd: all values are equal");
  const double z_max = *zmax_it;
  const double z_mean = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());

  auto profile = [&](double k) { return detail::gpd_profile(z, k, z_max, z_mean); };

  double best_k = detail::gpd_k_min;
  detail::ProfilePoint best = profile(best_k);
  const int steps = static_cast<int>(std::lround((detail::gpd_k_max - detail::gpd_k_min) /
                                                 detail::gpd_k_grid_step));
  for (int s = 1; s <= steps; ++s) {
    const double k = detail::gpd_k_min + s * detail::gpd_k_grid_step;
    const auto p = profile(k);
    if (p.loglik > best.loglik) {
      best = p;
      best_k = k;
    }
  }
  const double lo = std::max(detail::gpd_k_min, best_k - detail::gpd_k_grid_step);
  const double hi = std::min(detail::gpd_k_max, best_k + detail::gpd_k_grid_step);
  std::uintmax_t iters = 200;
  const auto [k_refined, neg] = boost::math::tools::brent_find_minima(
      [&](double k) { return -profile(k).loglik; }, lo, hi, 40, iters);
  if (-neg > best.loglik) {
    best_k = k_refined;
    best = profile(k_refined);
  }
  if (!std::isfinite(best.loglik) || !(best.sigma > 0.0))
    throw Error(Errc::convergence, "fit_gpd: profile likelihood has no finite maximum");

  FittedDistribution out;
  out.model = GpdModel{best_k, best.sigma, theta};
  out.n_fit = xs.size();
  out.loglik = gpd_loglik(out.gpd(), xs);
  std::tie(out.aic, out.bic) = information_criteria(out.loglik, out.n_params(), out.n_fit);
  return out;
}

/// GPD fit with the location just below the sample minimum.
inline FittedDistribution fit_gpd(std::span<const double> xs) {
  detail::require(!xs.empty(), Errc::empty_input, "fit_gpd: need at least 10 values");
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  const double theta = *lo - 1e-9 * std::max(1e-300, *hi - *lo);
  return fit_gpd(xs, theta);
}

/// Fits every candidate family and returns the one with the smallest BIC;
/// ties go to the smaller AIC, then to beta.
inline FittedDistribution select_best(std::span<const double> xs,
                                      double maxscale = std::numeric_limits<double>::infinity()) {
  detail::require(xs.size() >= 10, Errc::empty_input, "select_best: need at least 10 values");
  std::vector<FittedDistribution> fits;
  try {
    fits.push_back(fit_beta(xs, beta_support_for(xs, maxscale)));
  } catch (const Error&) {
  }
  try {
    fits.push_back(fit_gpd(xs));
  } catch (const Error&) {
  }
  if (fits.empty())
    throw Error(Errc::all_candidates_failed, "select_best: no candidate family could be fitted");
  // fits are in family order, so stable min keeps beta on a full tie
  const auto best = std::min_element(fits.begin(), fits.end(), [](const auto& x, const auto& y) {
    if (x.bic != y.bic) return x.bic < y.bic;
    return x.aic < y.aic;
  });
  return *best;
}

// ---------------------------------------------------------------------------
// Sampling

inline double draw(const FittedDistribution& dist, Rng& rng) {
  if (dist.family() == Family::beta) {
    const auto& m = dist.beta();
    for (;;) {
      const double x = rng.gamma(m.a);
      const double y = rng.gamma(m.b);
      if (x + y > 0.0) return m.support * (x / (x + y));
    }
  }
  const auto& m = dist.gpd();
  const double u = rng.uniform();
  const double log_tail = std::log1p(-u);  // log(1 - u)
  if (std::abs(m.k) < detail::gpd_zero_shape) return m.theta - m.sigma * log_tail;
  return m.theta + m.sigma * std::expm1(-m.k * log_tail) / m.k;
}

/// m i.i.d. draws: beta through two gammas, GPD through the inverse CDF.
inline std::vector<double> sample(const FittedDistribution& dist, std::size_t m, Seed seed) {
  Rng rng(seed);
  std::vector<double> out(m);
  for (double& x : out) x = draw(dist, rng);
  return out;
}

}  // namespace phstat
