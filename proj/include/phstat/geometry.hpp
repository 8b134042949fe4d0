#pragma once

// Seeded samplers for the benchmark shapes and the additive noise model.
//
// Every sampler is a pure function of (parameters, seed). Points are stored
// row-major in a flat coordinate buffer.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phstat/error.hpp"
#include "phstat/random.hpp"

namespace phstat {

enum class Shape { circle, two_concentric, two_distinct, sphere, torus3, custom };

inline std::string_view shape_name(Shape s) noexcept {
  switch (s) {
    case Shape::circle: return "circle";
    case Shape::two_concentric: return "two_concentric";
    case Shape::two_distinct: return "two_distinct";
    case Shape::sphere: return "sphere";
    case Shape::torus3: return "torus3";
    case Shape::custom: return "custom";
  }
  return "custom";
}

inline Shape parse_shape(std::string_view name) {
  for (Shape s : {Shape::circle, Shape::two_concentric, Shape::two_distinct,
                  Shape::sphere, Shape::torus3, Shape::custom}) {
    if (shape_name(s) == name) return s;
  }
  throw Error(Errc::invalid_parameter, "unknown shape '" + std::string(name) + "'");
}

/// Provenance carried alongside the coordinates.
struct CloudMeta {
  Shape shape = Shape::custom;
  std::size_t n = 0;
  double radius = 0.0;     // circle/sphere radius, per-circle radius for two_distinct
  double d_outer = 0.0;    // two_concentric
  double d_inner = 0.0;    // two_concentric
  double gap = 0.0;        // two_distinct
  double noise_fraction = 0.0;
  Seed seed = 0;
  Seed noise_seed = 0;

  friend bool operator==(const CloudMeta&, const CloudMeta&) = default;
};

class PointCloud {
 public:
  PointCloud(std::size_t dim, std::vector<double> coords, CloudMeta meta = {})
      : dim_(dim), coords_(std::move(coords)), meta_(meta) {
    detail::require(dim_ > 0, Errc::invalid_parameter, "PointCloud: dimension must be positive");
    detail::require(!coords_.empty() && coords_.size() % dim_ == 0, Errc::invalid_parameter,
                    "PointCloud: coordinate count must be a positive multiple of dim");
    meta_.n = size();
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return coords_.size() / dim_; }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<double> point(std::size_t i) { return {coords_.data() + i * dim_, dim_}; }

  const std::vector<double>& coords() const noexcept { return coords_; }
  const CloudMeta& meta() const noexcept { return meta_; }
  CloudMeta& meta() noexcept { return meta_; }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  std::size_t dim_;
  std::vector<double> coords_;
  CloudMeta meta_;
};

namespace detail {

/// Rounds a unit-scale coordinate to a multiple of 2^-50. Products with small
/// integer radii and differences of such products are then exact, which keeps
/// tiny pairwise distances exactly proportional to the radius.
inline double snap_unit(double v) { return std::ldexp(std::round(std::ldexp(v, 50)), -50); }

inline void append_circle(std::vector<double>& out, Rng& rng, std::size_t n, double radius,
                          double cx = 0.0, double cy = 0.0) {
  for (std::size_t i = 0; i < n; ++i) {
    const double t = rng.angle();
    out.push_back(cx + radius * snap_unit(std::cos(t)));
    out.push_back(cy + radius * snap_unit(std::sin(t)));
  }
}

}  // namespace detail

/// n points on the circle of radius r about the origin, angles i.i.d.
/// uniform. The angle stream depends only on the seed, so clouds of different
/// radii with one seed are exact scalings of each other.
inline PointCloud sample_circle(std::size_t n, double r, Seed seed) {
  detail::require(n >= 1, Errc::invalid_parameter, "sample_circle: n must be at least 1");
  detail::require(r > 0.0 && std::isfinite(r), Errc::invalid_parameter,
                  "sample_circle: radius must be positive");
  Rng rng(seed);
  std::vector<double> xy;
  xy.reserve(2 * n);
  detail::append_circle(xy, rng, n, r);
  CloudMeta meta{.shape = Shape::circle, .radius = r, .seed = seed};
  return PointCloud(2, std::move(xy), meta);
}

/// Two concentric circles given by their diameters; outer points come first.
inline PointCloud sample_two_concentric(std::size_t n_outer, std::size_t n_inner, double d_outer,
                                        double d_inner, Seed seed) {
  detail::require(n_outer >= 1 && n_inner >= 1, Errc::invalid_parameter,
                  "sample_two_concentric: counts must be at least 1");
  detail::require(d_inner > 0.0 && d_outer > d_inner && std::isfinite(d_outer),
                  Errc::invalid_parameter,
                  "sample_two_concentric: need d_outer > d_inner > 0");
  Rng rng(seed);
  std::vector<double> xy;
  xy.reserve(2 * (n_outer + n_inner));
  detail::append_circle(xy, rng, n_outer, d_outer / 2.0);
  detail::append_circle(xy, rng, n_inner, d_inner / 2.0);
  CloudMeta meta{.shape = Shape::two_concentric, .d_outer = d_outer, .d_inner = d_inner,
                 .seed = seed};
  return PointCloud(2, std::move(xy), meta);
}

/// Two circles of radius r centered at (0,0) and (2r + gap, 0): the closest
/// points of the two circles are `gap` apart.
inline PointCloud sample_two_distinct(std::size_t n_each, double r, double gap, Seed seed) {
  detail::require(n_each >= 1, Errc::invalid_parameter, "sample_two_distinct: n_each must be at least 1");
  detail::require(r > 0.0 && std::isfinite(r), Errc::invalid_parameter,
                  "sample_two_distinct: radius must be positive");
  detail::require(gap > 0.0 && std::isfinite(gap), Errc::invalid_parameter,
                  "sample_two_distinct: gap must be positive");
  Rng rng(seed);
  std::vector<double> xy;
  xy.reserve(4 * n_each);
  detail::append_circle(xy, rng, n_each, r);
  detail::append_circle(xy, rng, n_each, r, 2.0 * r + gap, 0.0);
  CloudMeta meta{.shape = Shape::two_distinct, .radius = r, .gap = gap, .seed = seed};
  return PointCloud(2, std::move(xy), meta);
}

/// Uniform on the 2-sphere of radius r in R^3 (normalized Gaussian vectors).
inline PointCloud sample_sphere(std::size_t n, double r, Seed seed) {
  detail::require(n >= 1, Errc::invalid_parameter, "sample_sphere: n must be at least 1");
  detail::require(r > 0.0 && std::isfinite(r), Errc::invalid_parameter,
                  "sample_sphere: radius must be positive");
  Rng rng(seed);
  std::vector<double> xyz;
  xyz.reserve(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    double x, y, z, norm;
    do {
      x = rng.normal();
      y = rng.normal();
      z = rng.normal();
      norm = std::sqrt(x * x + y * y + z * z);
    } while (norm < 1e-12);
    xyz.push_back(r * detail::snap_unit(x / norm));
    xyz.push_back(r * detail::snap_unit(y / norm));
    xyz.push_back(r * detail::snap_unit(z / norm));
  }
  CloudMeta meta{.shape = Shape::sphere, .radius = r, .seed = seed};
  return PointCloud(3, std::move(xyz), meta);
}

/// Scale applied to the flat 3-torus embedding; puts every point on the unit
/// sphere of R^6.
inline constexpr double torus3_scale = 1.0 / std::numbers::sqrt3;

/// Flat 3-torus (S^1)^3 embedded in R^6 as
/// (cos t1, sin t1, cos t2, sin t2, cos t3, sin t3) * torus3_scale,
/// with t1, t2, t3 i.i.d. uniform; uniform angles are uniform for the flat
/// metric.
inline PointCloud sample_torus3(std::size_t n, Seed seed) {
  detail::require(n >= 1, Errc::invalid_parameter, "sample_torus3: n must be at least 1");
  Rng rng(seed);
  std::vector<double> coords;
  coords.reserve(6 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < 3; ++k) {
      const double t = rng.angle();
      coords.push_back(torus3_scale * std::cos(t));
      coords.push_back(torus3_scale * std::sin(t));
    }
  }
  CloudMeta meta{.shape = Shape::torus3, .radius = torus3_scale, .seed = seed};
  return PointCloud(6, std::move(coords), meta);
}

/// Standard deviation of each noise coordinate (covariance I/9).
inline constexpr double noise_sd = 1.0 / 3.0;

/// Adds isotropic N(0, I/9) noise to round(M * n) points chosen uniformly
/// without replacement; all other points are left untouched.
inline PointCloud add_noise(const PointCloud& cloud, double fraction, Seed seed) {
  detail::require(fraction >= 0.0 && fraction <= 1.0, Errc::invalid_parameter,
                  "add_noise: noise fraction must lie in [0, 1]");
  PointCloud out = cloud;
  out.meta().noise_fraction = fraction;
  out.meta().noise_seed = seed;
  const std::size_t n = cloud.size();
  const auto n_noisy = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (n_noisy == 0) return out;

  Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // partial Fisher-Yates: the first n_noisy slots are the chosen subset
  for (std::size_t i = 0; i < n_noisy; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(order[i], order[j]);
  }
  for (std::size_t i = 0; i < n_noisy; ++i) {
    for (double& x : out.point(order[i])) x += noise_sd * rng.normal();
  }
  return out;
}

/// Shape parameters shared by the experiment runners.
struct ShapeConfig {
  Shape shape = Shape::circle;
  std::size_t n = 500;
  double r = 1.0;          // circle / sphere radius; per-circle radius for two_distinct
  double d_outer = 4.0;
  double d_inner = 2.0;
  double gap = 0.6;
  double noise_fraction = 0.0;
};

/// Draws the configured shape with `n` total points and applies the noise
/// model. two_concentric splits n as 5/8 outer, 3/8 inner (inner/outer ratio
/// 0.6); two_distinct splits n evenly.
inline PointCloud sample_shape(const ShapeConfig& cfg, Seed seed) {
  detail::require(cfg.n >= 1, Errc::invalid_parameter, "sample_shape: n must be at least 1");
  detail::require(cfg.noise_fraction >= 0.0 && cfg.noise_fraction <= 1.0,
                  Errc::invalid_parameter, "sample_shape: noise fraction must lie in [0, 1]");
  const Seed shape_seed = derive_seed(seed, 0);
  PointCloud cloud = [&] {
    switch (cfg.shape) {
      case Shape::circle: return sample_circle(cfg.n, cfg.r, shape_seed);
      case Shape::two_concentric: {
        detail::require(cfg.n >= 2, Errc::invalid_parameter,
                        "sample_shape: two_concentric needs n >= 2");
        std::size_t n_outer = cfg.n * 5 / 8;
        if (n_outer == 0) n_outer = 1;
        if (n_outer == cfg.n) n_outer = cfg.n - 1;
        return sample_two_concentric(n_outer, cfg.n - n_outer, cfg.d_outer, cfg.d_inner,
                                     shape_seed);
      }
      case Shape::two_distinct:
        detail::require(cfg.n >= 2 && cfg.n % 2 == 0, Errc::invalid_parameter,
                        "sample_shape: two_distinct needs an even n >= 2");
        return sample_two_distinct(cfg.n / 2, cfg.r, cfg.gap, shape_seed);
      case Shape::sphere: return sample_sphere(cfg.n, cfg.r, shape_seed);
      case Shape::torus3: return sample_torus3(cfg.n, shape_seed);
      case Shape::custom: break;
    }
    throw Error(Errc::invalid_parameter, "sample_shape: shape has no sampler");
  }();
  cloud.meta().seed = seed;
  return add_noise(cloud, cfg.noise_fraction, derive_seed(seed, 1));
}

}  // namespace phstat
