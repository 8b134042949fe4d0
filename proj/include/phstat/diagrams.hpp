#pragma once

// Diagram-level statistics for H0 death samples and the bottleneck distance.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "phstat/error.hpp"
#include "phstat/rips.hpp"

namespace phstat {

/// Finite H0 deaths (clipped ones included, the infinite pair excluded), in
/// diagram order.
inline std::vector<double> finite_deaths(const PersistenceDiagram& diag) {
  std::vector<double> out;
  out.reserve(diag.pairs.size());
  for (const auto& p : diag.pairs)
    if (p.dim == 0 && !p.is_infinite()) out.push_back(p.death);
  return out;
}

struct BarClassification {
  double c_max = 0.0;
  double prop_short = 0.0;  // death <= c_max
  double prop_long = 0.0;   // death > c_max
  std::size_t n_bars = 0;
};

inline BarClassification classify_bars(std::span<const double> deaths, double c_max) {
  detail::require(c_max > 0.0, Errc::invalid_parameter, "classify_bars: c_max must be positive");
  detail::require(!deaths.empty(), Errc::empty_input, "classify_bars: no deaths to classify");
  const auto n_long = std::count_if(deaths.begin(), deaths.end(), [&](double x) { return x > c_max; });
  BarClassification out;
  out.c_max = c_max;
  out.n_bars = deaths.size();
  out.prop_long = static_cast<double>(n_long) / static_cast<double>(deaths.size());
  out.prop_short = 1.0 - out.prop_long;
  return out;
}

/// Nearest-rank empirical quantile: the ceil(p/100 * N)-th smallest value,
/// so p = 100 is the maximum.
inline double nearest_rank(std::span<const double> xs, double percent) {
  detail::require(!xs.empty(), Errc::empty_input, "nearest_rank: empty sample");
  detail::require(percent > 0.0 && percent <= 100.0, Errc::invalid_parameter,
                  "nearest_rank: percent must lie in (0, 100]");
  std::vector<double> sorted(xs.begin(), xs.end());
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(percent / 100.0 * static_cast<double>(n) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
  return sorted[rank - 1];
}

struct PercentileTable {
  static constexpr std::array<int, 3> levels{95, 99, 100};
  std::array<double, 3> values{};
};

inline PercentileTable percentiles(std::span<const double> deaths) {
  detail::require(!deaths.empty(), Errc::empty_input, "percentiles: no deaths");
  PercentileTable out;
  for (std::size_t k = 0; k < PercentileTable::levels.size(); ++k)
    out.values[k] = nearest_rank(deaths, PercentileTable::levels[k]);
  return out;
}

namespace detail {

struct CentralMoments {
  double m2, m3, m4;
};

inline CentralMoments central_moments(std::span<const double> xs) {
  require(xs.size() >= 3, Errc::degenerate_input, "moments: need at least 3 values");
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  CentralMoments m{0.0, 0.0, 0.0};
  for (double x : xs) {
    const double d = x - mean;
    const double d2 = d * d;
    m.m2 += d2;
    m.m3 += d2 * d;
    m.m4 += d2 * d2;
  }
  m.m2 /= n;
  m.m3 /= n;
  m.m4 /= n;
  require(m.m2 > 0.0, Errc::degenerate_input, "moments: zero variance");
  return m;
}

}  // namespace detail

/// Sample skewness m3 / m2^(3/2).
inline double skewness(std::span<const double> xs) {
  const auto m = detail::central_moments(xs);
  return m.m3 / std::pow(m.m2, 1.5);
}

/// Sample kurtosis m4 / m2^2 (not excess: 3 for a normal).
inline double kurtosis(std::span<const double> xs) {
  const auto m = detail::central_moments(xs);
  return m.m4 / (m.m2 * m.m2);
}

struct DiagramPoint {
  double birth;
  double death;
};

namespace detail {

inline double linf(const DiagramPoint& a, const DiagramPoint& b) {
  return std::max(std::abs(a.birth - b.birth), std::abs(a.death - b.death));
}

inline double diagonal_cost(const DiagramPoint& p) { return (p.death - p.birth) / 2.0; }

/// Whether every vertex in `must` (indices into `left`) can be matched to a
/// distinct vertex of `right` within distance delta. Kuhn's augmenting paths.
inline bool covers(std::span<const DiagramPoint> left, const std::vector<std::size_t>& must,
                   std::span<const DiagramPoint> right, double delta) {
  if (must.empty()) return true;
  if (must.size() > right.size()) return false;
  std::vector<std::vector<std::size_t>> adj(must.size());
  for (std::size_t a = 0; a < must.size(); ++a) {
    for (std::size_t b = 0; b < right.size(); ++b)
      if (linf(left[must[a]], right[b]) <= delta) adj[a].push_back(b);
    if (adj[a].empty()) return false;
  }
  std::vector<std::ptrdiff_t> match_right(right.size(), -1);
  std::vector<int> seen(right.size(), -1);
  // iterative DFS over alternating paths
  for (std::size_t root = 0; root < must.size(); ++root) {
    struct Frame {
      std::size_t a;
      std::size_t next;
    };
    std::vector<Frame> stack{{root, 0}};
    std::vector<std::size_t> via;  // right vertex used to enter each frame after the root
    bool found = false;
    while (!stack.empty() && !found) {
      auto& top = stack.back();
      if (top.next == adj[top.a].size()) {
        stack.pop_back();
        if (!via.empty()) via.pop_back();
        continue;
      }
      const std::size_t b = adj[top.a][top.next++];
      if (seen[b] == static_cast<int>(root)) continue;
      seen[b] = static_cast<int>(root);
      if (match_right[b] < 0) {
        // augment along the stack
        match_right[b] = static_cast<std::ptrdiff_t>(top.a);
        for (std::size_t level = via.size(); level > 0; --level) {
          const std::size_t rb = via[level - 1];
          match_right[rb] = static_cast<std::ptrdiff_t>(stack[level - 1].a);
        }
        found = true;
      } else {
        via.push_back(b);
        stack.push_back({static_cast<std::size_t>(match_right[b]), 0});
      }
    }
    if (!found) return false;
  }
  return true;
}

inline std::vector<std::size_t> must_match(std::span<const DiagramPoint> pts, double delta) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (diagonal_cost(pts[i]) > delta) out.push_back(i);
  return out;
}

/// A matching at cost delta exists iff the points that cannot go to the
/// diagonal can be matched on each side separately (Mendelsohn-Dulmage).
inline bool feasible(std::span<const DiagramPoint> a, std::span<const DiagramPoint> b, double delta) {
  return covers(a, must_match(a, delta), b, delta) && covers(b, must_match(b, delta), a, delta);
}

}  // namespace detail

/// Exact bottleneck distance between finite point sets under the L-infinity
/// ground metric, unmatched points paying half their persistence.
inline double bottleneck(std::span<const DiagramPoint> a, std::span<const DiagramPoint> b) {
  std::vector<double> diag_costs{0.0};
  for (const auto& p : a) diag_costs.push_back(detail::diagonal_cost(p));
  for (const auto& p : b) diag_costs.push_back(detail::diagonal_cost(p));
  std::sort(diag_costs.begin(), diag_costs.end());
  diag_costs.erase(std::unique(diag_costs.begin(), diag_costs.end()), diag_costs.end());

  // Smallest feasible diagonal cost; the largest one is always feasible.
  std::size_t lo = 0, hi = diag_costs.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (detail::feasible(a, b, diag_costs[mid])) hi = mid;
    else lo = mid + 1;
  }
  const double upper = diag_costs[lo];
  if (lo == 0) return upper;
  const double lower = diag_costs[lo - 1];

  // Strictly between the two diagonal costs the must-match sets are fixed, so
  // the optimum is either `upper` or a pairing cost involving a must point.
  const auto must_a = detail::must_match(a, lower);
  const auto must_b = detail::must_match(b, lower);
  std::vector<double> candidates;
  auto collect = [&](std::span<const DiagramPoint> from, const std::vector<std::size_t>& must,
                     std::span<const DiagramPoint> to) {
    for (std::size_t i : must)
      for (const auto& q : to) {
        const double c = detail::linf(from[i], q);
        if (c > lower && c < upper) candidates.push_back(c);
      }
  };
  collect(a, must_a, b);
  collect(b, must_b, a);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::size_t clo = 0, chi = candidates.size();
  while (clo < chi) {
    const std::size_t mid = (clo + chi) / 2;
    if (detail::feasible(a, b, candidates[mid])) chi = mid;
    else clo = mid + 1;
  }
  return clo < candidates.size() ? candidates[clo] : upper;
}

/// H0 death list viewed as diagram points born at 0.
inline std::vector<DiagramPoint> h0_points(std::span<const double> deaths) {
  std::vector<DiagramPoint> out;
  out.reserve(deaths.size());
  for (double d : deaths) out.push_back({0.0, d});
  return out;
}

/// Finite points of one dimension; the infinite H0 pair is excluded, clipped
/// pairs participate at their clipped death.
inline std::vector<DiagramPoint> finite_points(const PersistenceDiagram& diag, int dim) {
  std::vector<DiagramPoint> out;
  for (const auto& p : diag.pairs)
    if (p.dim == dim && !p.is_infinite()) out.push_back({p.birth, p.death});
  return out;
}

inline double bottleneck(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim) {
  const auto pa = finite_points(a, dim);
  const auto pb = finite_points(b, dim);
  return bottleneck(pa, pb);
}

}  // namespace phstat
