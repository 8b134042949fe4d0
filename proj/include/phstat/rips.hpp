#pragma once

// Vietoris-Rips persistence.
//
// Filtration convention: a simplex enters at its diameter (the longest
// pairwise distance among its vertices), so an edge appears at its length.
// Under the "radius" convention every value would be halved.
//
// Dimension 0 is computed from a Kruskal sweep over the sorted edges. Higher
// dimensions build the complex up to dimension maxdim + 1 and reduce the
// boundary matrices over Z/2, using the same edge order so the H0 merge edges
// are exactly the negative edges of the reduction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "phstat/error.hpp"
#include "phstat/geometry.hpp"

namespace phstat {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// Symmetric distance matrix with zero diagonal, stored as the strict upper
/// triangle.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(std::size_t n) : n_(n), upper_(n * (n - (n > 0)) / 2, 0.0) {}

  std::size_t size() const noexcept { return n_; }

  double operator()(std::size_t i, std::size_t j) const noexcept {
    if (i == j) return 0.0;
    if (i > j) std::swap(i, j);
    return upper_[index(i, j)];
  }

  void set(std::size_t i, std::size_t j, double value) {
    detail::require(i != j, Errc::invalid_parameter, "DistanceMatrix::set: diagonal is fixed at 0");
    detail::require(value >= 0.0, Errc::invalid_parameter, "DistanceMatrix::set: negative distance");
    if (i > j) std::swap(i, j);
    upper_[index(i, j)] = value;
  }

  /// Position of (i, j), i < j, in the condensed upper triangle.
  std::size_t index(std::size_t i, std::size_t j) const noexcept {
    return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
  }

  std::size_t pair_count() const noexcept { return upper_.size(); }

 private:
  std::size_t n_;
  std::vector<double> upper_;
};

inline DistanceMatrix pairwise_distances(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  DistanceMatrix d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = cloud.point(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto q = cloud.point(j);
      double sum = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double diff = p[k] - q[k];
        sum += diff * diff;
      }
      d.set(i, j, std::sqrt(sum));
    }
  }
  return d;
}

struct PersistencePair {
  int dim = 0;
  double birth = 0.0;
  double death = infinity;
  bool clipped = false;  // death censored at maxscale

  bool is_infinite() const noexcept { return std::isinf(death); }
  double lifetime() const noexcept { return death - birth; }

  friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
};

struct PersistenceDiagram {
  std::vector<PersistencePair> pairs;
  double maxscale = 0.0;
  std::size_t n_points = 0;

  std::vector<PersistencePair> in_dim(int dim) const {
    std::vector<PersistencePair> out;
    for (const auto& p : pairs)
      if (p.dim == dim) out.push_back(p);
    return out;
  }

  friend bool operator==(const PersistenceDiagram&, const PersistenceDiagram&) = default;
};

struct Edge {
  double length;
  std::uint32_t i;
  std::uint32_t j;

  friend bool operator<(const Edge& a, const Edge& b) noexcept {
    if (a.length != b.length) return a.length < b.length;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  }
};

/// All edges of length <= maxscale, i < j, sorted by (length, i, j).
inline std::vector<Edge> sorted_edges(const DistanceMatrix& d, double maxscale) {
  const std::size_t n = d.size();
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double len = d(i, j);
      if (len <= maxscale)
        edges.push_back({len, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
    }
  std::sort(edges.begin(), edges.end());
  return edges;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    std::size_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::size_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  /// Merges the classes of a and b; false if they were already merged.
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned char> rank_;
};

namespace detail {

inline std::vector<bool> merge_edges(std::size_t n, const std::vector<Edge>& edges) {
  UnionFind uf(n);
  std::vector<bool> merges(edges.size(), false);
  for (std::size_t e = 0; e < edges.size(); ++e) merges[e] = uf.unite(edges[e].i, edges[e].j);
  return merges;
}

inline PersistenceDiagram h0_from_edges(std::size_t n, const std::vector<Edge>& edges,
                                        const std::vector<bool>& merges, double maxscale) {
  PersistenceDiagram diag;
  diag.maxscale = maxscale;
  diag.n_points = n;
  diag.pairs.reserve(n);
  std::size_t merged = 0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!merges[e]) continue;
    diag.pairs.push_back({0, 0.0, edges[e].length, false});
    ++merged;
  }
  // components still separate at maxscale; one of them is the infinite class
  for (std::size_t c = merged + 1; c < n; ++c) diag.pairs.push_back({0, 0.0, maxscale, true});
  if (n > 0) diag.pairs.push_back({0, 0.0, infinity, false});
  return diag;
}

}  // namespace detail

/// Dimension-0 diagram: one pair per point, all born at 0. Finite deaths are
/// the minimum-spanning-forest edges of length <= maxscale; components still
/// separate at maxscale die there with clipped = true, except one infinite
/// pair.
inline PersistenceDiagram h0_persistence(const DistanceMatrix& d, double maxscale) {
  detail::require(maxscale > 0.0, Errc::invalid_parameter, "h0_persistence: maxscale must be positive");
  const auto edges = sorted_edges(d, maxscale);
  return detail::h0_from_edges(d.size(), edges, detail::merge_edges(d.size(), edges), maxscale);
}

struct RipsOptions {
  std::size_t simplex_cap = 50'000'000;
};

namespace detail {

using Column = std::vector<std::uint32_t>;

/// Z/2 sum of two sorted columns.
inline Column add_columns(const Column& a, const Column& b) {
  Column out;
  out.reserve(a.size() + b.size());
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline constexpr std::int64_t no_pivot = -1;

/// Standard left-to-right column reduction. `boundary(c)` returns the sorted
/// row indices of column c; columns with skip[c] set are treated as zero.
/// Returns the pivot row of every reduced column (no_pivot if it vanished).
template <class BoundaryFn>
std::vector<std::int64_t> reduce(std::size_t n_columns, std::size_t n_rows, BoundaryFn&& boundary,
                                 const std::vector<bool>& skip) {
  std::vector<std::int64_t> pivot(n_columns, no_pivot);
  std::vector<std::int64_t> owner(n_rows, no_pivot);
  std::vector<Column> reduced(n_columns);
  for (std::size_t c = 0; c < n_columns; ++c) {
    if (!skip.empty() && skip[c]) continue;
    Column col = boundary(c);
    while (!col.empty()) {
      const auto low = col.back();
      const auto other = owner[low];
      if (other == no_pivot) break;
      col = add_columns(col, reduced[static_cast<std::size_t>(other)]);
    }
    if (!col.empty()) {
      pivot[c] = col.back();
      owner[col.back()] = static_cast<std::int64_t>(c);
      reduced[c] = std::move(col);
    }
  }
  return pivot;
}

struct Triangle {
  double value;
  std::uint32_t v[3];
};

struct Tetrahedron {
  double value;
  std::uint32_t v[4];
};

template <class S>
bool filtration_less(const S& a, const S& b) {
  if (a.value != b.value) return a.value < b.value;
  return std::lexicographical_compare(std::begin(a.v), std::end(a.v), std::begin(b.v),
                                      std::end(b.v));
}

inline void check_cap(std::size_t count, std::size_t cap) {
  if (count > cap)
    throw Error(Errc::resource_limit, "rips_persistence: simplex count exceeds cap of " +
                                          std::to_string(cap));
}

}  // namespace detail

/// Vietoris-Rips persistence in dimensions 0..maxdim over Z/2. Dimension 0 is
/// identical to h0_persistence. Higher-dimensional features still alive at
/// maxscale are clipped there; zero-length pairs are dropped.
inline PersistenceDiagram rips_persistence(const DistanceMatrix& d, double maxscale, int maxdim,
                                           const RipsOptions& options = {}) {
  detail::require(maxscale > 0.0, Errc::invalid_parameter, "rips_persistence: maxscale must be positive");
  detail::require(maxdim >= 0 && maxdim <= 2, Errc::invalid_parameter,
                  "rips_persistence: maxdim must be 0, 1 or 2");
  const std::size_t n = d.size();
  const auto edges = sorted_edges(d, maxscale);
  detail::check_cap(n + edges.size(), options.simplex_cap);
  const auto merges = detail::merge_edges(n, edges);
  PersistenceDiagram diag = detail::h0_from_edges(n, edges, merges, maxscale);
  if (maxdim == 0 || n < 3) return diag;

  // edge lookup by vertex pair, sharing the distance matrix's condensed layout
  constexpr std::uint32_t absent = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> edge_id(d.pair_count(), absent);
  std::vector<std::vector<std::uint32_t>> upper_nbrs(n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    edge_id[d.index(edges[e].i, edges[e].j)] = static_cast<std::uint32_t>(e);
    upper_nbrs[edges[e].i].push_back(edges[e].j);
  }
  for (auto& nb : upper_nbrs) std::sort(nb.begin(), nb.end());
  auto edge_of = [&](std::uint32_t a, std::uint32_t b) { return edge_id[d.index(a, b)]; };

  std::size_t total = n + edges.size();
  std::vector<detail::Triangle> triangles;
  std::vector<std::uint32_t> common;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j : upper_nbrs[i]) {
      common.clear();
      std::set_intersection(upper_nbrs[i].begin(), upper_nbrs[i].end(), upper_nbrs[j].begin(),
                            upper_nbrs[j].end(), std::back_inserter(common));
      for (std::uint32_t k : common) {
        const double value = std::max({d(i, j), d(i, k), d(j, k)});
        triangles.push_back({value, {i, j, k}});
        detail::check_cap(++total, options.simplex_cap);
      }
    }
  }
  std::sort(triangles.begin(), triangles.end(), detail::filtration_less<detail::Triangle>);

  std::vector<detail::Tetrahedron> tetrahedra;
  if (maxdim >= 2) {
    std::vector<std::uint32_t> common3;
    for (const auto& t : triangles) {
      const auto [i, j, k] = t.v;
      common.clear();
      std::set_intersection(upper_nbrs[i].begin(), upper_nbrs[i].end(), upper_nbrs[j].begin(),
                            upper_nbrs[j].end(), std::back_inserter(common));
      common3.clear();
      std::set_intersection(common.begin(), common.end(), upper_nbrs[k].begin(),
                            upper_nbrs[k].end(), std::back_inserter(common3));
      for (std::uint32_t l : common3) {
        const double value = std::max({t.value, d(i, l), d(j, l), d(k, l)});
        tetrahedra.push_back({value, {i, j, k, l}});
        detail::check_cap(++total, options.simplex_cap);
      }
    }
    std::sort(tetrahedra.begin(), tetrahedra.end(), detail::filtration_less<detail::Tetrahedron>);
  }

  // Dimension 2 first so its pivots can clear columns of the triangle matrix.
  std::vector<bool> triangle_cleared(triangles.size(), false);
  std::vector<std::int64_t> tet_pivot;
  if (maxdim >= 2) {
    std::unordered_map<std::uint64_t, std::uint32_t> triangle_id;
    triangle_id.reserve(triangles.size());
    auto key = [n](std::uint64_t a, std::uint64_t b, std::uint64_t c) { return (a * n + b) * n + c; };
    for (std::size_t t = 0; t < triangles.size(); ++t) {
      const auto& v = triangles[t].v;
      triangle_id.emplace(key(v[0], v[1], v[2]), static_cast<std::uint32_t>(t));
    }
    auto boundary = [&](std::size_t c) {
      const auto& v = tetrahedra[c].v;
      detail::Column col{triangle_id.at(key(v[1], v[2], v[3])), triangle_id.at(key(v[0], v[2], v[3])),
                         triangle_id.at(key(v[0], v[1], v[3])), triangle_id.at(key(v[0], v[1], v[2]))};
      std::sort(col.begin(), col.end());
      return col;
    };
    tet_pivot = detail::reduce(tetrahedra.size(), triangles.size(), boundary, {});
    for (auto p : tet_pivot)
      if (p != detail::no_pivot) triangle_cleared[static_cast<std::size_t>(p)] = true;
  }

  auto triangle_boundary = [&](std::size_t c) {
    const auto& v = triangles[c].v;
    detail::Column col{edge_of(v[1], v[2]), edge_of(v[0], v[2]), edge_of(v[0], v[1])};
    std::sort(col.begin(), col.end());
    return col;
  };
  const auto tri_pivot =
      detail::reduce(triangles.size(), edges.size(), triangle_boundary, triangle_cleared);

  std::vector<bool> edge_killed(edges.size(), false);
  for (std::size_t c = 0; c < triangles.size(); ++c) {
    if (tri_pivot[c] == detail::no_pivot) continue;
    const auto e = static_cast<std::size_t>(tri_pivot[c]);
    edge_killed[e] = true;
    if (edges[e].length < triangles[c].value)
      diag.pairs.push_back({1, edges[e].length, triangles[c].value, false});
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (merges[e] || edge_killed[e]) continue;
    if (edges[e].length < maxscale) diag.pairs.push_back({1, edges[e].length, maxscale, true});
  }

  if (maxdim >= 2) {
    std::vector<bool> triangle_killed(triangles.size(), false);
    for (std::size_t c = 0; c < tetrahedra.size(); ++c) {
      if (tet_pivot[c] == detail::no_pivot) continue;
      const auto t = static_cast<std::size_t>(tet_pivot[c]);
      triangle_killed[t] = true;
      if (triangles[t].value < tetrahedra[c].value)
        diag.pairs.push_back({2, triangles[t].value, tetrahedra[c].value, false});
    }
    for (std::size_t t = 0; t < triangles.size(); ++t) {
      const bool positive = tri_pivot[t] == detail::no_pivot;
      if (!positive || triangle_killed[t]) continue;
      if (triangles[t].value < maxscale)
        diag.pairs.push_back({2, triangles[t].value, maxscale, true});
    }
  }
  return diag;
}

/// Largest minimum-spanning-tree edge (0 for a single point).
inline double max_mst_edge(const DistanceMatrix& d) {
  const auto edges = sorted_edges(d, infinity);
  UnionFind uf(d.size());
  double longest = 0.0;
  for (const auto& e : edges)
    if (uf.unite(e.i, e.j)) longest = e.length;
  return longest;
}

/// Smallest grid scale initial * growth^k at which the largest finite H0
/// death is strictly below the scale. Any larger scale yields the same H0
/// diagram up to the maxscale bookkeeping of the infinite pair.
inline double optimal_maxscale(const DistanceMatrix& d, double initial = 0.1, double growth = 1.5) {
  detail::require(initial > 0.0 && std::isfinite(initial), Errc::invalid_parameter,
                  "optimal_maxscale: initial scale must be positive");
  detail::require(growth > 1.0 && std::isfinite(growth), Errc::invalid_parameter,
                  "optimal_maxscale: growth must exceed 1");
  const double longest = max_mst_edge(d);
  double scale = initial;
  while (!(longest < scale)) scale *= growth;
  return scale;
}

}  // namespace phstat
