#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. They share no code with the library beyond plain data types and are
// deliberately slow and simple.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <tuple>
#include <vector>

namespace oracle {

using Points = std::vector<std::vector<double>>;

inline double dist(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += (p[k] - q[k]) * (p[k] - q[k]);
  return std::sqrt(s);
}

/// Kruskal with a component label array (relabelling on merge). Returns the
/// sorted merge heights of edges <= maxscale.
inline std::vector<double> h0_deaths(const Points& pts, double maxscale) {
  const std::size_t n = pts.size();
  std::vector<std::tuple<double, std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double len = dist(pts[i], pts[j]);
      if (len <= maxscale) edges.emplace_back(len, i, j);
    }
  std::sort(edges.begin(), edges.end());
  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) label[i] = i;
  std::vector<double> deaths;
  for (const auto& [len, i, j] : edges) {
    const auto li = label[i], lj = label[j];
    if (li == lj) continue;
    for (auto& l : label)
      if (l == lj) l = li;
    deaths.push_back(len);
  }
  std::sort(deaths.begin(), deaths.end());
  return deaths;
}

struct Bar {
  int dim;
  double birth;
  double death;
  bool operator<(const Bar& o) const {
    return std::tie(dim, birth, death) < std::tie(o.dim, o.birth, o.death);
  }
};

/// Full Vietoris-Rips filtration up to dimension maxdim + 1 and the textbook
/// left-to-right column reduction over Z/2 on a dense boundary matrix.
/// Pairs of dimension >= 1 only; zero-length pairs dropped, essential classes
/// clipped at maxscale.
inline std::vector<Bar> rips_bars(const Points& pts, double maxscale, int maxdim) {
  const std::size_t n = pts.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i][j] = dist(pts[i], pts[j]);

  struct Simplex {
    std::vector<std::size_t> v;
    double value;
  };
  std::vector<Simplex> all;
  std::function<void(std::vector<std::size_t>&, std::size_t)> grow = [&](std::vector<std::size_t>& cur,
                                                                           std::size_t next) {
    if (!cur.empty()) {
      double value = 0.0;
      for (auto a : cur)
        for (auto b : cur) value = std::max(value, d[a][b]);
      if (value > maxscale) return;
      all.push_back({cur, value});
    }
    if (static_cast<int>(cur.size()) == maxdim + 2) return;
    for (std::size_t k = next; k < n; ++k) {
      cur.push_back(k);
      grow(cur, k + 1);
      cur.pop_back();
    }
  };
  std::vector<std::size_t> start;
  grow(start, 0);
  std::stable_sort(all.begin(), all.end(), [](const Simplex& a, const Simplex& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.v.size() < b.v.size();
  });

  const std::size_t m = all.size();
  std::vector<std::vector<char>> col(m, std::vector<char>(m, 0));
  for (std::size_t c = 0; c < m; ++c) {
    if (all[c].v.size() < 2) continue;
    for (std::size_t drop = 0; drop < all[c].v.size(); ++drop) {
      std::vector<std::size_t> face;
      for (std::size_t k = 0; k < all[c].v.size(); ++k)
        if (k != drop) face.push_back(all[c].v[k]);
      for (std::size_t r = 0; r < m; ++r)
        if (all[r].v == face) col[c][r] = 1;
    }
  }
  auto low = [&](std::size_t c) -> long {
    for (std::size_t r = m; r > 0; --r)
      if (col[c][r - 1]) return static_cast<long>(r - 1);
    return -1;
  };
  std::vector<long> lows(m, -1);
  for (std::size_t c = 0; c < m; ++c) {
    for (;;) {
      const long l = low(c);
      if (l < 0) break;
      bool reduced = false;
      for (std::size_t prev = 0; prev < c; ++prev) {
        if (lows[prev] == l) {
          for (std::size_t r = 0; r < m; ++r) col[c][r] ^= col[prev][r];
          reduced = true;
          break;
        }
      }
      if (!reduced) break;
    }
    lows[c] = low(c);
  }

  std::vector<Bar> bars;
  std::vector<char> killed(m, 0);
  for (std::size_t c = 0; c < m; ++c) {
    if (lows[c] < 0) continue;
    const auto r = static_cast<std::size_t>(lows[c]);
    killed[r] = 1;
    const int dim = static_cast<int>(all[r].v.size()) - 1;
    if (dim >= 1 && dim <= maxdim && all[c].value > all[r].value)
      bars.push_back({dim, all[r].value, all[c].value});
  }
  for (std::size_t c = 0; c < m; ++c) {
    const int dim = static_cast<int>(all[c].v.size()) - 1;
    if (dim < 1 || dim > maxdim || lows[c] >= 0 || killed[c]) continue;
    if (all[c].value < maxscale) bars.push_back({dim, all[c].value, maxscale});
  }
  std::sort(bars.begin(), bars.end());
  return bars;
}

struct Pt {
  double birth;
  double death;
};

/// Bottleneck distance by enumerating every partial matching.
inline double bottleneck(const std::vector<Pt>& a, const std::vector<Pt>& b) {
  auto linf = [](const Pt& p, const Pt& q) {
    return std::max(std::abs(p.birth - q.birth), std::abs(p.death - q.death));
  };
  auto diag = [](const Pt& p) { return (p.death - p.birth) / 2.0; };
  double best = std::numeric_limits<double>::infinity();
  std::vector<char> used(b.size(), 0);
  std::function<void(std::size_t, double)> go = [&](std::size_t i, double cost) {
    if (cost >= best) return;
    if (i == a.size()) {
      double total = cost;
      for (std::size_t k = 0; k < b.size(); ++k)
        if (!used[k]) total = std::max(total, diag(b[k]));
      best = std::min(best, total);
      return;
    }
    go(i + 1, std::max(cost, diag(a[i])));
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (used[k]) continue;
      used[k] = 1;
      go(i + 1, std::max(cost, linf(a[i], b[k])));
      used[k] = 0;
    }
  };
  go(0, 0.0);
  return best;
}

/// Two-sample KS statistic by evaluating both ECDFs at every sample value.
inline double ks_statistic(const std::vector<double>& xs, const std::vector<double>& ys) {
  double d = 0.0;
  auto ecdf = [](const std::vector<double>& s, double t) {
    std::size_t c = 0;
    for (double v : s) c += v <= t;
    return static_cast<double>(c) / static_cast<double>(s.size());
  };
  for (const auto* s : {&xs, &ys})
    for (double t : *s) d = std::max(d, std::abs(ecdf(xs, t) - ecdf(ys, t)));
  return d;
}

}  // namespace oracle
