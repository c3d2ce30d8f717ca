#pragma once
// Independent brute-force oracles shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <set>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "gcnet/beam_net.hpp"
#include "gcnet/detect.hpp"
#include "gcnet/graph_stats.hpp"
#include "gcnet/volumes.hpp"
#include "gcnet/rng.hpp"

namespace gcnet::oracle {

// ---------------------------------------------------------------------------
// Beamlets and beams

inline GridPoint pt(std::int64_t x, std::int64_t y, std::int64_t z = 0) {
  GridPoint p;
  p.c[0] = x;
  p.c[1] = y;
  p.c[2] = z;
  return p;
}

// All points of the delta0 lattice lying on some Delta-hyperplane.
inline std::vector<GridPoint> lattice_points(const GridSpec& g, std::int64_t q) {
  std::vector<GridPoint> out;
  const std::int64_t n = g.side() / q;
  std::vector<std::int64_t> idx(static_cast<std::size_t>(g.d), 0);
  while (true) {
    GridPoint p;
    bool tagged = false;
    for (int r = 0; r < g.d; ++r) {
      p.c[static_cast<std::size_t>(r)] = idx[static_cast<std::size_t>(r)] * q;
      tagged = tagged || (p.c[static_cast<std::size_t>(r)] % g.Delta_units() == 0);
    }
    if (tagged) out.push_back(p);
    int r = 0;
    for (; r < g.d; ++r) {
      if (idx[static_cast<std::size_t>(r)] < n) {
        ++idx[static_cast<std::size_t>(r)];
        break;
      }
      idx[static_cast<std::size_t>(r)] = 0;
    }
    if (r == g.d) break;
  }
  return out;
}

// Brute force: pairs contained in some closed Delta-cube, found by scanning cubes.
inline std::set<Segment> brute_beamlets(const GridSpec& g) {
  const auto pts = lattice_points(g, 1);
  const std::int64_t D = g.Delta_units();
  const std::int64_t cells = std::int64_t{1} << g.j;
  std::set<Segment> out;
  std::vector<std::int64_t> cube(static_cast<std::size_t>(g.d), 0);
  while (true) {
    std::vector<GridPoint> inside;
    for (const auto& p : pts) {
      bool in = true;
      for (int r = 0; r < g.d; ++r) {
        const auto v = p.c[static_cast<std::size_t>(r)];
        in = in && v >= cube[static_cast<std::size_t>(r)] * D && v <= (cube[static_cast<std::size_t>(r)] + 1) * D;
      }
      if (in) inside.push_back(p);
    }
    for (std::size_t a = 0; a < inside.size(); ++a)
      for (std::size_t b = a + 1; b < inside.size(); ++b) out.insert(Segment::make(inside[a], inside[b]));
    int r = 0;
    for (; r < g.d; ++r) {
      if (cube[static_cast<std::size_t>(r)] < cells - 1) {
        ++cube[static_cast<std::size_t>(r)];
        break;
      }
      cube[static_cast<std::size_t>(r)] = 0;
    }
    if (r == g.d) break;
  }
  return out;
}

// Brute force beam filter written directly from the defining inequalities, in real arithmetic.
inline bool brute_is_beam(const GridSpec& g, const GridPoint& a, const GridPoint& b) {
  const double D = g.Delta(), dl = g.delta(), eps = 1e-12;
  auto x = [&](const GridPoint& p, int r) { return std::ldexp(static_cast<double>(p.c[static_cast<std::size_t>(r)]), -g.J); };
  auto on_plane = [&](const GridPoint& p, int r) {
    const double m = x(p, r) / D;
    return std::fabs(m - std::round(m)) < eps;
  };
  std::vector<double> diff(static_cast<std::size_t>(g.d));
  double sup = 0.0;
  for (int r = 0; r < g.d; ++r) {
    diff[static_cast<std::size_t>(r)] = std::fabs(x(a, r) - x(b, r));
    sup = std::max(sup, diff[static_cast<std::size_t>(r)]);
  }
  if (sup == 0.0) return false;
  for (int r = 0; r < g.d; ++r)
    if (on_plane(a, r) && on_plane(b, r) && std::fabs(diff[static_cast<std::size_t>(r)] - D) < eps && sup <= D + dl + eps)
      return true;
  for (int r1 = 0; r1 < g.d; ++r1)
    for (int r2 = 0; r2 < g.d; ++r2) {
      if (r1 == r2) continue;
      const bool tags = (on_plane(a, r1) && on_plane(b, r2)) || (on_plane(b, r1) && on_plane(a, r2));
      if (!tags) continue;
      const double m = std::max(diff[static_cast<std::size_t>(r1)], diff[static_cast<std::size_t>(r2)]);
      if (!(m >= D - eps && m < 2 * D - eps)) continue;
      if (std::fabs(diff[static_cast<std::size_t>(r1)] - diff[static_cast<std::size_t>(r2)]) > dl + eps) continue;
      bool ok = true;
      for (int r3 = 0; r3 < g.d; ++r3) ok = ok && m - diff[static_cast<std::size_t>(r3)] >= -dl - eps;
      if (ok) return true;
    }
  return false;
}

inline std::set<Segment> brute_beams(const GridSpec& g) {
  const auto pts = lattice_points(g, g.delta_units());
  std::set<Segment> out;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b)
      if (brute_is_beam(g, pts[a], pts[b])) out.insert(Segment::make(pts[a], pts[b]));
  return out;
}

// Real-arithmetic continuation predicate for oracle comparisons.
inline bool brute_continuation(const GridSpec& g, const GridPoint& p1, const GridPoint& p2, const GridPoint& p3, double tol) {
  std::vector<double> u(static_cast<std::size_t>(g.d)), v(u.size());
  double nu = 0, nv = 0;
  for (int r = 0; r < g.d; ++r) {
    const auto i = static_cast<std::size_t>(r);
    u[i] = std::ldexp(static_cast<double>(p2.c[i] - p1.c[i]), -g.J);
    v[i] = std::ldexp(static_cast<double>(p3.c[i] - p2.c[i]), -g.J);
    nu = std::max(nu, std::fabs(u[i]));
    nv = std::max(nv, std::fabs(v[i]));
  }
  for (std::size_t r = 0; r < u.size(); ++r) {
    double w = 0;
    for (std::size_t q = 0; q < u.size(); ++q) w = std::max(w, std::fabs(u[r] * v[q] - v[r] * u[q]));
    if (w > tol * (nu + nv) * (1 + 1e-12)) return false;
  }
  return true;
}

inline std::vector<std::int64_t> brute_degrees(const GridSpec& g, const std::vector<Segment>& segs, double tol) {
  std::vector<std::int64_t> deg(segs.size(), 0);
  for (std::size_t a = 0; a < segs.size(); ++a)
    for (std::size_t b = 0; b < segs.size(); ++b) {
      if (a == b) continue;
      const auto& A = segs[a];
      const auto& B = segs[b];
      for (const auto& [p, far_a] : {std::pair{A.b1, A.b2}, std::pair{A.b2, A.b1}}) {
        for (const auto& [q, far_b] : {std::pair{B.b1, B.b2}, std::pair{B.b2, B.b1}}) {
          if (p == q && !(far_a == far_b) && brute_continuation(g, far_a, p, far_b, tol)) ++deg[a];
        }
      }
    }
  return deg;
}


// ---------------------------------------------------------------------------
// Detection networks

inline const HolderParams kLine{1, 2, 2.0, 1.0};

inline std::vector<PolyNode> nodes_at(const PolyNetworkSpec& spec, const std::vector<int>& m) {
  const auto coefs = all_coefficients(spec);
  std::vector<PolyNode> out{PolyNode{m, {}}};
  for (int r = 0; r < spec.codim(); ++r) {
    std::vector<PolyNode> next;
    for (const auto& base : out)
      for (const auto& h : coefs) {
        auto n = base;
        n.coefs.push_back(h);
        next.push_back(std::move(n));
      }
    out = std::move(next);
  }
  return out;
}

struct BruteNet {
  std::vector<std::vector<PolyNode>> nodes;
  std::vector<std::vector<std::int64_t>> counts;
};

inline BruteNet brute_net(const PolyNetworkSpec& spec, const PointCloud& cloud, double mult) {
  BruteNet b;
  for (const auto& m : zigzag_order(spec)) {
    b.nodes.push_back(nodes_at(spec, m));
    std::vector<std::int64_t> c;
    for (const auto& n : b.nodes.back()) c.push_back(count_in_region(cloud, spec, n, mult));
    b.counts.push_back(std::move(c));
  }
  return b;
}

// Max over all complete neighbor-linked paths, by exhaustive recursion.
inline std::int64_t brute_glrt(const PolyNetworkSpec& spec, const BruteNet& b, std::size_t* paths) {
  std::int64_t best = -1;
  std::function<void(std::size_t, std::size_t, std::int64_t)> rec = [&](std::size_t t, std::size_t i, std::int64_t acc) {
    acc += b.counts[t][i];
    if (t + 1 == b.nodes.size()) {
      ++*paths;
      best = std::max(best, acc);
      return;
    }
    for (std::size_t j = 0; j < b.nodes[t + 1].size(); ++j)
      if (are_neighbors(spec, b.nodes[t][i], b.nodes[t + 1][j])) rec(t + 1, j, acc);
  };
  for (std::size_t i = 0; i < b.nodes[0].size(); ++i) rec(0, i, 0);
  return best;
}

inline int brute_lsr(const PolyNetworkSpec& spec, const BruteNet& b, double thr) {
  int best = 0;
  std::function<void(std::size_t, std::size_t, int)> rec = [&](std::size_t t, std::size_t i, int len) {
    best = std::max(best, len);
    if (t + 1 == b.nodes.size()) return;
    for (std::size_t j = 0; j < b.nodes[t + 1].size(); ++j)
      if (b.counts[t + 1][j] > thr && are_neighbors(spec, b.nodes[t][i], b.nodes[t + 1][j])) rec(t + 1, j, len + 1);
  };
  for (std::size_t t = 0; t < b.nodes.size(); ++t)
    for (std::size_t i = 0; i < b.nodes[t].size(); ++i)
      if (b.counts[t][i] > thr) rec(t, i, 1);
  return best;
}

inline PointCloud random_cloud(int d, std::size_t n, Rng& rng, bool snap_to_grid = false) {
  PointCloud c(d);
  std::vector<double> p(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : p) v = snap_to_grid ? std::round(rng.uniform() * 8.0) / 8.0 : rng.uniform();
    c.add(p);
  }
  return c;
}

struct SmallCase {
  HolderParams params;
  int cells;
  double delta;
};

// Instances with at most ~10^4 complete paths.
inline const std::vector<SmallCase> kSmall = {
    {{1, 2, 1.0, 1.0}, 3, 0.25}, {{1, 2, 2.0, 1.0}, 2, 0.25}, {{1, 2, 2.0, 1.0}, 3, 0.4},
    {{2, 3, 1.0, 1.0}, 2, 0.5},  {{1, 3, 1.0, 1.0}, 2, 0.5},  {{1, 2, 0.5, 1.0}, 4, 0.4},
};


// ---------------------------------------------------------------------------
// Graphs

// DAG on n vertices: edges follow a random permutation, each present with probability p.
inline Graph random_dag(std::size_t n, double p, Rng& rng) {
  std::vector<std::uint32_t> perm(n);
  for (std::uint32_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (rng.uniform() < p) e.emplace_back(perm[a], perm[b]);
  return Graph::make(n, e, true);
}

// Every s -> t path of a DAG (s != t), as vertex lists.
inline void all_paths(const Graph& g, std::uint32_t s, const std::function<void(const std::vector<std::uint32_t>&)>& fn) {
  std::vector<std::uint32_t> stack{s};
  std::function<void(std::uint32_t)> rec = [&](std::uint32_t u) {
    if (stack.size() > 1) fn(stack);
    for (auto v : g.out[u]) {
      stack.push_back(v);
      rec(v);
      stack.pop_back();
    }
  };
  rec(s);
}

// Longest-path betweenness in exact rational arithmetic.
inline std::vector<boost::rational<std::int64_t>> rational_betweenness(const Graph& g) {
  using Q = boost::rational<std::int64_t>;
  std::vector<Q> score(g.n, Q(0));
  for (std::uint32_t s = 0; s < g.n; ++s) {
    std::vector<std::size_t> best(g.n, 0);
    std::vector<std::vector<std::vector<std::uint32_t>>> longest(g.n);
    all_paths(g, s, [&](const std::vector<std::uint32_t>& p) {
      const auto t = p.back();
      if (p.size() > best[t]) {
        best[t] = p.size();
        longest[t].clear();
      }
      if (p.size() == best[t]) longest[t].push_back(p);
    });
    for (std::uint32_t t = 0; t < g.n; ++t) {
      if (longest[t].empty()) continue;
      const auto total = static_cast<std::int64_t>(longest[t].size());
      std::vector<std::int64_t> through(g.n, 0);
      for (const auto& p : longest[t])
        for (std::size_t i = 1; i + 1 < p.size(); ++i) ++through[p[i]];
      for (std::uint32_t v = 0; v < g.n; ++v)
        if (through[v]) score[v] += Q(through[v], total);
    }
  }
  return score;
}

// Max vertex-weight path among alive vertices (single vertices count as paths).
inline double brute_max_path(const Graph& g, const std::vector<double>& w, const std::vector<bool>& alive) {
  double best = -std::numeric_limits<double>::infinity();
  std::function<void(std::uint32_t, double)> rec = [&](std::uint32_t u, double acc) {
    acc += w[u];
    best = std::max(best, acc);
    for (auto v : g.out[u])
      if (alive[v]) rec(v, acc);
  };
  for (std::uint32_t s = 0; s < g.n; ++s)
    if (alive[s]) rec(s, 0.0);
  return best;
}

// ---------------------------------------------------------------------------
// Line integrals

// Midpoint quadrature of the piecewise-constant intensity along [a, b] (voxel-unit gridpoints),
// with `per_voxel` samples per voxel length.
inline double quadrature_line_integral(const PixelVolume& vol, const GridPoint& a, const GridPoint& b,
                                       double per_voxel = 1e4) {
  const int d = vol.dim();
  double len = 0.0;
  for (int r = 0; r < d; ++r) {
    const double dr = static_cast<double>(b.c[static_cast<std::size_t>(r)] - a.c[static_cast<std::size_t>(r)]);
    len += dr * dr;
  }
  len = std::sqrt(len);
  const auto m = static_cast<std::size_t>(std::ceil(per_voxel * len));
  std::vector<double> x(static_cast<std::size_t>(d));
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
    for (int r = 0; r < d; ++r) {
      const auto k = static_cast<std::size_t>(r);
      x[k] = static_cast<double>(a.c[k]) + u * static_cast<double>(b.c[k] - a.c[k]);
    }
    sum += point_intensity(vol, x);
  }
  return sum / static_cast<double>(m) * len / vol.dims[0];
}

}  // namespace gcnet::oracle
