#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gcnet/error.hpp"

namespace gcnet {

inline constexpr int kMaxDim = 4;

/// Dyadic grid at scale (j, J): Delta = 2^-j, delta0 = 2^-J, delta = 2^(j-J).
/// Coordinates are stored as integers in units of delta0.
struct GridSpec {
  int d = 2;
  int j = 0;
  int J = 0;

  GridSpec() = default;
  GridSpec(int d_, int j_, int J_) : d(d_), j(j_), J(J_) {
    if (d < 2 || d > kMaxDim) throw ConfigError("GridSpec: need 2 <= d <= " + std::to_string(kMaxDim));
    if (J < 0 || J > 30 || j < 0 || j > J) throw ConfigError("GridSpec: need 0 <= j <= J <= 30");
  }

  std::int64_t side() const { return std::int64_t{1} << J; }          // 1 in delta0 units
  std::int64_t Delta_units() const { return std::int64_t{1} << (J - j); }
  std::int64_t delta_units() const { return std::int64_t{1} << j; }    // 2^(j-J) in delta0 units
  double delta0() const { return std::ldexp(1.0, -J); }
  double Delta() const { return std::ldexp(1.0, -j); }
  double delta() const { return std::ldexp(1.0, j - J); }
  /// Beams need Delta to be an integer multiple of delta.
  void require_beam_scale() const {
    if (2 * j > J) throw ConfigError("GridSpec: beams need j <= J/2");
  }
};

struct GridPoint {
  std::array<std::int64_t, kMaxDim> c{};

  friend bool operator==(const GridPoint&, const GridPoint&) = default;
  friend auto operator<=>(const GridPoint&, const GridPoint&) = default;
};

struct GridPointHash {
  std::size_t operator()(const GridPoint& p) const {
    std::uint64_t h = 0x9E3779B97F4A7C15ULL;
    for (auto v : p.c) h = (h ^ static_cast<std::uint64_t>(v)) * 0x100000001B3ULL + (h >> 29);
    return static_cast<std::size_t>(h);
  }
};

inline std::vector<double> to_real(const GridSpec& g, const GridPoint& p) {
  std::vector<double> out(static_cast<std::size_t>(g.d));
  for (int r = 0; r < g.d; ++r) out[static_cast<std::size_t>(r)] = std::ldexp(static_cast<double>(p.c[static_cast<std::size_t>(r)]), -g.J);
  return out;
}

/// Axes r for which p lies on an r-hyperplane (coordinate a multiple of Delta).
inline std::vector<int> axis_tags(const GridSpec& g, const GridPoint& p) {
  std::vector<int> out;
  for (int r = 0; r < g.d; ++r)
    if (p.c[static_cast<std::size_t>(r)] % g.Delta_units() == 0) out.push_back(r);
  return out;
}

inline bool on_hyperplane(const GridSpec& g, const GridPoint& p, int r) {
  return p.c[static_cast<std::size_t>(r)] % g.Delta_units() == 0;
}

/// In the cube, a multiple of `quantum` on every axis, and on at least one Delta-hyperplane.
inline bool is_gridpoint(const GridSpec& g, const GridPoint& p, std::int64_t quantum) {
  bool tagged = false;
  for (int r = 0; r < g.d; ++r) {
    const auto v = p.c[static_cast<std::size_t>(r)];
    if (v < 0 || v > g.side() || v % quantum != 0) return false;
    tagged = tagged || v % g.Delta_units() == 0;
  }
  for (int r = g.d; r < kMaxDim; ++r)
    if (p.c[static_cast<std::size_t>(r)] != 0) return false;
  return tagged;
}

/// Unordered segment with canonical endpoint order b1 < b2.
struct Segment {
  GridPoint b1, b2;

  static Segment make(GridPoint a, GridPoint b) { return a < b ? Segment{a, b} : Segment{b, a}; }
  friend bool operator==(const Segment&, const Segment&) = default;
  friend auto operator<=>(const Segment&, const Segment&) = default;
};

struct SegmentHash {
  std::size_t operator()(const Segment& s) const {
    return GridPointHash{}(s.b1) * 31u + GridPointHash{}(s.b2);
  }
};

namespace detail {

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Range of Delta-cube indices along one axis whose closed cube contains both values.
inline std::pair<std::int64_t, std::int64_t> shared_cells(const GridSpec& g, std::int64_t u, std::int64_t v) {
  const std::int64_t D = g.Delta_units();
  const std::int64_t cells = std::int64_t{1} << g.j;
  auto lo_of = [&](std::int64_t x) { return std::max<std::int64_t>(0, floor_div(x + D - 1, D) - 1); };
  auto hi_of = [&](std::int64_t x) { return std::min<std::int64_t>(cells - 1, floor_div(x, D)); };
  return {std::max(lo_of(u), lo_of(v)), std::min(hi_of(u), hi_of(v))};
}

inline std::int64_t sup_units(const GridPoint& a, const GridPoint& b, int d) {
  std::int64_t out = 0;
  for (int r = 0; r < d; ++r) out = std::max(out, std::abs(a.c[static_cast<std::size_t>(r)] - b.c[static_cast<std::size_t>(r)]));
  return out;
}

}  // namespace detail

/// Distinct delta0-gridpoints lying in a common closed Delta-hypercube.
inline bool is_beamlet(const GridSpec& g, const GridPoint& a, const GridPoint& b) {
  if (a == b) return false;
  if (!is_gridpoint(g, a, 1) || !is_gridpoint(g, b, 1)) return false;
  for (int r = 0; r < g.d; ++r) {
    const auto [lo, hi] = detail::shared_cells(g, a.c[static_cast<std::size_t>(r)], b.c[static_cast<std::size_t>(r)]);
    if (lo > hi) return false;
  }
  return true;
}

/// Kind of a beam: r-beam when r2 < 0, otherwise an r1r2-beam whose r1-endpoint is `first_is_r1 ? b1 : b2`.
struct BeamKind {
  int r1 = 0;
  int r2 = -1;
  bool first_is_r1 = true;
  bool is_r_beam() const { return r2 < 0; }
  std::string name() const {
    return is_r_beam() ? "r" + std::to_string(r1 + 1) : "r" + std::to_string(r1 + 1) + "r" + std::to_string(r2 + 1);
  }
  friend bool operator==(const BeamKind&, const BeamKind&) = default;
};

/// Both r-gridpoints on consecutive r-hyperplanes (|Delta_r| = Delta) with sup distance <= Delta + delta.
inline bool is_r_beam(const GridSpec& g, const GridPoint& a, const GridPoint& b, int r) {
  if (!on_hyperplane(g, a, r) || !on_hyperplane(g, b, r)) return false;
  if (std::abs(a.c[static_cast<std::size_t>(r)] - b.c[static_cast<std::size_t>(r)]) != g.Delta_units()) return false;
  return detail::sup_units(a, b, g.d) <= g.Delta_units() + g.delta_units();
}

/// a is an r1-gridpoint, b an r2-gridpoint, and the three diagonal conditions hold.
inline bool is_rr_beam(const GridSpec& g, const GridPoint& a, const GridPoint& b, int r1, int r2) {
  if (r1 == r2 || !on_hyperplane(g, a, r1) || !on_hyperplane(g, b, r2)) return false;
  const std::int64_t d1 = std::abs(a.c[static_cast<std::size_t>(r1)] - b.c[static_cast<std::size_t>(r1)]);
  const std::int64_t d2 = std::abs(a.c[static_cast<std::size_t>(r2)] - b.c[static_cast<std::size_t>(r2)]);
  const std::int64_t top = std::max(d1, d2);
  const std::int64_t D = g.Delta_units(), dl = g.delta_units();
  if (top < D || top >= 2 * D) return false;
  if (std::abs(d1 - d2) > dl) return false;
  for (int r3 = 0; r3 < g.d; ++r3)
    if (top - std::abs(a.c[static_cast<std::size_t>(r3)] - b.c[static_cast<std::size_t>(r3)]) < -dl) return false;
  return true;
}

/// First matching kind (r-beams by axis, then r1r2-beams by (r1, r2)), if the segment is a beam.
inline std::optional<BeamKind> classify_beam(const GridSpec& g, const GridPoint& a, const GridPoint& b) {
  if (a == b || !is_gridpoint(g, a, g.delta_units()) || !is_gridpoint(g, b, g.delta_units())) return std::nullopt;
  for (int r = 0; r < g.d; ++r)
    if (is_r_beam(g, a, b, r)) return BeamKind{r, -1, true};
  for (int r1 = 0; r1 < g.d; ++r1)
    for (int r2 = 0; r2 < g.d; ++r2) {
      if (r1 == r2) continue;
      if (is_rr_beam(g, a, b, r1, r2)) return BeamKind{r1, r2, true};
      if (is_rr_beam(g, b, a, r1, r2)) return BeamKind{r1, r2, false};
    }
  return std::nullopt;
}

inline bool is_beam(const GridSpec& g, const GridPoint& a, const GridPoint& b) {
  return classify_beam(g, a, b).has_value();
}

/// Bilinear good-continuation test on [b1,b2],[b2,b3]:
/// den * |u_r v - v_r u| <= num * tol_units * (|u| + |v|) for every r (sup norms, integer arithmetic).
inline bool continuation_triple(const GridSpec& g, const GridPoint& b1, const GridPoint& b2, const GridPoint& b3,
                                std::int64_t num, std::int64_t den) {
  std::array<__int128, kMaxDim> u{}, v{};
  __int128 nu = 0, nv = 0;
  for (int r = 0; r < g.d; ++r) {
    const auto i = static_cast<std::size_t>(r);
    u[i] = b2.c[i] - b1.c[i];
    v[i] = b3.c[i] - b2.c[i];
    nu = std::max(nu, u[i] < 0 ? -u[i] : u[i]);
    nv = std::max(nv, v[i] < 0 ? -v[i] : v[i]);
  }
  const __int128 rhs = static_cast<__int128>(num) * g.delta_units() * (nu + nv);
  for (int r = 0; r < g.d; ++r) {
    const auto ri = static_cast<std::size_t>(r);
    for (int q = 0; q < g.d; ++q) {
      const auto qi = static_cast<std::size_t>(q);
      __int128 w = u[ri] * v[qi] - v[ri] * u[qi];
      if (w < 0) w = -w;
      if (den * w > rhs) return false;
    }
  }
  return true;
}

inline bool beamlet_triple(const GridSpec& g, const GridPoint& b1, const GridPoint& b2, const GridPoint& b3) {
  return continuation_triple(g, b1, b2, b3, 1, 1);
}

inline bool beam_triple(const GridSpec& g, const GridPoint& b1, const GridPoint& b2, const GridPoint& b3) {
  return continuation_triple(g, b1, b2, b3, 11, 20);
}

namespace detail {

// Orders two segments sharing exactly one endpoint as (b1, b2, b3).
inline std::array<GridPoint, 3> chain_order(const Segment& A, const Segment& B) {
  const bool s11 = A.b1 == B.b1, s12 = A.b1 == B.b2, s21 = A.b2 == B.b1, s22 = A.b2 == B.b2;
  const int shared = s11 + s12 + s21 + s22;
  if (shared != 1 || A == B) throw ConfigError("good continuation: segments must share exactly one endpoint");
  if (s21) return {A.b1, A.b2, B.b2};
  if (s22) return {A.b1, A.b2, B.b1};
  if (s11) return {A.b2, A.b1, B.b2};
  return {A.b2, A.b1, B.b1};
}

}  // namespace detail

inline bool beamlet_good_continuation(const GridSpec& g, const Segment& A, const Segment& B) {
  const auto t = detail::chain_order(A, B);
  return beamlet_triple(g, t[0], t[1], t[2]);
}

inline bool beam_good_continuation(const GridSpec& g, const Segment& A, const Segment& B) {
  const auto t = detail::chain_order(A, B);
  return beam_triple(g, t[0], t[1], t[2]);
}

/// Sup-norm distance from x to the segment [a, b], minimized exactly over the
/// breakpoints of the coordinate envelope.
inline double sup_distance_to_segment(std::span<const double> x, std::span<const double> a, std::span<const double> b) {
  const std::size_t d = x.size();
  auto value = [&](double t) {
    double m = 0.0;
    for (std::size_t r = 0; r < d; ++r) m = std::max(m, std::fabs(x[r] - a[r] - t * (b[r] - a[r])));
    return m;
  };
  double best = std::min(value(0.0), value(1.0));
  // g_r(t) = c_r - t e_r; breakpoints where g_r = 0 or g_r = +-g_q
  std::array<double, kMaxDim> c{}, e{};
  for (std::size_t r = 0; r < d; ++r) {
    c[r] = x[r] - a[r];
    e[r] = b[r] - a[r];
  }
  auto consider = [&](double t) {
    if (t > 0.0 && t < 1.0 && std::isfinite(t)) best = std::min(best, value(t));
  };
  for (std::size_t r = 0; r < d; ++r) {
    if (e[r] != 0.0) consider(c[r] / e[r]);
    for (std::size_t q = r + 1; q < d; ++q) {
      if (e[r] != e[q]) consider((c[r] - c[q]) / (e[r] - e[q]));
      if (e[r] + e[q] != 0.0) consider((c[r] + c[q]) / (e[r] + e[q]));
    }
  }
  return best;
}

struct TubeRegion {
  std::vector<double> a, b;
  double radius = 0.0;

  bool contains(std::span<const double> x, double tol = 0.0) const {
    return sup_distance_to_segment(x, a, b) <= radius + tol;
  }
};

inline TubeRegion beamlet_tube(const GridSpec& g, const Segment& s) { return {to_real(g, s.b1), to_real(g, s.b2), g.delta()}; }
inline TubeRegion beam_tube(const GridSpec& g, const Segment& s) { return {to_real(g, s.b1), to_real(g, s.b2), g.delta()}; }

// ---------------------------------------------------------------------------
// Enumeration

/// Calls fn(segment) once per beamlet at scale (j, J). Each pair is emitted from
/// the lowest Delta-cube containing both endpoints.
inline std::int64_t enumerate_beamlets(const GridSpec& g, const std::function<void(const Segment&)>& fn,
                                       double guard = 1e8) {
  const std::int64_t n = g.Delta_units();
  const std::int64_t cells = std::int64_t{1} << g.j;
  // boundary points of one cube in local coordinates 0..n
  std::vector<GridPoint> local;
  {
    std::array<std::int64_t, kMaxDim> idx{};
    while (true) {
      bool boundary = false;
      for (int r = 0; r < g.d; ++r) boundary = boundary || idx[static_cast<std::size_t>(r)] == 0 || idx[static_cast<std::size_t>(r)] == n;
      if (boundary) {
        GridPoint p;
        p.c = idx;
        local.push_back(p);
      }
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
  }
  const double estimate = std::pow(static_cast<double>(cells), g.d) * 0.5 * static_cast<double>(local.size()) * static_cast<double>(local.size());
  if (estimate > guard) throw GuardError("enumerate_beamlets: enumeration exceeds guard");
  std::int64_t count = 0;
  std::array<std::int64_t, kMaxDim> cube{};
  while (true) {
    for (std::size_t x = 0; x < local.size(); ++x) {
      GridPoint a;
      for (int r = 0; r < g.d; ++r) a.c[static_cast<std::size_t>(r)] = cube[static_cast<std::size_t>(r)] * n + local[x].c[static_cast<std::size_t>(r)];
      for (std::size_t y = x + 1; y < local.size(); ++y) {
        GridPoint b;
        bool lowest = true;
        for (int r = 0; r < g.d && lowest; ++r) {
          const auto i = static_cast<std::size_t>(r);
          b.c[i] = cube[i] * n + local[y].c[i];
          lowest = detail::shared_cells(g, a.c[i], b.c[i]).first == cube[i];
        }
        if (!lowest) continue;
        ++count;
        if (fn) fn(Segment::make(a, b));
      }
    }
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
  return count;
}

inline std::vector<Segment> all_beamlets(const GridSpec& g, double guard = 1e8) {
  std::vector<Segment> out;
  enumerate_beamlets(g, [&](const Segment& s) { out.push_back(s); }, guard);
  return out;
}

/// Closed-form count for d = 2: per-cube pairs minus pairs on shared cube edges.
inline std::int64_t beamlet_count_2d(const GridSpec& g) {
  const std::int64_t n = g.Delta_units();
  const std::int64_t cells = std::int64_t{1} << g.j;
  const std::int64_t per_cube = (4 * n) * (4 * n - 1) / 2;
  const std::int64_t shared_edges = 2 * cells * (cells - 1);
  return cells * cells * per_cube - shared_edges * (n + 1) * n / 2;
}

/// All delta-gridpoints (coordinates multiples of delta, one on a Delta-hyperplane).
inline std::vector<GridPoint> beam_gridpoints(const GridSpec& g) {
  const std::int64_t q = g.delta_units();
  const std::int64_t steps = g.side() / q;
  std::vector<GridPoint> out;
  std::array<std::int64_t, kMaxDim> idx{};
  while (true) {
    GridPoint p;
    for (int r = 0; r < g.d; ++r) p.c[static_cast<std::size_t>(r)] = idx[static_cast<std::size_t>(r)] * q;
    if (is_gridpoint(g, p, q)) out.push_back(p);
    int r = 0;
    for (; r < g.d; ++r) {
      if (idx[static_cast<std::size_t>(r)] < steps) {
        ++idx[static_cast<std::size_t>(r)];
        break;
      }
      idx[static_cast<std::size_t>(r)] = 0;
    }
    if (r == g.d) break;
  }
  return out;
}

/// Calls fn(segment, kind) once per beam. Candidates for the second endpoint
/// are confined to the box of sup radius 2 Delta + delta around the first.
inline std::int64_t enumerate_beams(const GridSpec& g, const std::function<void(const Segment&, const BeamKind&)>& fn,
                                    double guard = 1e8) {
  g.require_beam_scale();
  const std::int64_t q = g.delta_units();
  const std::int64_t reach = (2 * g.Delta_units() + q) / q;
  const auto points = beam_gridpoints(g);
  const double estimate = static_cast<double>(points.size()) * std::pow(2.0 * static_cast<double>(reach) + 1.0, g.d);
  if (estimate > guard) throw GuardError("enumerate_beams: enumeration exceeds guard");
  std::int64_t count = 0;
  for (const auto& a : points) {
    std::array<std::int64_t, kMaxDim> off{};
    for (int r = 0; r < g.d; ++r) off[static_cast<std::size_t>(r)] = -reach;
    while (true) {
      GridPoint b = a;
      for (int r = 0; r < g.d; ++r) b.c[static_cast<std::size_t>(r)] += off[static_cast<std::size_t>(r)] * q;
      if (a < b) {
        if (const auto kind = classify_beam(g, a, b)) {
          ++count;
          if (fn) fn(Segment{a, b}, *kind);
        }
      }
      int r = 0;
      for (; r < g.d; ++r) {
        if (off[static_cast<std::size_t>(r)] < reach) {
          ++off[static_cast<std::size_t>(r)];
          break;
        }
        off[static_cast<std::size_t>(r)] = -reach;
      }
      if (r == g.d) break;
    }
  }
  return count;
}

inline std::vector<Segment> all_beams(const GridSpec& g, double guard = 1e8) {
  std::vector<Segment> out;
  enumerate_beams(g, [&](const Segment& s, const BeamKind&) { out.push_back(s); }, guard);
  return out;
}

/// Degree of every segment in the good-continuation graph over `segments`,
/// using the beam predicate when `beams` is true and the beamlet predicate otherwise.
inline std::vector<std::int64_t> continuation_degrees(const GridSpec& g, const std::vector<Segment>& segments, bool beams) {
  std::unordered_map<GridPoint, std::vector<std::size_t>, GridPointHash> incident;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    incident[segments[i].b1].push_back(i);
    incident[segments[i].b2].push_back(i);
  }
  std::vector<std::int64_t> degree(segments.size(), 0);
  for (const auto& [p, list] : incident) {
    for (std::size_t x = 0; x < list.size(); ++x) {
      const auto& A = segments[list[x]];
      const GridPoint& a_far = A.b1 == p ? A.b2 : A.b1;
      for (std::size_t y = x + 1; y < list.size(); ++y) {
        const auto& B = segments[list[y]];
        const GridPoint& b_far = B.b1 == p ? B.b2 : B.b1;
        if (a_far == b_far) continue;
        const bool ok = beams ? beam_triple(g, a_far, p, b_far) : beamlet_triple(g, a_far, p, b_far);
        if (ok) {
          ++degree[list[x]];
          ++degree[list[y]];
        }
      }
    }
  }
  return degree;
}

/// 2d 7^(d-1), the beam degree bound.
inline std::int64_t beam_degree_bound(int d) {
  std::int64_t out = 2 * d;
  for (int i = 1; i < d; ++i) out *= 7;
  return out;
}

}  // namespace gcnet
