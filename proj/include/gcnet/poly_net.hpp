#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gcnet/error.hpp"
#include "gcnet/rng.hpp"
#include "gcnet/smoothness.hpp"

namespace gcnet {

/// A quantized polynomial piece: cell index m (1-based) and one integer
/// coefficient vector per output coordinate, ordered by MultiIndexSet.
struct PolyNode {
  std::vector<int> cell;
  std::vector<std::vector<int>> coefs;

  friend bool operator==(const PolyNode&, const PolyNode&) = default;
  friend auto operator<=>(const PolyNode&, const PolyNode&) = default;
};

/// Network parameters: cells of side Delta = 1/cells_per_axis and value quantum delta.
class PolyNetworkSpec {
 public:
  /// delta = c1 beta Delta^alpha with Delta rounded down to the nearest 1/integer.
  static PolyNetworkSpec from_Delta(HolderParams params, double Delta) {
    if (!(Delta > 0.0) || Delta > 1.0) throw ConfigError("PolyNetworkSpec: Delta must lie in (0, 1]");
    const int cells = static_cast<int>(std::ceil(1.0 / Delta - 1e-9));
    PolyNetworkSpec spec(params, cells);
    spec.requested_Delta_ = Delta;
    return spec;
  }

  static PolyNetworkSpec from_cells(HolderParams params, int cells_per_axis) {
    return PolyNetworkSpec(params, cells_per_axis);
  }

  /// Explicit delta, decoupled from Delta (counting and test fixtures).
  static PolyNetworkSpec unlinked(HolderParams params, int cells_per_axis, double delta) {
    if (!(delta > 0.0)) throw ConfigError("PolyNetworkSpec: delta must be > 0");
    PolyNetworkSpec spec(params, cells_per_axis);
    spec.delta_ = delta;
    spec.finish();
    return spec;
  }

  /// Scale-indexed network: Delta = 2^-j, delta = 2^(j-J), coefficient bound a_J^(|s|+1).
  static PolyNetworkSpec scale_indexed(HolderParams params, int j, int J, ScaleSequence seq = {}) {
    if (j < 0 || j > J) throw ConfigError("PolyNetworkSpec: need 0 <= j <= J");
    PolyNetworkSpec spec(params, 1 << j);
    spec.delta_ = std::ldexp(1.0, j - J);
    const double a = seq.a_J(J);
    for (std::size_t o = 0; o < spec.bound_.size(); ++o) spec.bound_[o] = std::pow(a, static_cast<double>(o) + 1.0);
    spec.finish();
    return spec;
  }

  const HolderParams& params() const { return params_; }
  const DerivedConstants& constants() const { return constants_; }
  const MultiIndexSet& indices() const { return *indices_; }
  std::shared_ptr<const MultiIndexSet> indices_ptr() const { return indices_; }
  int k() const { return params_.k; }
  int codim() const { return params_.codim(); }
  int degree() const { return params_.degree(); }
  int cells_per_axis() const { return cells_; }
  double Delta() const { return 1.0 / cells_; }
  double requested_Delta() const { return requested_Delta_; }
  double delta() const { return delta_; }
  /// delta_o = Delta^-o delta.
  double quantum(int o) const { return quanta_[static_cast<std::size_t>(o)]; }
  /// Largest admissible |h^(s)| for |s| = o.
  int max_coef(int o) const { return max_coef_[static_cast<std::size_t>(o)]; }
  int coef_bound_for(std::size_t a) const { return max_coef(order((*indices_)[a])); }
  /// deg!, the common denominator of the neighbor predicate.
  std::int64_t scale_factor() const { return denom_; }
  std::int64_t weight(int t) const { return weights_[static_cast<std::size_t>(t)]; }

  std::int64_t cell_count() const {
    std::int64_t out = 1;
    for (int i = 0; i < params_.k; ++i) out *= cells_;
    return out;
  }

  std::vector<double> cell_center(std::span<const int> m) const {
    std::vector<double> out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = (m[i] - 0.5) * Delta();
    return out;
  }

  bool same_as(const PolyNetworkSpec& o) const {
    return params_.k == o.params_.k && params_.d == o.params_.d && params_.alpha == o.params_.alpha &&
           params_.beta == o.params_.beta && cells_ == o.cells_ && delta_ == o.delta_ && max_coef_ == o.max_coef_;
  }

 private:
  PolyNetworkSpec(HolderParams params, int cells) : params_(params), cells_(cells) {
    params_.validate();
    if (cells < 1) throw ConfigError("PolyNetworkSpec: need at least one cell per axis");
    constants_ = compute_constants(params_);
    indices_ = std::make_shared<const MultiIndexSet>(params_.k, params_.degree());
    requested_Delta_ = 1.0 / cells;
    delta_ = constants_.c1 * params_.beta * std::pow(1.0 / cells, params_.alpha);
    bound_.assign(static_cast<std::size_t>(params_.degree()) + 1, params_.beta);
    finish();
  }

  void finish() {
    const int deg = params_.degree();
    quanta_.resize(static_cast<std::size_t>(deg) + 1);
    max_coef_.resize(quanta_.size());
    for (int o = 0; o <= deg; ++o) {
      quanta_[static_cast<std::size_t>(o)] = std::pow(static_cast<double>(cells_), o) * delta_;
      max_coef_[static_cast<std::size_t>(o)] =
          static_cast<int>(std::floor(bound_[static_cast<std::size_t>(o)] / quanta_[static_cast<std::size_t>(o)] + 1e-9));
    }
    denom_ = 1;
    for (int t = 2; t <= deg; ++t) denom_ *= t;
    weights_.resize(static_cast<std::size_t>(deg) + 1);
    std::int64_t fact = 1;
    for (int t = 0; t <= deg; ++t) {
      if (t > 0) fact *= t;
      weights_[static_cast<std::size_t>(t)] = denom_ / fact;
    }
  }

  HolderParams params_;
  int cells_ = 1;
  double requested_Delta_ = 1.0;
  double delta_ = 0.0;
  DerivedConstants constants_;
  std::shared_ptr<const MultiIndexSet> indices_;
  std::vector<double> bound_;
  std::vector<double> quanta_;
  std::vector<int> max_coef_;
  std::int64_t denom_ = 1;
  std::vector<std::int64_t> weights_;
};

inline bool cell_contains(const PolyNetworkSpec& spec, std::span<const int> m, std::span<const double> x,
                          double tol = 0.0) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double lo = (m[i] - 1) * spec.Delta(), hi = m[i] * spec.Delta();
    if (x[i] < lo - tol || x[i] > hi + tol) return false;
  }
  return true;
}

/// p_{m,h}(x) for one coefficient vector, without the cell check.
inline double eval_coefs(const PolyNetworkSpec& spec, std::span<const int> m, std::span<const int> h,
                         std::span<const double> x) {
  const auto& set = spec.indices();
  double out = 0.0;
  for (std::size_t a = 0; a < set.size(); ++a) {
    if (h[a] == 0) continue;
    const auto& s = set[a];
    double term = h[a] * spec.quantum(order(s));
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == 0) continue;
      const double center = (m[i] - 0.5) * spec.Delta();
      term *= std::pow(x[i] - center, s[i]) / factorial(s[i]);
    }
    out += term;
  }
  return out;
}

inline std::vector<double> eval_piece(const PolyNetworkSpec& spec, const PolyNode& node, std::span<const double> x) {
  if (!cell_contains(spec, node.cell, x, 1e-12)) throw ConfigError("point not in cell");
  std::vector<double> out;
  out.reserve(node.coefs.size());
  for (const auto& h : node.coefs) out.push_back(eval_coefs(spec, node.cell, h, x));
  return out;
}

namespace detail {

// |D target^(s) - sum_t xi^t (D/t!) source^(s + t e_i)| < 3D for every s.
inline bool continuation_holds(const PolyNetworkSpec& spec, std::span<const int> source, std::span<const int> target,
                               int axis, int xi) {
  const auto& set = spec.indices();
  const std::int64_t D = spec.scale_factor();
  for (std::size_t a = 0; a < set.size(); ++a) {
    std::int64_t acc = D * target[a];
    for (int t = 0; t <= spec.degree(); ++t) {
      const int b = set.shifted(a, axis, t);
      if (b < 0) break;
      const std::int64_t sign = (t % 2 == 1 && xi < 0) ? -1 : 1;
      acc -= sign * spec.weight(t) * source[static_cast<std::size_t>(b)];
    }
    if (acc >= 3 * D || acc <= -3 * D) return false;
  }
  return true;
}

inline bool within_bounds(const PolyNetworkSpec& spec, std::span<const int> h) {
  for (std::size_t a = 0; a < h.size(); ++a)
    if (std::abs(h[a]) > spec.coef_bound_for(a)) return false;
  return true;
}

// Axis and sign with m_b = m_a + xi e_axis, or {-1, 0} when the cells are not adjacent.
inline std::pair<int, int> adjacency(std::span<const int> ma, std::span<const int> mb) {
  int axis = -1, xi = 0;
  for (std::size_t i = 0; i < ma.size(); ++i) {
    const int diff = mb[i] - ma[i];
    if (diff == 0) continue;
    if (axis >= 0 || std::abs(diff) != 1) return {-1, 0};
    axis = static_cast<int>(i);
    xi = diff;
  }
  return {axis, xi};
}

}  // namespace detail

/// Both strict inequalities of the discrete Taylor condition, for one coordinate.
inline bool coefs_are_neighbors(const PolyNetworkSpec& spec, std::span<const int> h, std::span<const int> hstar,
                                int axis, int xi) {
  return detail::continuation_holds(spec, h, hstar, axis, xi) && detail::continuation_holds(spec, hstar, h, axis, -xi);
}

inline bool are_neighbors(const PolyNetworkSpec& spec, const PolyNode& a, const PolyNode& b) {
  if (a.cell.size() != static_cast<std::size_t>(spec.k()) || b.cell.size() != a.cell.size() ||
      a.coefs.size() != b.coefs.size() || a.coefs.size() != static_cast<std::size_t>(spec.codim()))
    throw ConfigError("are_neighbors: nodes do not belong to this network");
  const auto [axis, xi] = detail::adjacency(a.cell, b.cell);
  if (axis < 0) return false;
  for (std::size_t r = 0; r < a.coefs.size(); ++r)
    if (!coefs_are_neighbors(spec, a.coefs[r], b.coefs[r], axis, xi)) return false;
  return true;
}

inline bool are_neighbors(const PolyNetworkSpec& sa, const PolyNode& a, const PolyNetworkSpec& sb, const PolyNode& b) {
  if (!sa.same_as(sb)) throw ConfigError("are_neighbors: nodes come from different networks");
  return are_neighbors(sa, a, b);
}

/// Coefficient vectors h* (one coordinate) across the step m -> m + xi e_axis that
/// pass both inequalities and the coefficient bound.
inline std::vector<std::vector<int>> continuation_candidates(const PolyNetworkSpec& spec, std::span<const int> h,
                                                             int axis, int xi) {
  const auto& set = spec.indices();
  const std::int64_t D = spec.scale_factor();
  // Per entry: integers v with |D v - T| < 3D, T = sum_t xi^t (D/t!) h^(s + t e_i).
  std::vector<std::vector<int>> options(set.size());
  for (std::size_t a = 0; a < set.size(); ++a) {
    std::int64_t T = 0;
    for (int t = 0; t <= spec.degree(); ++t) {
      const int b = set.shifted(a, axis, t);
      if (b < 0) break;
      const std::int64_t sign = (t % 2 == 1 && xi < 0) ? -1 : 1;
      T += sign * spec.weight(t) * h[static_cast<std::size_t>(b)];
    }
    const int bound = spec.coef_bound_for(a);
    const auto lo = static_cast<int>(std::floor(static_cast<double>(T - 3 * D) / D)) ;
    for (int v = lo; v <= lo + 7; ++v) {
      const std::int64_t diff = D * v - T;
      if (diff < 3 * D && diff > -3 * D && std::abs(v) <= bound) options[a].push_back(v);
    }
    if (options[a].empty()) return {};
  }
  std::vector<std::vector<int>> out;
  std::vector<int> cur(set.size());
  std::function<void(std::size_t)> rec = [&](std::size_t a) {
    if (a == set.size()) {
      if (detail::continuation_holds(spec, cur, h, axis, -xi)) out.push_back(cur);
      return;
    }
    for (int v : options[a]) {
      cur[a] = v;
      rec(a + 1);
    }
  };
  rec(0);
  return out;
}

/// Every node adjacent to `node` in the network, generated on demand.
inline std::vector<PolyNode> neighbors(const PolyNetworkSpec& spec, const PolyNode& node) {
  std::vector<PolyNode> out;
  for (int axis = 0; axis < spec.k(); ++axis) {
    for (int xi : {-1, 1}) {
      const int target = node.cell[static_cast<std::size_t>(axis)] + xi;
      if (target < 1 || target > spec.cells_per_axis()) continue;
      std::vector<std::vector<std::vector<int>>> per_coord;
      bool empty = false;
      for (const auto& h : node.coefs) {
        per_coord.push_back(continuation_candidates(spec, h, axis, xi));
        if (per_coord.back().empty()) empty = true;
      }
      if (empty) continue;
      PolyNode nb;
      nb.cell = node.cell;
      nb.cell[static_cast<std::size_t>(axis)] = target;
      nb.coefs.resize(per_coord.size());
      std::function<void(std::size_t)> rec = [&](std::size_t r) {
        if (r == per_coord.size()) {
          out.push_back(nb);
          return;
        }
        for (const auto& c : per_coord[r]) {
          nb.coefs[r] = c;
          rec(r + 1);
        }
      };
      rec(0);
    }
  }
  return out;
}

/// 2k 6^(codim c3), the degree bound of the network.
inline double degree_bound(const PolyNetworkSpec& spec) {
  return 2.0 * spec.k() * std::pow(6.0, spec.codim() * spec.constants().c3);
}

/// Number of admissible coefficient vectors for one coordinate.
inline std::int64_t coefficient_choices(const PolyNetworkSpec& spec) {
  std::int64_t out = 1;
  for (std::size_t a = 0; a < spec.indices().size(); ++a) out *= 2 * static_cast<std::int64_t>(spec.coef_bound_for(a)) + 1;
  return out;
}

/// Exact node count Delta^-k (prod_s (2 floor(bound/delta_|s|) + 1))^codim.
inline std::int64_t count_nodes(const PolyNetworkSpec& spec, double guard = 1e9) {
  long double total = static_cast<long double>(spec.cell_count());
  const long double per = static_cast<long double>(coefficient_choices(spec));
  for (int r = 0; r < spec.codim(); ++r) total *= per;
  if (total >= guard) throw GuardError("count_nodes: node count exceeds guard");
  std::int64_t out = spec.cell_count();
  for (int r = 0; r < spec.codim(); ++r) out *= coefficient_choices(spec);
  return out;
}

/// Calls fn(h) for every admissible coefficient vector of one coordinate.
inline void for_each_coefficient(const PolyNetworkSpec& spec, const std::function<void(const std::vector<int>&)>& fn) {
  const std::size_t n = spec.indices().size();
  std::vector<int> h(n);
  for (std::size_t a = 0; a < n; ++a) h[a] = -spec.coef_bound_for(a);
  while (true) {
    fn(h);
    std::size_t a = 0;
    for (; a < n; ++a) {
      if (h[a] < spec.coef_bound_for(a)) {
        ++h[a];
        break;
      }
      h[a] = -spec.coef_bound_for(a);
    }
    if (a == n) return;
  }
}

inline std::vector<std::vector<int>> all_coefficients(const PolyNetworkSpec& spec) {
  std::vector<std::vector<int>> out;
  for_each_coefficient(spec, [&](const std::vector<int>& h) { out.push_back(h); });
  return out;
}

/// Boustrophedon order over {1..M}^k: axis 1 fastest, each axis reversed when
/// the partial sum of (m_l - 1) over higher axes is odd.
inline std::vector<std::vector<int>> zigzag_order(int k, int cells_per_axis) {
  if (k < 1 || cells_per_axis < 1) throw ConfigError("zigzag_order: need k >= 1 and at least one cell");
  const int M = cells_per_axis;
  std::int64_t total = 1;
  for (int i = 0; i < k; ++i) total *= M;
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<std::size_t>(total));
  std::vector<int> digits(static_cast<std::size_t>(k));
  for (std::int64_t n = 0; n < total; ++n) {
    std::int64_t rest = n;
    for (int i = 0; i < k; ++i) {
      digits[static_cast<std::size_t>(i)] = static_cast<int>(rest % M);
      rest /= M;
    }
    std::vector<int> m(static_cast<std::size_t>(k));
    int parity = 0;
    for (int i = k - 1; i >= 0; --i) {
      const int dgt = digits[static_cast<std::size_t>(i)];
      m[static_cast<std::size_t>(i)] = (parity % 2 == 0) ? dgt + 1 : M - dgt;
      parity += m[static_cast<std::size_t>(i)] - 1;
    }
    out.push_back(std::move(m));
  }
  return out;
}

inline std::vector<std::vector<int>> zigzag_order(const PolyNetworkSpec& spec) {
  return zigzag_order(spec.k(), spec.cells_per_axis());
}

/// Nearest-integer quantization of the derivatives at each cell center,
/// returned in zig-zag order. Ties round half to even; values that round past
/// the coefficient bound are clamped to it.
inline std::vector<PolyNode> quantize_function(const FunctionOracle& f, const PolyNetworkSpec& spec,
                                               double tol = 1e-9) {
  const auto& p = f.params();
  if (p.k != spec.k() || p.codim() != spec.codim()) throw ConfigError("quantize_function: oracle dimensions differ from network");
  const auto& set = spec.indices();
  std::vector<PolyNode> out;
  for (const auto& m : zigzag_order(spec)) {
    const auto x = spec.cell_center(m);
    PolyNode node{m, {}};
    for (int r = 0; r < spec.codim(); ++r) {
      std::vector<int> h(set.size());
      for (std::size_t a = 0; a < set.size(); ++a) {
        const double v = f.derivative(r, x, set[a]);
        if (!std::isfinite(v) || std::fabs(v) > p.beta + tol) {
          std::string where;
          for (int mi : m) where += (where.empty() ? "" : ",") + std::to_string(mi);
          throw ConfigError("quantize_function: oracle violates derivative bound at cell (" + where + ")");
        }
        const int bound = spec.coef_bound_for(a);
        const double q = std::nearbyint(v / spec.quantum(order(set[a])));
        h[a] = static_cast<int>(std::clamp(q, -static_cast<double>(bound), static_cast<double>(bound)));
      }
      node.coefs.push_back(std::move(h));
    }
    out.push_back(std::move(node));
  }
  return out;
}

struct QuantizationAudit {
  std::size_t adjacent_pairs = 0;
  std::size_t failing_pairs = 0;
  bool ok() const { return failing_pairs == 0; }
};

/// Checks are_neighbors on every pair of grid-adjacent cells of a quantization.
inline QuantizationAudit audit_quantization(const PolyNetworkSpec& spec, const std::vector<PolyNode>& nodes) {
  const int M = spec.cells_per_axis();
  std::vector<const PolyNode*> by_cell(nodes.size(), nullptr);
  auto linear = [&](const std::vector<int>& m) {
    std::int64_t idx = 0;
    for (int i = spec.k() - 1; i >= 0; --i) idx = idx * M + (m[static_cast<std::size_t>(i)] - 1);
    return static_cast<std::size_t>(idx);
  };
  for (const auto& n : nodes) by_cell.at(linear(n.cell)) = &n;
  QuantizationAudit audit;
  for (const auto& n : nodes) {
    for (int axis = 0; axis < spec.k(); ++axis) {
      if (n.cell[static_cast<std::size_t>(axis)] == M) continue;
      auto m = n.cell;
      ++m[static_cast<std::size_t>(axis)];
      const PolyNode* other = by_cell[linear(m)];
      if (other == nullptr) continue;
      ++audit.adjacent_pairs;
      if (!are_neighbors(spec, n, *other)) ++audit.failing_pairs;
    }
  }
  return audit;
}

/// Slab region around a piece, half-thickness multiplier * delta.
struct SlabRegion {
  PolyNode node;
  double multiplier = 0.0;
};

/// Largest residual max_r |z_r - p_r(x)| at a point of [0,1]^d, or +inf outside the cell.
inline double region_residual(const PolyNetworkSpec& spec, const PolyNode& node, std::span<const double> point) {
  const auto x = point.subspan(0, static_cast<std::size_t>(spec.k()));
  if (!cell_contains(spec, node.cell, x)) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t r = 0; r < node.coefs.size(); ++r) {
    const double z = point[static_cast<std::size_t>(spec.k()) + r];
    worst = std::max(worst, std::fabs(z - eval_coefs(spec, node.cell, node.coefs[r], x)));
  }
  return worst;
}

inline bool region_contains(const PolyNetworkSpec& spec, const SlabRegion& region, std::span<const double> point) {
  return region_residual(spec, region.node, point) <= region.multiplier * spec.delta();
}

/// Delta^k (2 multiplier delta)^codim, the volume of an unclipped slab.
inline double slab_volume(const PolyNetworkSpec& spec, double multiplier) {
  return std::pow(spec.Delta(), spec.k()) * std::pow(2.0 * multiplier * spec.delta(), spec.codim());
}

struct CoveringReport {
  bool covered = true;
  std::size_t samples = 0;
  std::size_t violations = 0;
  double min_margin = std::numeric_limits<double>::infinity();  // multiplier delta - residual
  double max_residual = 0.0;
  double slack = 0.0;  // c1 beta (Delta/64)^alpha, modulus-of-continuity slack of the lattice
  bool certified() const { return covered && min_margin >= slack; }
};

/// Samples graph(f) on a lattice of spacing Delta/64 per axis and checks that
/// each sample lies in the region of one of the nodes whose cell contains it.
inline CoveringReport covering_check(const FunctionOracle& f, const PolyNetworkSpec& spec,
                                     const std::vector<PolyNode>& nodes, double multiplier) {
  const int k = spec.k();
  const int M = spec.cells_per_axis();
  const int per_axis = 64 * M;
  std::vector<const PolyNode*> by_cell(static_cast<std::size_t>(spec.cell_count()), nullptr);
  for (const auto& n : nodes) {
    std::int64_t idx = 0;
    for (int i = k - 1; i >= 0; --i) idx = idx * M + (n.cell[static_cast<std::size_t>(i)] - 1);
    by_cell.at(static_cast<std::size_t>(idx)) = &n;
  }
  CoveringReport rep;
  rep.slack = spec.constants().c1 * spec.params().beta * std::pow(spec.Delta() / 64.0, spec.params().alpha);
  const double thr = multiplier * spec.delta();
  std::vector<int> lattice(static_cast<std::size_t>(k), 0);
  std::vector<double> x(static_cast<std::size_t>(k));
  std::vector<double> z(static_cast<std::size_t>(spec.codim()));
  while (true) {
    for (int i = 0; i < k; ++i) x[static_cast<std::size_t>(i)] = static_cast<double>(lattice[static_cast<std::size_t>(i)]) / per_axis;
    for (int r = 0; r < spec.codim(); ++r) z[static_cast<std::size_t>(r)] = f.value(r, x);
    // cells containing x: lattice points on a face belong to both neighbors
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> lo(static_cast<std::size_t>(k)), hi(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      const int li = lattice[static_cast<std::size_t>(i)];
      const int c = li / 64;
      const bool on_face = li % 64 == 0;
      lo[static_cast<std::size_t>(i)] = on_face ? std::max(c, 1) : c + 1;
      hi[static_cast<std::size_t>(i)] = on_face ? std::min(c + 1, M) : c + 1;
    }
    std::vector<int> m = lo;
    while (true) {
      std::int64_t idx = 0;
      for (int i = k - 1; i >= 0; --i) idx = idx * M + (m[static_cast<std::size_t>(i)] - 1);
      if (const PolyNode* node = by_cell[static_cast<std::size_t>(idx)]) {
        double worst = 0.0;
        for (std::size_t r = 0; r < node->coefs.size(); ++r)
          worst = std::max(worst, std::fabs(z[r] - eval_coefs(spec, node->cell, node->coefs[r], x)));
        best = std::min(best, worst);
      }
      int i = 0;
      for (; i < k; ++i) {
        if (m[static_cast<std::size_t>(i)] < hi[static_cast<std::size_t>(i)]) {
          ++m[static_cast<std::size_t>(i)];
          break;
        }
        m[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)];
      }
      if (i == k) break;
    }
    ++rep.samples;
    if (std::isfinite(best)) rep.max_residual = std::max(rep.max_residual, best);
    rep.min_margin = std::min(rep.min_margin, thr - best);
    if (!(best <= thr)) {
      ++rep.violations;
      rep.covered = false;
    }
    int i = 0;
    for (; i < k; ++i) {
      if (lattice[static_cast<std::size_t>(i)] < per_axis) {
        ++lattice[static_cast<std::size_t>(i)];
        break;
      }
      lattice[static_cast<std::size_t>(i)] = 0;
    }
    if (i == k) break;
  }
  return rep;
}

/// Per-cell bound (c1/2^alpha) beta Delta^alpha + (c2/2) delta on |f - p|.
inline double local_error_bound(const PolyNetworkSpec& spec) {
  const auto& c = spec.constants();
  const auto& p = spec.params();
  return c.c1 / std::pow(2.0, p.alpha) * p.beta * std::pow(spec.Delta(), p.alpha) + 0.5 * c.c2 * spec.delta();
}

struct LocalApproxReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double max_residual = 0.0;
  double bound = 0.0;
};

/// Random samples per cell of |f - p_{m,h(m,f)}| against the local error bound.
inline LocalApproxReport local_approximation_check(const FunctionOracle& f, const PolyNetworkSpec& spec,
                                                   const std::vector<PolyNode>& nodes, std::size_t per_cell,
                                                   std::uint64_t seed, double tol = 1e-12) {
  LocalApproxReport rep;
  rep.bound = local_error_bound(spec);
  Rng rng(seed);
  std::vector<double> x(static_cast<std::size_t>(spec.k()));
  for (const auto& node : nodes) {
    for (std::size_t n = 0; n < per_cell; ++n) {
      for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = (node.cell[i] - 1 + rng.uniform()) * spec.Delta();
      for (std::size_t r = 0; r < node.coefs.size(); ++r) {
        const double res = std::fabs(f.value(static_cast<int>(r), x) - eval_coefs(spec, node.cell, node.coefs[r], x));
        rep.max_residual = std::max(rep.max_residual, res);
        if (res > rep.bound + tol) ++rep.violations;
      }
      ++rep.samples;
    }
  }
  return rep;
}

}  // namespace gcnet
