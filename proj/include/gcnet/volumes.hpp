#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gcnet/beam_net.hpp"
#include "gcnet/data.hpp"
#include "gcnet/error.hpp"
#include "gcnet/graph_stats.hpp"
#include "gcnet/rng.hpp"

namespace gcnet {

/// Intensity at a point given in voxel units. On a voxel face, edge or corner
/// the value is the mean of the voxels whose closed box contains the point.
inline double point_intensity(const PixelVolume& vol, std::span<const double> x) {
  const int d = vol.dim();
  std::array<std::array<int, 2>, kMaxDim> cand{};
  std::array<int, kMaxDim> count{};
  for (int a = 0; a < d; ++a) {
    const int N = vol.dims[static_cast<std::size_t>(a)];
    const double v = x[static_cast<std::size_t>(a)];
    const double f = std::floor(v);
    int c = 0;
    if (f == v) {
      const int i = static_cast<int>(f);
      if (i - 1 >= 0 && i - 1 < N) cand[static_cast<std::size_t>(a)][static_cast<std::size_t>(c++)] = i - 1;
      if (i >= 0 && i < N) cand[static_cast<std::size_t>(a)][static_cast<std::size_t>(c++)] = i;
    } else {
      const int i = static_cast<int>(f);
      if (i >= 0 && i < N) cand[static_cast<std::size_t>(a)][static_cast<std::size_t>(c++)] = i;
    }
    if (c == 0) return 0.0;
    count[static_cast<std::size_t>(a)] = c;
  }
  std::array<int, kMaxDim> pos{};
  std::vector<int> idx(static_cast<std::size_t>(d));
  double sum = 0.0;
  int terms = 0;
  while (true) {
    for (int a = 0; a < d; ++a) idx[static_cast<std::size_t>(a)] = cand[static_cast<std::size_t>(a)][static_cast<std::size_t>(pos[static_cast<std::size_t>(a)])];
    sum += vol.at(idx);
    ++terms;
    int a = 0;
    for (; a < d; ++a) {
      if (++pos[static_cast<std::size_t>(a)] < count[static_cast<std::size_t>(a)]) break;
      pos[static_cast<std::size_t>(a)] = 0;
    }
    if (a == d) break;
  }
  return sum / terms;
}

namespace detail {

// Neumaier compensated sum.
struct CompensatedSum {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    comp += std::fabs(sum) >= std::fabs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace detail

/// Exact line integral of the piecewise-constant intensity along [a, b], with
/// endpoints in voxel units (delta0 = one voxel) and length measured in [0,1]^d.
inline double line_integral(const PixelVolume& vol, const GridPoint& a, const GridPoint& b) {
  const int d = vol.dim();
  const double N = vol.dims[0];
  std::vector<std::pair<double, int>> events;  // (t, axis)
  std::array<std::int64_t, kMaxDim> diff{};
  double len2 = 0.0;
  for (int r = 0; r < d; ++r) {
    const auto i = static_cast<std::size_t>(r);
    diff[i] = b.c[i] - a.c[i];
    len2 += static_cast<double>(diff[i]) * static_cast<double>(diff[i]);
    const std::int64_t steps = diff[i] < 0 ? -diff[i] : diff[i];
    for (std::int64_t q = 1; q < steps; ++q) events.emplace_back(static_cast<double>(q) / static_cast<double>(steps), r);
  }
  const double length = std::sqrt(len2) / N;
  if (!(length > 0.0)) return 0.0;
  std::sort(events.begin(), events.end());
  // Voxel index per moving axis; fixed axes sit on a voxel face and use the face mean.
  std::array<std::int64_t, kMaxDim> cell{};
  for (int r = 0; r < d; ++r) {
    const auto i = static_cast<std::size_t>(r);
    cell[i] = diff[i] > 0 ? a.c[i] : a.c[i] - 1;
  }
  std::vector<double> probe(static_cast<std::size_t>(d));
  detail::CompensatedSum acc;
  double t0 = 0.0;
  std::size_t e = 0;
  while (true) {
    const double t1 = e < events.size() ? events[e].first : 1.0;
    if (t1 > t0) {
      for (int r = 0; r < d; ++r) {
        const auto i = static_cast<std::size_t>(r);
        probe[i] = diff[i] == 0 ? static_cast<double>(a.c[i]) : static_cast<double>(cell[i]) + 0.5;
      }
      acc.add((t1 - t0) * length * point_intensity(vol, probe));
    }
    if (e >= events.size()) break;
    while (e < events.size() && events[e].first == t1) {
      const auto i = static_cast<std::size_t>(events[e].second);
      cell[i] += diff[i] > 0 ? 1 : -1;
      ++e;
    }
    t0 = t1;
  }
  return acc.value();
}

/// Beamlet coefficients at one scale; beamlets in enumeration order.
struct CoefficientTable {
  GridSpec grid;
  std::vector<Segment> beamlets;
  std::vector<double> coef;

  std::size_t size() const { return coef.size(); }
  double max() const { return coef.empty() ? -std::numeric_limits<double>::infinity() : *std::max_element(coef.begin(), coef.end()); }
  double min() const { return coef.empty() ? std::numeric_limits<double>::infinity() : *std::min_element(coef.begin(), coef.end()); }
};

inline CoefficientTable beamlet_transform(const PixelVolume& vol, int j, double guard = 5e7) {
  vol.validate();
  const int J = vol.side_log2();
  if (vol.dim() < 2 || vol.dim() > 3) throw ConfigError("beamlet_transform: volumes must be 2D or 3D");
  if (j < 0 || j > J) throw ConfigError("beamlet_transform: scale j must lie in [0, log2(side)]");
  CoefficientTable table;
  table.grid = GridSpec(vol.dim(), j, J);
  enumerate_beamlets(
      table.grid,
      [&](const Segment& s) {
        table.beamlets.push_back(s);
        table.coef.push_back(line_integral(vol, s.b1, s.b2));
      },
      guard);
  return table;
}

inline double euclidean_length(const GridSpec& g, const Segment& s) {
  double sq = 0.0;
  for (int r = 0; r < g.d; ++r) {
    const double v = static_cast<double>(s.b2.c[static_cast<std::size_t>(r)] - s.b1.c[static_cast<std::size_t>(r)]);
    sq += v * v;
  }
  return std::sqrt(sq) * g.delta0();
}

/// Beamlets that advance along axis 1.
inline bool is_forward(const Segment& s) { return s.b2.c[0] > s.b1.c[0]; }

/// Good-continuation network on the beamlets with coefficient > t.
/// In DAG mode only forward beamlets are kept and edges run head-to-tail.
struct GCN {
  GridSpec grid;
  bool dag = true;
  std::vector<Segment> vertices;
  std::vector<double> weights;
  std::vector<std::size_t> source;  // index into the coefficient table
  Graph graph;

  std::size_t node_count() const { return vertices.size(); }
  std::size_t edge_count() const { return graph.edge_count(); }
};

namespace detail {

inline std::uint64_t pack_point(const GridPoint& p) {
  return static_cast<std::uint64_t>(p.c[0]) | (static_cast<std::uint64_t>(p.c[1]) << 21) |
         (static_cast<std::uint64_t>(p.c[2]) << 42);
}

// Incremental builder: vertices are added one at a time and edges to already-present vertices are found
// through the endpoint index.
class GcnBuilder {
 public:
  GcnBuilder(const GridSpec& g, bool dag) : g_(g), dag_(dag) {}

  void add(const Segment& s) {
    const auto id = static_cast<std::uint32_t>(segs_.size());
    segs_.push_back(s);
    auto& at1 = index_[pack_point(s.b1)];
    auto& at2 = index_[pack_point(s.b2)];
    for (const auto* bucket : {&at1, &at2}) {
      for (auto other : *bucket) {
        const Segment& o = segs_[other];
        if (dag_) {
          if (o.b2 == s.b1 && beamlet_good_continuation(g_, o, s)) edges_.emplace_back(other, id);
          else if (s.b2 == o.b1 && beamlet_good_continuation(g_, s, o)) edges_.emplace_back(id, other);
        } else if (beamlet_good_continuation(g_, o, s)) {
          edges_.emplace_back(other, id);
        }
      }
    }
    at1.push_back(id);
    at2.push_back(id);
  }

  std::size_t nodes() const { return segs_.size(); }
  std::size_t edges() const { return edges_.size(); }
  const std::vector<Segment>& segments() const { return segs_; }
  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edge_list() const { return edges_; }

 private:
  GridSpec g_;
  bool dag_;
  std::vector<Segment> segs_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> index_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges_;
};

}  // namespace detail

inline GCN threshold_and_build(const CoefficientTable& table, double t, bool dag_mode) {
  GCN out;
  out.grid = table.grid;
  out.dag = dag_mode;
  detail::GcnBuilder builder(table.grid, dag_mode);
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!(table.coef[i] > t)) continue;
    if (dag_mode && !is_forward(table.beamlets[i])) continue;
    builder.add(table.beamlets[i]);
    out.weights.push_back(table.coef[i]);
    out.source.push_back(i);
  }
  out.vertices = builder.segments();
  out.graph = Graph::make(out.vertices.size(), builder.edge_list(), dag_mode);
  return out;
}

/// Threshold giving (about) the top `count` admissible beamlets.
inline double threshold_for_count(const CoefficientTable& table, std::size_t count, bool dag_mode) {
  std::vector<double> c;
  for (std::size_t i = 0; i < table.size(); ++i)
    if (!dag_mode || is_forward(table.beamlets[i])) c.push_back(table.coef[i]);
  if (c.empty() || count == 0) return std::numeric_limits<double>::infinity();
  if (count >= c.size()) return -std::numeric_limits<double>::infinity();
  std::nth_element(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(count), c.end(), std::greater<>());
  return c[count];
}

/// `count` thresholds at evenly spaced quantiles in [lo, hi] of the coefficient distribution, descending.
inline std::vector<double> quantile_thresholds(const CoefficientTable& table, std::size_t count = 64, double lo = 0.9,
                                               double hi = 0.999) {
  if (table.size() == 0 || count == 0) return {};
  if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi)) throw ConfigError("quantile_thresholds: need 0 <= lo <= hi <= 1");
  std::vector<double> c = table.coef;
  std::sort(c.begin(), c.end());
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double q = count == 1 ? hi : hi - (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    const double pos = q * static_cast<double>(c.size() - 1);
    out.push_back(c[static_cast<std::size_t>(std::llround(pos))]);
  }
  return out;
}

struct NodeEdgePoint {
  double threshold = 0.0;
  std::size_t nodes = 0;
  std::size_t edges = 0;
};

/// (|V(t)|, |E(t)|) for thresholds sorted descending; vertices are added in
/// coefficient order so each threshold costs only its new vertices.
inline std::vector<NodeEdgePoint> edges_vs_nodes(const CoefficientTable& table, std::vector<double> thresholds,
                                                 bool dag_mode = true) {
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < table.size(); ++i)
    if (!dag_mode || is_forward(table.beamlets[i])) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return table.coef[a] > table.coef[b]; });
  detail::GcnBuilder builder(table.grid, dag_mode);
  std::vector<NodeEdgePoint> out;
  std::size_t next = 0;
  for (double t : thresholds) {
    while (next < order.size() && table.coef[order[next]] > t) builder.add(table.beamlets[order[next++]]);
    out.push_back({t, builder.nodes(), builder.edges()});
  }
  return out;
}

inline std::vector<NodeEdgePoint> edges_vs_nodes(const PixelVolume& vol, int j, std::vector<double> thresholds,
                                                 bool dag_mode = true) {
  return edges_vs_nodes(beamlet_transform(vol, j), std::move(thresholds), dag_mode);
}

/// Edge counts of the GCN on the top-c admissible beamlets, for each requested c (ascending in the output).
inline std::vector<NodeEdgePoint> edges_at_node_counts(const CoefficientTable& table, std::vector<std::size_t> counts,
                                                       bool dag_mode = true) {
  std::sort(counts.begin(), counts.end());
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < table.size(); ++i)
    if (!dag_mode || is_forward(table.beamlets[i])) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return table.coef[a] > table.coef[b]; });
  detail::GcnBuilder builder(table.grid, dag_mode);
  std::vector<NodeEdgePoint> out;
  std::size_t next = 0;
  for (auto c : counts) {
    while (next < c && next < order.size()) builder.add(table.beamlets[order[next++]]);
    const double t = next == 0 ? std::numeric_limits<double>::infinity() : table.coef[order[next - 1]];
    out.push_back({t, builder.nodes(), builder.edges()});
  }
  return out;
}

inline std::vector<double> betweenness(const GCN& gcn, PathMode mode = PathMode::Longest) {
  return betweenness(gcn.graph, mode);
}

inline PathDecomposition lwp_decomposition(const GCN& gcn) { return lwp_decomposition(gcn.graph, gcn.weights); }

/// S_j(t) = log(1 + N_j(t)) / log(1 + N_j).
inline double lsi(const CoefficientTable& table, double t) {
  if (table.size() == 0) throw ConfigError("lsi: no coefficients");
  std::size_t above = 0;
  for (double c : table.coef) above += c > t;
  return std::log1p(static_cast<double>(above)) / std::log1p(static_cast<double>(table.size()));
}

inline std::vector<double> lsi_curve(const CoefficientTable& table, const std::vector<double>& thresholds) {
  std::vector<double> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) out.push_back(lsi(table, t));
  return out;
}

/// I.i.d. Gaussian pixel noise rescaled to the l2 energy of `vol`.
inline PixelVolume energy_matched_noise(const PixelVolume& vol, std::uint64_t seed) {
  PixelVolume out = PixelVolume::zeros(vol.dims);
  Rng rng(seed);
  double e_in = 0.0, e_out = 0.0;
  for (std::size_t i = 0; i < vol.size(); ++i) {
    out.data[i] = rng.normal();
    e_in += vol.data[i] * vol.data[i];
    e_out += out.data[i] * out.data[i];
  }
  const double scale = e_out > 0.0 ? std::sqrt(e_in / e_out) : 0.0;
  for (double& v : out.data) v *= scale;
  return out;
}

/// Transform, threshold and decompose in one call (DAG mode).
struct PathPipeline {
  int j = 3;
  double vertex_threshold = 0.0;
};

inline PathDecomposition decompose_volume(const PixelVolume& vol, const PathPipeline& p) {
  return lwp_decomposition(threshold_and_build(beamlet_transform(vol, p.j), p.vertex_threshold, true));
}

/// R(t) from the two volumes through the same pipeline.
inline double fsr(const PixelVolume& vol, const PixelVolume& reference, const PathPipeline& p, double t, double eps) {
  if (!vol.same_shape(reference)) throw ConfigError("fsr: volumes differ in shape");
  return fsr(decompose_volume(vol, p), decompose_volume(reference, p), t, eps);
}

struct FsrCurve {
  double vertex_threshold = 0.0;
  std::size_t image_paths = 0, reference_paths = 0;
  std::vector<double> t, ratio;

  double max_ratio() const { return ratio.empty() ? 0.0 : *std::max_element(ratio.begin(), ratio.end()); }
};

/// R(t) on `grid` thresholds at the mid-bin quantiles of the pooled path weights. Both volumes share one
/// vertex threshold: the one keeping the top `vertex_count` forward beamlets of the image.
inline FsrCurve fsr_curve(const PixelVolume& vol, const PixelVolume& reference, int j, std::size_t vertex_count,
                          double eps, std::size_t grid = 64) {
  if (!vol.same_shape(reference)) throw ConfigError("fsr_curve: volumes differ in shape");
  if (grid == 0) throw ConfigError("fsr_curve: empty threshold grid");
  const auto ti = beamlet_transform(vol, j), tr = beamlet_transform(reference, j);
  FsrCurve c;
  c.vertex_threshold = threshold_for_count(ti, vertex_count, true);
  const auto di = lwp_decomposition(threshold_and_build(ti, c.vertex_threshold, true));
  const auto dr = lwp_decomposition(threshold_and_build(tr, c.vertex_threshold, true));
  c.image_paths = di.size();
  c.reference_paths = dr.size();
  if (di.empty() || dr.empty()) throw ConfigError("fsr_curve: a decomposition is empty; lower the vertex threshold");
  std::vector<double> w;
  for (const auto& p : di) w.push_back(p.weight);
  for (const auto& p : dr) w.push_back(p.weight);
  std::sort(w.begin(), w.end());
  for (std::size_t i = 0; i < grid; ++i) {
    const double q = (static_cast<double>(i) + 0.5) / static_cast<double>(grid);
    const double t = w[static_cast<std::size_t>(q * static_cast<double>(w.size() - 1))];
    c.t.push_back(t);
    c.ratio.push_back(fsr(di, dr, t, eps));
  }
  return c;
}

}  // namespace gcnet
