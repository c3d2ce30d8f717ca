#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "gcnet/synth.hpp"
#include "gcnet/volumes.hpp"
#include "oracles.hpp"

using namespace gcnet;
using namespace gcnet::oracle;

namespace {

PixelVolume random_volume(std::vector<int> dims, Rng& rng, double lo = -1.0, double hi = 1.0) {
  auto v = PixelVolume::zeros(std::move(dims));
  for (double& x : v.data) x = rng.uniform(lo, hi);
  return v;
}

double voxel_length(const Segment& s, int d) {
  double l = 0.0;
  for (int r = 0; r < d; ++r) {
    const double dr = static_cast<double>(s.b2.c[static_cast<std::size_t>(r)] - s.b1.c[static_cast<std::size_t>(r)]);
    l += dr * dr;
  }
  return std::sqrt(l);
}

// Length of segment [a, b] inside the closed box [lo, lo + 1]^2 (voxel units), by parametric clipping.
double clipped_length_2d(const Segment& s, const std::array<int, 2>& lo) {
  double t0 = 0.0, t1 = 1.0;
  for (int r = 0; r < 2; ++r) {
    const auto i = static_cast<std::size_t>(r);
    const double p = static_cast<double>(s.b1.c[i]), q = static_cast<double>(s.b2.c[i] - s.b1.c[i]);
    const double a = lo[i], b = lo[i] + 1.0;
    if (q == 0.0) {
      if (p < a || p > b) return 0.0;
      continue;
    }
    double u0 = (a - p) / q, u1 = (b - p) / q;
    if (u0 > u1) std::swap(u0, u1);
    t0 = std::max(t0, u0);
    t1 = std::min(t1, u1);
  }
  return t1 > t0 ? (t1 - t0) * voxel_length(s, 2) : 0.0;
}

}  // namespace

TEST(PointIntensity, FaceAndCornerMeans) {
  auto v = PixelVolume::cube(2, 4);
  v.at(std::vector<int>{1, 1}) = 4.0;
  EXPECT_DOUBLE_EQ(point_intensity(v, std::vector<double>{1.5, 1.5}), 4.0);
  EXPECT_DOUBLE_EQ(point_intensity(v, std::vector<double>{1.0, 1.5}), 2.0);  // face shared with voxel (0,1)
  EXPECT_DOUBLE_EQ(point_intensity(v, std::vector<double>{1.0, 1.0}), 1.0);  // corner of four voxels
  EXPECT_DOUBLE_EQ(point_intensity(v, std::vector<double>{2.5, 2.5}), 0.0);
}

TEST(Transform, ConstantVolumeGivesLength) {
  for (int d : {2, 3}) {
    const int side = d == 2 ? 16 : 8;
    auto v = PixelVolume::cube(d, side);
    for (double& x : v.data) x = 2.5;
    for (int j = 0; j <= v.side_log2(); ++j) {
      const auto t = beamlet_transform(v, j);
      ASSERT_GT(t.size(), 0u);
      for (std::size_t i = 0; i < t.size(); ++i)
        ASSERT_NEAR(t.coef[i], 2.5 * euclidean_length(t.grid, t.beamlets[i]), 1e-9) << "d=" << d << " j=" << j;
    }
  }
}

TEST(Transform, SingleVoxelMatchesClipping) {
  auto v = PixelVolume::cube(2, 8);
  v.at(std::vector<int>{3, 5}) = 1.0;
  const auto t = beamlet_transform(v, 2);
  std::size_t missing = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& s = t.beamlets[i];
    double expect = clipped_length_2d(s, {3, 5}) / 8.0;
    // Segments running along a face of the voxel see the mean over the two sides.
    for (int r = 0; r < 2; ++r) {
      const auto k = static_cast<std::size_t>(r);
      const auto lo = r == 0 ? 3 : 5;
      if (s.b1.c[k] == s.b2.c[k] && (s.b1.c[k] == lo || s.b1.c[k] == lo + 1)) expect *= 0.5;
    }
    if (expect == 0.0) {
      ++missing;
      ASSERT_EQ(t.coef[i], 0.0);
    } else {
      ASSERT_NEAR(t.coef[i], expect, 1e-12);
    }
  }
  EXPECT_GT(missing, t.size() / 2);
}

TEST(Transform, AxisAlignedThroughQVoxels) {
  Rng rng(5);
  auto v = random_volume({16, 16}, rng, 0.0, 5.0);
  // Beamlet from (0, 4) to (q, 4) lies on the face between rows 3 and 4 of voxels 0..q-1.
  for (int q = 1; q <= 4; ++q) {
    for (int x = 0; x < q; ++x) {
      v.at(std::vector<int>{x, 3}) = 1.0;
      v.at(std::vector<int>{x, 4}) = 1.0;
    }
    const auto a = pt(0, 4), b = pt(q, 4);
    EXPECT_NEAR(line_integral(v, a, b), q / 16.0, 1e-15);
    EXPECT_NEAR(quadrature_line_integral(v, a, b), q / 16.0, 1e-12);
  }
  // Through voxel interiors along a diagonal: sqrt(2) per voxel.
  auto d = PixelVolume::cube(2, 8);
  for (int i = 0; i < 4; ++i) d.at(std::vector<int>{i, i}) = 1.0;
  EXPECT_NEAR(line_integral(d, pt(0, 0), pt(4, 4)), 4 * std::sqrt(2.0) / 8.0, 1e-15);
}

TEST(Transform, AgreesWithQuadratureOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 6; ++trial) {
    const bool three = trial % 2 == 1;
    const auto v = three ? random_volume({8, 8, 8}, rng) : random_volume({16, 16}, rng);
    const auto t = beamlet_transform(v, three ? 1 : 2);
    for (int k = 0; k < 40; ++k) {
      const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(t.size()) - 1));
      const auto& s = t.beamlets[i];
      const double len = euclidean_length(t.grid, s);
      ASSERT_NEAR(t.coef[i], quadrature_line_integral(v, s.b1, s.b2), 1e-4 * len);
    }
  }
}

TEST(Transform, LinearToRoundoff) {
  Rng rng(12);
  const auto x = random_volume({8, 8, 8}, rng), y = random_volume({8, 8, 8}, rng);
  auto z = PixelVolume::zeros(x.dims);
  for (std::size_t i = 0; i < z.size(); ++i) z.data[i] = 2.0 * x.data[i] - 0.5 * y.data[i];
  const auto tx = beamlet_transform(x, 1), ty = beamlet_transform(y, 1), tz = beamlet_transform(z, 1);
  ASSERT_EQ(tx.size(), tz.size());
  for (std::size_t i = 0; i < tz.size(); ++i) ASSERT_NEAR(tz.coef[i], 2.0 * tx.coef[i] - 0.5 * ty.coef[i], 1e-13);
}

TEST(Transform, Deterministic) {
  Rng rng(13);
  const auto v = random_volume({16, 16}, rng);
  EXPECT_EQ(beamlet_transform(v, 2).coef, beamlet_transform(v, 2).coef);
}

TEST(Transform, RejectsBadInput) {
  EXPECT_THROW(beamlet_transform(PixelVolume::zeros({6, 6}), 1), ConfigError);
  EXPECT_THROW(beamlet_transform(PixelVolume::zeros({8, 16}), 1), ConfigError);
  EXPECT_THROW(beamlet_transform(PixelVolume::cube(2, 8), 4), ConfigError);
  EXPECT_THROW(beamlet_transform(PixelVolume::cube(2, 8), -1), ConfigError);
  auto bad = PixelVolume::cube(2, 4);
  bad.data[3] = std::nan("");
  EXPECT_THROW(beamlet_transform(bad, 1), FormatError);
}

TEST(Gcn, FullGraphMatchesBruteForcePredicate) {
  const auto v = PixelVolume::cube(2, 4);
  for (int j = 0; j <= 2; ++j) {
    const auto t = beamlet_transform(v, j);
    for (bool dag : {false, true}) {
      const auto g = threshold_and_build(t, -std::numeric_limits<double>::infinity(), dag);
      std::vector<Segment> keep;
      for (const auto& s : t.beamlets)
        if (!dag || is_forward(s)) keep.push_back(s);
      ASSERT_EQ(g.vertices, keep);
      std::set<std::pair<std::uint32_t, std::uint32_t>> want, got;
      for (std::uint32_t a = 0; a < keep.size(); ++a)
        for (std::uint32_t b = 0; b < keep.size(); ++b) {
          if (a == b) continue;
          const auto &A = keep[a], &B = keep[b];
          const int shared = (A.b1 == B.b1) + (A.b1 == B.b2) + (A.b2 == B.b1) + (A.b2 == B.b2);
          if (shared != 1) continue;
          if (dag) {
            if (A.b2 == B.b1 && beamlet_good_continuation(t.grid, A, B)) want.emplace(a, b);
          } else if (a < b && beamlet_good_continuation(t.grid, A, B)) {
            want.emplace(a, b);
          }
        }
      for (std::uint32_t u = 0; u < g.graph.n; ++u)
        for (auto w : g.graph.out[u])
          if (dag || u < w) got.emplace(u, w);
      EXPECT_EQ(got, want) << "j=" << j << " dag=" << dag;
      if (dag) { EXPECT_TRUE(topological_order(g.graph).has_value()); }
    }
  }
}

TEST(Gcn, ThresholdMonotoneAndHandshake) {
  Rng rng(21);
  const auto v = random_volume({16, 16}, rng);
  const auto t = beamlet_transform(v, 2);
  EXPECT_EQ(threshold_and_build(t, t.max(), true).node_count(), 0u);
  std::set<std::size_t> prev;
  bool first = true;
  for (double th : {0.3, 0.2, 0.1, 0.0, -0.1}) {
    const auto g = threshold_and_build(t, th, false);
    std::set<std::size_t> cur(g.source.begin(), g.source.end());
    if (!first) { EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end())); }
    EXPECT_LE(2 * g.edge_count(), g.node_count() * g.graph.max_degree());
    for (std::uint32_t u = 0; u < g.graph.n; ++u)
      for (auto w : g.graph.out[u]) ASSERT_TRUE(beamlet_good_continuation(t.grid, g.vertices[u], g.vertices[w]));
    prev = std::move(cur);
    first = false;
  }
}

TEST(EdgesVsNodes, ZeroVolume) {
  const auto t = beamlet_transform(PixelVolume::cube(2, 8), 2);
  const auto full = threshold_and_build(t, -1.0, true);
  const auto curve = edges_vs_nodes(t, {0.0, -1.0, 1.0}, true);
  ASSERT_EQ(curve.size(), 3u);
  EXPECT_EQ(curve[0].threshold, 1.0);
  EXPECT_EQ(curve[0].nodes, 0u);
  EXPECT_EQ(curve[1].nodes, 0u);
  EXPECT_EQ(curve[1].edges, 0u);
  EXPECT_EQ(curve[2].nodes, full.node_count());
  EXPECT_EQ(curve[2].edges, full.edge_count());
  EXPECT_GT(full.edge_count(), 0u);
}

TEST(EdgesVsNodes, IncrementalMatchesDirectBuild) {
  Rng rng(22);
  const auto v = random_volume({8, 8, 8}, rng);
  const auto t = beamlet_transform(v, 2);
  const auto grid = quantile_thresholds(t, 8, 0.5, 0.99);
  for (std::size_t i = 1; i < grid.size(); ++i) EXPECT_LE(grid[i], grid[i - 1]);
  for (bool dag : {true, false}) {
    const auto curve = edges_vs_nodes(t, grid, dag);
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const auto g = threshold_and_build(t, curve[i].threshold, dag);
      EXPECT_EQ(curve[i].nodes, g.node_count());
      EXPECT_EQ(curve[i].edges, g.edge_count());
      if (i > 0) { EXPECT_GE(curve[i].nodes, curve[i - 1].nodes); }
    }
    const auto at = edges_at_node_counts(t, {50, 10, 200}, dag);
    ASSERT_EQ(at.size(), 3u);
    EXPECT_EQ(at[0].nodes, 10u);
    EXPECT_EQ(at[2].nodes, 200u);
    // Thresholds keep whole tie groups, so compare at the node counts they produce.
    std::vector<std::size_t> counts;
    for (const auto& p : curve) counts.push_back(p.nodes);
    const auto matched = edges_at_node_counts(t, counts, dag);
    for (std::size_t i = 0; i < curve.size(); ++i) EXPECT_EQ(matched[i].edges, curve[i].edges);
  }
}

TEST(Lsi, Fixtures) {
  CoefficientTable t;
  t.coef = {1.0, 2.0, 3.0};
  EXPECT_DOUBLE_EQ(lsi(t, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(lsi(t, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(lsi(t, 2.5), 0.5);  // log 2 / log 4
  EXPECT_THROW(lsi(CoefficientTable{}, 0.0), ConfigError);
}

TEST(Lsi, MonotoneInUnitInterval) {
  Rng rng(31);
  const auto t = beamlet_transform(random_volume({16, 16}, rng), 2);
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(-0.5 + i * 0.025);
  const auto c = lsi_curve(t, grid);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_GE(c[i], 0.0);
    EXPECT_LE(c[i], 1.0);
    if (i > 0) { EXPECT_LE(c[i], c[i - 1]); }
  }
}

TEST(Fsr, NoiseReferenceAndIdentity) {
  Rng rng(41);
  const auto v = random_volume({16, 16, 16}, rng, 0.0, 1.0);
  const auto ref = energy_matched_noise(v, 9);
  double ev = 0, er = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    ev += v.data[i] * v.data[i];
    er += ref.data[i] * ref.data[i];
  }
  EXPECT_NEAR(er, ev, 1e-9 * ev);
  EXPECT_EQ(energy_matched_noise(v, 9).data, ref.data);
  const PathPipeline p{2, 0.2};
  for (double t : {0.0, 0.5, 1.0}) EXPECT_DOUBLE_EQ(fsr(v, v, p, t, 0.01), 1.0);
  EXPECT_THROW(fsr(v, PixelVolume::cube(3, 8), p, 0.0, 0.01), ConfigError);
  const auto c = fsr_curve(v, v, 2, 500, 0.01, 16);
  for (double r : c.ratio) EXPECT_DOUBLE_EQ(r, 1.0);
}

TEST(Fsr, DecompositionCoversGcn) {
  Rng rng(42);
  const auto t = beamlet_transform(random_volume({16, 16, 16}, rng), 2);
  const auto g = threshold_and_build(t, threshold_for_count(t, 400, true), true);
  const auto d = lwp_decomposition(g);
  std::size_t n = 0;
  for (const auto& path : d) n += path.vertices.size();
  EXPECT_EQ(n, g.node_count());
}
