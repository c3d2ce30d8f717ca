#include <gtest/gtest.h>

#include <numeric>

#include "gcnet/graph_stats.hpp"
#include "gcnet/rng.hpp"
#include "oracles.hpp"

using namespace gcnet;
using namespace gcnet::oracle;

namespace {

Graph chain(std::size_t n) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
  for (std::uint32_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph::make(n, e, true);
}

double as_double(const boost::rational<std::int64_t>& q) {
  return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator());
}

}  // namespace

TEST(Graph, MakeDedupesAndCounts) {
  const auto g = Graph::make(3, {{0, 1}, {0, 1}, {1, 2}}, true);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(g.max_degree(), 2u);
  const auto u = Graph::make(3, {{0, 1}, {1, 2}}, false);
  EXPECT_EQ(u.edge_count(), 2u);
  EXPECT_THROW(Graph::make(2, {{0, 5}}, true), ConfigError);
}

TEST(TopologicalOrder, DetectsCycles) {
  EXPECT_TRUE(topological_order(chain(4)).has_value());
  const auto cyc = Graph::make(3, {{0, 1}, {1, 2}, {2, 0}}, true);
  EXPECT_FALSE(topological_order(cyc).has_value());
  EXPECT_THROW(betweenness(cyc), ConfigError);
  EXPECT_THROW(lwp_decomposition(cyc, std::vector<double>(3, 1.0)), ConfigError);
}

TEST(Betweenness, DirectedPath) {
  const auto b = betweenness(chain(3));
  EXPECT_EQ(b, (std::vector<double>{0.0, 1.0, 0.0}));
}

TEST(Betweenness, NoEdgesIsZero) {
  const auto b = betweenness(Graph::make(5, {}, true));
  EXPECT_EQ(b, std::vector<double>(5, 0.0));
}

TEST(Betweenness, LongestNotShortest) {
  // 0 -> 3 directly and 0 -> 1 -> 2 -> 3: only the long route counts in longest mode.
  const auto g = Graph::make(4, {{0, 3}, {0, 1}, {1, 2}, {2, 3}}, true);
  const auto lon = betweenness(g, PathMode::Longest);
  EXPECT_DOUBLE_EQ(lon[1], 2.0);  // 0->2 and 0->3
  EXPECT_DOUBLE_EQ(lon[2], 2.0);  // 0->3 and 1->3
  const auto sho = betweenness(g, PathMode::Shortest);
  EXPECT_DOUBLE_EQ(sho[1], 1.0);  // only 0->2
  EXPECT_DOUBLE_EQ(sho[2], 1.0);  // only 1->3
  EXPECT_EQ(sho, betweenness_brute(g, PathMode::Shortest));
}

TEST(Betweenness, HubFixtureDominates) {
  // Two bundles {0,1,2} -> 3 -> {4,5,6} and {7,8} -> 3 -> {9,10}, merged through vertex 3.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
  for (std::uint32_t a : {0u, 1u, 2u, 7u, 8u}) e.emplace_back(a, 3);
  for (std::uint32_t b : {4u, 5u, 6u, 9u, 10u}) e.emplace_back(3, b);
  e.emplace_back(0, 1);
  e.emplace_back(4, 5);
  e.emplace_back(9, 10);
  const auto g = Graph::make(11, e, true);
  const auto b = betweenness(g);
  const auto q = rational_betweenness(g);
  for (std::size_t v = 0; v < g.n; ++v) {
    EXPECT_NEAR(b[v], as_double(q[v]), 1e-12);
    if (v != 3) { EXPECT_GT(b[3], b[v]); }
  }
}

TEST(Betweenness, RandomDagsMatchRationalOracle) {
  Rng rng(20261014);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 12));
    const auto g = random_dag(n, rng.uniform(0.1, 0.6), rng);
    const auto b = betweenness(g);
    const auto q = rational_betweenness(g);
    for (std::size_t v = 0; v < n; ++v) ASSERT_NEAR(b[v], as_double(q[v]), 1e-9 * (1.0 + b[v])) << "trial " << trial;
  }
}

TEST(Betweenness, UndirectedModesAgreeWithBruteForce) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(2, 8));
    std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
    for (std::uint32_t a = 0; a < n; ++a)
      for (std::uint32_t b = a + 1; b < n; ++b)
        if (rng.uniform() < 0.4) e.emplace_back(a, b);
    const auto g = Graph::make(n, e, false);
    const auto s = betweenness(g, PathMode::Shortest);
    const auto bs = betweenness_brute(g, PathMode::Shortest);
    for (std::size_t v = 0; v < n; ++v) ASSERT_NEAR(s[v], bs[v], 1e-9);
    EXPECT_EQ(betweenness(g, PathMode::Longest), betweenness_brute(g, PathMode::Longest));
  }
}

TEST(Betweenness, ExactCountsBeyondSixtyFourBits) {
  // 70 diamond layers give 2^70 longest paths end to end.
  const std::uint32_t layers = 70;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
  for (std::uint32_t l = 0; l < layers; ++l) {
    const std::uint32_t a = 3 * l, up = a + 1, dn = a + 2, nx = a + 3;
    e.insert(e.end(), {{a, up}, {a, dn}, {up, nx}, {dn, nx}});
  }
  const auto g = Graph::make(3 * layers + 1, e, true);
  const auto b = betweenness(g);
  // Articulation vertex 3l separates 3l earlier from 3(70 - l) later vertices; up/down vertices of
  // layer l carry half of the (3l + 1)(3(69 - l) + 1) pairs around them.
  for (std::uint32_t l = 0; l <= layers; ++l) {
    const double art = 9.0 * l * (layers - l);
    EXPECT_NEAR(b[3 * l], art, 1e-12 * (1.0 + art));
    if (l == layers) break;
    const double side = (3.0 * l + 1.0) * (3.0 * (layers - 1 - l) + 1.0) / 2.0;
    EXPECT_NEAR(b[3 * l + 1], side, 1e-12 * side);
    EXPECT_NEAR(b[3 * l + 2], side, 1e-12 * side);
  }
}

TEST(Lwp, SinglePathAndTwoPaths) {
  const std::vector<double> w{1, 2, 3};
  const auto d = lwp_decomposition(chain(3), w);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].vertices, (std::vector<std::uint32_t>{0, 1, 2}));
  EXPECT_DOUBLE_EQ(d[0].weight, 6.0);

  const auto g = Graph::make(4, {{0, 1}, {2, 3}}, true);
  const auto two = lwp_decomposition(g, std::vector<double>{1, 2, 2, 3});
  ASSERT_EQ(two.size(), 2u);
  EXPECT_DOUBLE_EQ(two[0].weight, 5.0);
  EXPECT_DOUBLE_EQ(two[1].weight, 3.0);
  EXPECT_EQ(two[1].vertices, (std::vector<std::uint32_t>{0, 1}));
}

TEST(Lwp, RandomDagsMatchBruteForce) {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 12));
    const auto g = random_dag(n, rng.uniform(0.1, 0.6), rng);
    std::vector<double> w(n);
    for (auto& x : w) x = static_cast<double>(rng.uniform_int(0, 9));  // integer weights exercise ties
    const auto d = lwp_decomposition(g, w);
    std::vector<bool> alive(n, true);
    std::size_t covered = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto& p = d[i];
      ASSERT_FALSE(p.vertices.empty());
      ASSERT_DOUBLE_EQ(p.weight, brute_max_path(g, w, alive)) << "trial " << trial << " path " << i;
      double sum = 0.0;
      for (std::size_t k = 0; k < p.vertices.size(); ++k) {
        const auto v = p.vertices[k];
        ASSERT_TRUE(alive[v]);
        sum += w[v];
        if (k > 0) {
          const auto& row = g.out[p.vertices[k - 1]];
          ASSERT_TRUE(std::binary_search(row.begin(), row.end(), v));
        }
      }
      ASSERT_DOUBLE_EQ(sum, p.weight);
      if (i > 0) { ASSERT_LE(p.weight, d[i - 1].weight); }
      for (auto v : p.vertices) alive[v] = false;
      covered += p.vertices.size();
    }
    ASSERT_EQ(covered, n);
  }
}

TEST(Fsi, Fixtures) {
  PathDecomposition one{{{0}, 4.0}};
  EXPECT_DOUBLE_EQ(fsi(one, 3.9), 1.0);
  EXPECT_DOUBLE_EQ(fsi(one, 4.0), 0.0);
  PathDecomposition two{{{0}, 5.0}, {{1}, 3.0}};
  EXPECT_DOUBLE_EQ(fsi(two, 4.0), 0.5);
  EXPECT_THROW(fsi(PathDecomposition{}, 0.0), ConfigError);
}

TEST(Fsi, NonincreasingAndRightContinuous) {
  Rng rng(3);
  PathDecomposition d;
  for (int i = 0; i < 50; ++i) d.push_back({{0}, std::floor(rng.uniform(0.0, 10.0))});
  double prev = 1.0;
  for (double t = -1.0; t <= 11.0; t += 0.25) {
    const double v = fsi(d, t);
    EXPECT_LE(v, prev);
    EXPECT_EQ(v, fsi(d, t + 1e-12));
    prev = v;
  }
}

TEST(Fsr, IdentityAndEps) {
  PathDecomposition two{{{0}, 5.0}, {{1}, 3.0}};
  for (double t : {0.0, 3.0, 4.0, 6.0}) EXPECT_DOUBLE_EQ(fsr(two, two, t, 0.01), 1.0);
  PathDecomposition none{{{0}, 1.0}};
  EXPECT_NEAR(fsr(two, none, 4.0, 0.5), (0.5 + 0.5) / 0.5, 1e-15);
  EXPECT_THROW(fsr(two, two, 0.0, 0.0), ConfigError);
}
