#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <type_traits>
#include <span>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "gcnet/error.hpp"

namespace gcnet {

/// Adjacency-list graph; undirected graphs store each edge in both lists.
struct Graph {
  std::size_t n = 0;
  bool directed = true;
  std::vector<std::vector<std::uint32_t>> out;

  static Graph make(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges, bool directed) {
    Graph g;
    g.n = n;
    g.directed = directed;
    g.out.resize(n);
    for (const auto& [u, v] : edges) {
      if (u >= n || v >= n) throw ConfigError("Graph: edge endpoint out of range");
      g.out[u].push_back(v);
      if (!directed) g.out[v].push_back(u);
    }
    for (auto& row : g.out) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    return g;
  }

  std::size_t edge_count() const {
    std::size_t e = 0;
    for (const auto& row : out) e += row.size();
    return directed ? e : e / 2;
  }

  std::size_t max_degree() const {
    std::vector<std::size_t> deg(n, 0);
    for (std::size_t u = 0; u < n; ++u) {
      deg[u] += out[u].size();
      if (directed)
        for (auto v : out[u]) ++deg[v];
    }
    return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
  }
};

/// Kahn order with smallest-index tie-breaking; nullopt when the graph has a cycle.
inline std::optional<std::vector<std::uint32_t>> topological_order(const Graph& g) {
  if (!g.directed) throw ConfigError("topological_order: graph is undirected");
  std::vector<std::size_t> indeg(g.n, 0);
  for (const auto& row : g.out)
    for (auto v : row) ++indeg[v];
  std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, std::greater<>> ready;
  for (std::size_t v = 0; v < g.n; ++v)
    if (indeg[v] == 0) ready.push(static_cast<std::uint32_t>(v));
  std::vector<std::uint32_t> order;
  order.reserve(g.n);
  while (!ready.empty()) {
    const auto u = ready.top();
    ready.pop();
    order.push_back(u);
    for (auto v : g.out[u])
      if (--indeg[v] == 0) ready.push(v);
  }
  if (order.size() != g.n) return std::nullopt;
  return order;
}

enum class PathMode { Longest, Shortest };

namespace detail {

using BigCount = boost::multiprecision::cpp_int;
using BigFloat = boost::multiprecision::cpp_bin_float_50;

inline double count_ratio(const BigCount& a, const BigCount& b) {
  if (a == b) return 1.0;
  return static_cast<double>(BigFloat(a) / BigFloat(b));
}

// Brandes accumulation over the tight edges of one source; `order` lists reached vertices by level.
template <class Count>
void accumulate(const Graph& g, std::uint32_t s, const std::vector<std::uint32_t>& order,
                const std::vector<std::int64_t>& level, const std::vector<Count>& paths, std::vector<double>& dep,
                std::vector<double>& score) {
  for (auto u : order) dep[u] = 0.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto u = *it;
    for (auto v : g.out[u])
      if (level[v] == level[u] + 1) {
        if constexpr (std::is_same_v<Count, BigCount>)
          dep[u] += count_ratio(paths[u], paths[v]) * (1.0 + dep[v]);
        else
          dep[u] += static_cast<double>(paths[u]) / static_cast<double>(paths[v]) * (1.0 + dep[v]);
      }
    if (u != s) score[u] += dep[u];
  }
}

// Clears every entry touched by a run whose reached vertices are `order`.
template <class Count>
void reset_run(const Graph& g, const std::vector<std::uint32_t>& order, std::vector<std::int64_t>& level,
               std::vector<Count>& paths) {
  for (auto u : order) {
    level[u] = -1;
    paths[u] = 0;
    for (auto v : g.out[u]) {
      level[v] = -1;
      paths[v] = 0;
    }
  }
}

// Path counts from s on clean state; false when a 64-bit count overflowed (only for Count = uint64).
template <class Count>
bool count_paths(const Graph& g, std::uint32_t s, PathMode mode, const std::vector<std::uint32_t>& topo,
                 const std::vector<std::size_t>& topo_pos, std::vector<std::int64_t>& level, std::vector<Count>& paths, std::vector<std::uint32_t>& order) {
  order.clear();
  level[s] = 0;
  paths[s] = 1;
  auto add = [&](std::uint32_t v, const Count& c) {
    if constexpr (std::is_same_v<Count, BigCount>) {
      paths[v] += c;
      return true;
    } else {
      return !__builtin_add_overflow(paths[v], c, &paths[v]);
    }
  };
  if (mode == PathMode::Longest) {
    // only vertices after s in topological order can be reached
    for (std::size_t i = topo_pos[s]; i < topo.size(); ++i) {
      const auto u = topo[i];
      if (level[u] < 0) continue;
      order.push_back(u);
      for (auto v : g.out[u]) {
        if (level[u] + 1 > level[v]) {
          level[v] = level[u] + 1;
          paths[v] = paths[u];
        } else if (level[u] + 1 == level[v] && !add(v, paths[u])) {
          return false;
        }
      }
    }
  } else {
    std::queue<std::uint32_t> q;
    q.push(s);
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      order.push_back(u);
      for (auto v : g.out[u]) {
        if (level[v] < 0) {
          level[v] = level[u] + 1;
          q.push(v);
        }
        if (level[v] == level[u] + 1 && !add(v, paths[u])) return false;
      }
    }
  }
  return true;
}

}  // namespace detail

/// Betweenness over ordered (directed) or unordered (undirected) pairs.
/// Directed longest-path mode runs a counting DP per source on a DAG; shortest
/// mode is breadth-first; undirected longest mode is exhaustive (<= 12 vertices).
inline std::vector<double> betweenness_brute(const Graph& g, PathMode mode);

inline std::vector<double> betweenness(const Graph& g, PathMode mode = PathMode::Longest) {
  std::vector<double> score(g.n, 0.0);
  if (mode == PathMode::Longest && !g.directed) {
    if (g.n > 12) throw ConfigError("betweenness: longest paths on undirected graphs need <= 12 vertices");
    return betweenness_brute(g, mode);
  }
  std::vector<std::uint32_t> topo;
  if (mode == PathMode::Longest) {
    auto t = topological_order(g);
    if (!t) throw ConfigError("betweenness: longest-path mode needs an acyclic graph");
    topo = std::move(*t);
  }
  std::vector<std::size_t> topo_pos(g.n, 0);
  for (std::size_t i = 0; i < topo.size(); ++i) topo_pos[topo[i]] = i;
  std::vector<std::int64_t> level(g.n, -1);
  std::vector<std::uint64_t> fast(g.n, 0);
  std::vector<detail::BigCount> big;
  std::vector<double> dep(g.n, 0.0);
  std::vector<std::uint32_t> order;
  for (std::uint32_t s = 0; s < g.n; ++s) {
    const bool ok = detail::count_paths(g, s, mode, topo, topo_pos, level, fast, order);
    if (ok) detail::accumulate(g, s, order, level, fast, dep, score);
    detail::reset_run(g, order, level, fast);
    if (ok) continue;
    // 64-bit counts overflowed: recount exactly
    if (big.empty()) big.assign(g.n, 0);
    detail::count_paths(g, s, mode, topo, topo_pos, level, big, order);
    detail::accumulate(g, s, order, level, big, dep, score);
    detail::reset_run(g, order, level, big);
  }
  if (!g.directed)
    for (auto& v : score) v /= 2.0;
  return score;
}

/// Exhaustive simple-path enumeration; pairs with no path contribute 0.
inline std::vector<double> betweenness_brute(const Graph& g, PathMode mode) {
  if (g.n > 12) throw ConfigError("betweenness_brute: at most 12 vertices");
  std::vector<double> score(g.n, 0.0);
  std::vector<std::uint32_t> stack;
  std::vector<bool> used(g.n, false);
  for (std::uint32_t s = 0; s < g.n; ++s) {
    for (std::uint32_t t = 0; t < g.n; ++t) {
      if (s == t || (!g.directed && t < s)) continue;
      std::vector<std::vector<std::uint32_t>> best;
      std::size_t best_len = 0;
      std::function<void(std::uint32_t)> dfs = [&](std::uint32_t u) {
        if (u == t) {
          const std::size_t len = stack.size();
          const bool better = best.empty() || (mode == PathMode::Longest ? len > best_len : len < best_len);
          if (better) {
            best.clear();
            best_len = len;
          }
          if (len == best_len) best.push_back(stack);
          return;
        }
        for (auto v : g.out[u]) {
          if (used[v]) continue;
          used[v] = true;
          stack.push_back(v);
          dfs(v);
          stack.pop_back();
          used[v] = false;
        }
      };
      used[s] = true;
      stack = {s};
      dfs(s);
      used[s] = false;
      if (best.empty()) continue;
      std::vector<double> through(g.n, 0.0);
      for (const auto& p : best)
        for (std::size_t i = 1; i + 1 < p.size(); ++i) through[p[i]] += 1.0;
      for (std::size_t v = 0; v < g.n; ++v) score[v] += through[v] / static_cast<double>(best.size());
    }
  }
  return score;
}

struct WeightedPath {
  std::vector<std::uint32_t> vertices;
  double weight = 0.0;
};

using PathDecomposition = std::vector<WeightedPath>;

/// Repeatedly removes a maximum-weight path (vertex weights) until no vertex is left.
/// Ties prefer the smallest end vertex and, along the path, the smallest predecessor.
inline PathDecomposition lwp_decomposition(const Graph& g, std::span<const double> w) {
  if (!g.directed) throw ConfigError("lwp_decomposition: graph must be directed");
  if (w.size() != g.n) throw ConfigError("lwp_decomposition: one weight per vertex");
  const auto topo = topological_order(g);
  if (!topo) throw ConfigError("lwp_decomposition: graph has a cycle");
  std::vector<std::vector<std::uint32_t>> in(g.n);
  for (std::uint32_t u = 0; u < g.n; ++u)
    for (auto v : g.out[u]) in[v].push_back(u);
  std::vector<bool> alive(g.n, true);
  std::vector<double> best(g.n);
  std::vector<std::int64_t> pred(g.n);
  std::size_t left = g.n;
  PathDecomposition out;
  while (left > 0) {
    std::int64_t end = -1;
    for (auto v : *topo) {
      if (!alive[v]) continue;
      best[v] = w[v];
      pred[v] = -1;
      double top = 0.0;
      for (auto u : in[v])
        if (alive[u] && best[u] > top) {
          top = best[u];
          pred[v] = u;
        }
      best[v] += top;
      if (end < 0 || best[v] > best[static_cast<std::size_t>(end)] ||
          (best[v] == best[static_cast<std::size_t>(end)] && v < end))
        end = v;
    }
    WeightedPath p;
    p.weight = best[static_cast<std::size_t>(end)];
    for (std::int64_t v = end; v >= 0; v = pred[static_cast<std::size_t>(v)]) p.vertices.push_back(static_cast<std::uint32_t>(v));
    std::reverse(p.vertices.begin(), p.vertices.end());
    for (auto v : p.vertices) alive[v] = false;
    left -= p.vertices.size();
    out.push_back(std::move(p));
  }
  return out;
}

/// D(t) = #{p : weight(p) > t} / |P|.
inline double fsi(const PathDecomposition& decomp, double t) {
  if (decomp.empty()) throw ConfigError("fsi: empty decomposition");
  std::size_t above = 0;
  for (const auto& p : decomp) above += p.weight > t;
  return static_cast<double>(above) / static_cast<double>(decomp.size());
}

/// R(t) = (D_I(t) + eps) / (D_ref(t) + eps).
inline double fsr(const PathDecomposition& image, const PathDecomposition& reference, double t, double eps) {
  if (!(eps > 0.0)) throw ConfigError("fsr: eps must be > 0");
  return (fsi(image, t) + eps) / (fsi(reference, t) + eps);
}

}  // namespace gcnet
