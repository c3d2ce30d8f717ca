#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gcnet/data.hpp"
#include "gcnet/error.hpp"
#include "gcnet/poly_net.hpp"
#include "gcnet/rng.hpp"
#include "gcnet/smoothness.hpp"
#include "gcnet/synth.hpp"

namespace gcnet {

/// Scale and threshold choices for one detection problem.
struct DetectionConfig {
  HolderParams params;
  double eta = 0.0;
  std::size_t n = 0;
  double tau = 1.0;
  int cells = 1;
  double delta = 1.0;
  double multiplier = 0.0;  // slab half-thickness in units of delta
  double guard = 2e7;       // cap on steps * states

  /// delta = max(n^(-alpha/(k + alpha(d-k))), eta), then Delta^-1 = max(1, floor(1/Delta))
  /// with delta = c1 beta Delta^alpha recomputed.
  static DetectionConfig resolve(HolderParams params, std::size_t n, double eta = 0.0, double tau = 1.0) {
    params.validate();
    const double rate = params.alpha / (params.k + params.alpha * params.codim());
    const double target = std::max(n == 0 ? 1.0 : std::pow(static_cast<double>(n), -rate), eta);
    return at_delta(params, n, target, eta, tau);
  }

  /// Image variant: delta = max(eta, n^(-1/d)) with n pixels.
  static DetectionConfig for_image(HolderParams params, std::size_t pixels, double eta = 0.0, double tau = 1.0) {
    params.validate();
    if (pixels == 0) throw ConfigError("DetectionConfig: image has no pixels");
    const double target = std::max(eta, std::pow(static_cast<double>(pixels), -1.0 / params.d));
    return at_delta(params, pixels, target, eta, tau);
  }

  static DetectionConfig at_delta(HolderParams params, std::size_t n, double target, double eta, double tau) {
    params.validate();
    if (!(target > 0.0)) throw ConfigError("DetectionConfig: delta must be > 0");
    const auto c = compute_constants(params);
    const double Delta = std::pow(target / (c.c1 * params.beta), 1.0 / params.alpha);
    const double inv = std::floor(1.0 / Delta + 1e-9);
    DetectionConfig cfg;
    cfg.params = params;
    cfg.eta = eta;
    cfg.n = n;
    cfg.tau = tau;
    cfg.cells = static_cast<int>(std::clamp(inv, 1.0, 1e6));
    cfg.delta = c.c1 * params.beta * std::pow(1.0 / cfg.cells, params.alpha);
    cfg.multiplier = c.c0 + 1.0;
    return cfg;
  }

  /// Explicit cells and delta, for small exhaustive instances.
  static DetectionConfig fixed(HolderParams params, std::size_t n, int cells, double delta, double tau = 1.0) {
    params.validate();
    if (cells < 1 || !(delta > 0.0)) throw ConfigError("DetectionConfig: need cells >= 1 and delta > 0");
    DetectionConfig cfg;
    cfg.params = params;
    cfg.n = n;
    cfg.tau = tau;
    cfg.cells = cells;
    cfg.delta = delta;
    cfg.multiplier = compute_constants(params).c0 + 1.0;
    return cfg;
  }

  PolyNetworkSpec spec() const { return PolyNetworkSpec::unlinked(params, cells, delta); }
  double Delta() const { return 1.0 / cells; }
  /// n delta^(k/alpha + d - k).
  double significance_scale() const {
    return static_cast<double>(n) * std::pow(delta, params.k / params.alpha + params.codim());
  }
  /// A node is significant when its count exceeds this value.
  double significance_count() const { return tau * significance_scale(); }
  /// log(1/delta), natural log.
  double run_threshold() const { return std::log(1.0 / delta); }
};

enum class Decision { H0, H1 };

inline const char* to_string(Decision d) { return d == Decision::H1 ? "H1" : "H0"; }

struct PathScore {
  std::int64_t count = 0;
  std::vector<PolyNode> path;  // zig-zag order
};

struct RunStatistic {
  int length = 0;
  std::size_t start = 0;  // zig-zag index of the first witness node
  std::vector<PolyNode> witness;
};

/// Exact N(R) over the slab with half-thickness multiplier * delta.
inline std::int64_t count_in_region(const PointCloud& cloud, const PolyNetworkSpec& spec, const PolyNode& node,
                                    double multiplier) {
  if (cloud.d != spec.params().d) throw ConfigError("count_in_region: cloud dimension differs from network");
  const double limit = multiplier * spec.delta();
  std::int64_t out = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (region_residual(spec, node, cloud.point(i)) <= limit) ++out;
  return out;
}

/// Zig-zag path network: states are coefficient tuples (one vector per output
/// coordinate), transitions are the neighbor predicate for each step direction.
class DetectionNetwork {
 public:
  explicit DetectionNetwork(DetectionConfig config)
      : config_(config), spec_(config.spec()), order_(zigzag_order(spec_)) {
    const auto& set = spec_.indices();
    nA_ = set.size();
    b0_ = spec_.coef_bound_for(0);
    W0_ = static_cast<std::size_t>(2 * b0_ + 1);
    const double per = static_cast<double>(coefficient_choices(spec_));
    const double states = std::pow(per, spec_.codim());
    if (states * static_cast<double>(order_.size()) > config_.guard)
      throw GuardError("detection state space (" + std::to_string(static_cast<long long>(states)) + " states x " +
                       std::to_string(order_.size()) + " cells) exceeds guard; use a coarser scale");
    P_ = static_cast<std::size_t>(per);
    S_ = static_cast<std::size_t>(states);
    coord_.reserve(P_ * nA_);
    for_each_coefficient(spec_, [&](const std::vector<int>& h) { coord_.insert(coord_.end(), h.begin(), h.end()); });
    cell_to_t_.assign(static_cast<std::size_t>(spec_.cell_count()), 0);
    for (std::size_t t = 0; t < order_.size(); ++t) cell_to_t_[linear(order_[t])] = t;
    step_dir_.assign(order_.size(), 0);
    for (std::size_t t = 1; t < order_.size(); ++t) {
      const auto [axis, xi] = detail::adjacency(order_[t - 1], order_[t]);
      const std::size_t key = static_cast<std::size_t>(2 * axis + (xi > 0 ? 1 : 0));
      if (succ_.size() <= key) succ_.resize(key + 1);
      if (succ_[key].offsets.empty()) succ_[key] = build_successors(axis, xi);
      step_dir_[t] = key;
    }
  }

  const DetectionConfig& config() const { return config_; }
  const PolyNetworkSpec& spec() const { return spec_; }
  const std::vector<std::vector<int>>& order() const { return order_; }
  std::size_t steps() const { return order_.size(); }
  std::size_t state_count() const { return S_; }
  std::size_t coord_count() const { return P_; }

  std::span<const int> coord_vector(std::size_t p) const { return {coord_.data() + p * nA_, nA_}; }

  std::size_t encode_coord(std::span<const int> h) const {
    std::size_t out = 0, stride = 1;
    for (std::size_t a = 0; a < nA_; ++a) {
      const int b = spec_.coef_bound_for(a);
      out += static_cast<std::size_t>(h[a] + b) * stride;
      stride *= static_cast<std::size_t>(2 * b + 1);
    }
    return out;
  }

  std::size_t encode(const PolyNode& node) const {
    std::size_t out = 0, stride = 1;
    for (const auto& h : node.coefs) {
      out += encode_coord(h) * stride;
      stride *= P_;
    }
    return out;
  }

  PolyNode node(std::size_t t, std::size_t state) const {
    PolyNode out{order_[t], {}};
    for (int r = 0; r < spec_.codim(); ++r) {
      const auto h = coord_vector(state % P_);
      out.coefs.emplace_back(h.begin(), h.end());
      state /= P_;
    }
    return out;
  }

  /// fn(target) for every state at step t reachable from `state` at step t-1.
  template <class Fn>
  void for_each_successor(std::size_t t, std::size_t state, Fn&& fn) const {
    const Csr& csr = succ_[step_dir_[t]];
    const int c = spec_.codim();
    if (c == 1) {
      for (std::uint32_t i = csr.offsets[state]; i < csr.offsets[state + 1]; ++i) fn(static_cast<std::size_t>(csr.targets[i]));
      return;
    }
    std::vector<std::size_t> parts(static_cast<std::size_t>(c));
    for (int r = 0; r < c; ++r) {
      parts[static_cast<std::size_t>(r)] = state % P_;
      state /= P_;
    }
    std::vector<std::uint32_t> pos(static_cast<std::size_t>(c));
    for (int r = 0; r < c; ++r) {
      pos[static_cast<std::size_t>(r)] = csr.offsets[parts[static_cast<std::size_t>(r)]];
      if (pos[static_cast<std::size_t>(r)] == csr.offsets[parts[static_cast<std::size_t>(r)] + 1]) return;
    }
    while (true) {
      std::size_t target = 0, stride = 1;
      for (int r = 0; r < c; ++r) {
        target += csr.targets[pos[static_cast<std::size_t>(r)]] * stride;
        stride *= P_;
      }
      fn(target);
      int r = 0;
      for (; r < c; ++r) {
        auto& p = pos[static_cast<std::size_t>(r)];
        if (++p < csr.offsets[parts[static_cast<std::size_t>(r)] + 1]) break;
        p = csr.offsets[parts[static_cast<std::size_t>(r)]];
      }
      if (r == c) return;
    }
  }

  /// Point indices per zig-zag position; boundary points belong to every closed cell containing them.
  std::vector<std::vector<std::uint32_t>> buckets(const PointCloud& cloud) const {
    if (cloud.d != spec_.params().d) throw ConfigError("detection: cloud dimension differs from network");
    const int k = spec_.k(), M = spec_.cells_per_axis();
    const double D = spec_.Delta();
    std::vector<std::vector<std::uint32_t>> out(order_.size());
    std::vector<std::vector<int>> options(static_cast<std::size_t>(k));
    std::vector<int> m(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const auto p = cloud.point(i);
      bool none = false;
      for (int a = 0; a < k; ++a) {
        auto& opt = options[static_cast<std::size_t>(a)];
        opt.clear();
        const double x = p[static_cast<std::size_t>(a)];
        const int guess = static_cast<int>(std::floor(x / D)) + 1;
        for (int c = guess - 1; c <= guess + 1; ++c)
          if (c >= 1 && c <= M && !(x < (c - 1) * D) && !(x > c * D)) opt.push_back(c);
        if (opt.empty()) none = true;
      }
      if (none) continue;
      std::vector<std::size_t> pos(static_cast<std::size_t>(k), 0);
      while (true) {
        for (int a = 0; a < k; ++a) m[static_cast<std::size_t>(a)] = options[static_cast<std::size_t>(a)][pos[static_cast<std::size_t>(a)]];
        out[cell_to_t_[linear(m)]].push_back(static_cast<std::uint32_t>(i));
        int a = 0;
        for (; a < k; ++a) {
          if (++pos[static_cast<std::size_t>(a)] < options[static_cast<std::size_t>(a)].size()) break;
          pos[static_cast<std::size_t>(a)] = 0;
        }
        if (a == k) break;
      }
    }
    return out;
  }

  /// N(R(node)) for every state at zig-zag position t, with the config multiplier.
  std::vector<std::int32_t> cell_counts(const PointCloud& cloud, std::span<const std::uint32_t> bucket,
                                        std::size_t t) const {
    const auto& m = order_[t];
    const int k = spec_.k(), c = spec_.codim();
    const double limit = config_.multiplier * spec_.delta();
    const double q0 = spec_.quantum(0);
    const std::size_t R1 = P_ / W0_;
    std::vector<std::int32_t> counts(S_, 0);
    // Box-sum over the constant coefficients, one pass per choice of the higher-order ones.
    std::size_t cells = 1;
    for (int r = 0; r < c; ++r) cells *= W0_ + 1;
    std::vector<std::int32_t> diff(cells);
    std::vector<std::size_t> rest(static_cast<std::size_t>(c), 0);
    std::vector<int> lo(static_cast<std::size_t>(c)), hi(static_cast<std::size_t>(c));
    std::vector<int> h(nA_);
    while (true) {
      std::fill(diff.begin(), diff.end(), 0);
      for (std::uint32_t idx : bucket) {
        const auto p = cloud.point(idx);
        const auto x = p.subspan(0, static_cast<std::size_t>(k));
        bool inside = true;
        for (int r = 0; r < c && inside; ++r) {
          const auto base = coord_vector(static_cast<std::size_t>(b0_) + W0_ * rest[static_cast<std::size_t>(r)]);
          std::copy(base.begin(), base.end(), h.begin());
          const double z = p[static_cast<std::size_t>(k + r)];
          const double center = (z - eval_coefs(spec_, m, h, x)) / q0;
          auto ok = [&](int h0) {
            h[0] = h0;
            return std::fabs(z - eval_coefs(spec_, m, h, x)) <= limit;
          };
          int a = static_cast<int>(std::max(static_cast<double>(-b0_), std::ceil(center - config_.multiplier) - 1.0));
          int b = static_cast<int>(std::min(static_cast<double>(b0_), std::floor(center + config_.multiplier) + 1.0));
          while (a <= b && !ok(a)) ++a;
          while (b >= a && !ok(b)) --b;
          if (a > b) inside = false;
          lo[static_cast<std::size_t>(r)] = a + b0_;
          hi[static_cast<std::size_t>(r)] = b + b0_ + 1;
        }
        if (!inside) continue;
        for (std::size_t corner = 0; corner < (std::size_t{1} << c); ++corner) {
          std::size_t off = 0, stride = 1;
          int sign = 1;
          for (int r = 0; r < c; ++r) {
            const bool upper = (corner >> r) & 1U;
            off += static_cast<std::size_t>(upper ? hi[static_cast<std::size_t>(r)] : lo[static_cast<std::size_t>(r)]) * stride;
            if (upper) sign = -sign;
            stride *= W0_ + 1;
          }
          diff[off] += sign;
        }
      }
      std::size_t stride = 1;
      for (int r = 0; r < c; ++r) {
        for (std::size_t i = 0; i < cells; ++i)
          if ((i / stride) % (W0_ + 1) != 0) diff[i] += diff[i - stride];
        stride *= W0_ + 1;
      }
      for (std::size_t i = 0; i < cells; ++i) {
        std::size_t rem = i, state = 0, pstride = 1;
        bool valid = true;
        for (int r = 0; r < c; ++r) {
          const std::size_t h0 = rem % (W0_ + 1);
          rem /= W0_ + 1;
          if (h0 == W0_) valid = false;
          state += (h0 + W0_ * rest[static_cast<std::size_t>(r)]) * pstride;
          pstride *= P_;
        }
        if (valid) counts[state] = diff[i];
      }
      int r = 0;
      for (; r < c; ++r) {
        if (++rest[static_cast<std::size_t>(r)] < R1) break;
        rest[static_cast<std::size_t>(r)] = 0;
      }
      if (r == c) break;
    }
    return counts;
  }

  std::vector<std::vector<std::int32_t>> all_counts(const PointCloud& cloud) const {
    const auto bk = buckets(cloud);
    std::vector<std::vector<std::int32_t>> out;
    out.reserve(order_.size());
    for (std::size_t t = 0; t < order_.size(); ++t) out.push_back(cell_counts(cloud, bk[t], t));
    return out;
  }

 private:
  struct Csr {
    std::vector<std::uint32_t> offsets;
    std::vector<std::uint32_t> targets;
  };

  std::size_t linear(std::span<const int> m) const {
    std::size_t idx = 0;
    for (std::size_t i = m.size(); i-- > 0;)
      idx = idx * static_cast<std::size_t>(spec_.cells_per_axis()) + static_cast<std::size_t>(m[i] - 1);
    return idx;
  }

  Csr build_successors(int axis, int xi) const {
    Csr csr;
    csr.offsets.reserve(P_ + 1);
    csr.offsets.push_back(0);
    for (std::size_t p = 0; p < P_; ++p) {
      std::vector<std::uint32_t> row;
      for (const auto& h : continuation_candidates(spec_, coord_vector(p), axis, xi))
        row.push_back(static_cast<std::uint32_t>(encode_coord(h)));
      std::sort(row.begin(), row.end());
      csr.targets.insert(csr.targets.end(), row.begin(), row.end());
      csr.offsets.push_back(static_cast<std::uint32_t>(csr.targets.size()));
    }
    return csr;
  }

  DetectionConfig config_;
  PolyNetworkSpec spec_;
  std::vector<std::vector<int>> order_;
  std::size_t nA_ = 0, W0_ = 1, P_ = 1, S_ = 1;
  int b0_ = 0;
  std::vector<int> coord_;
  std::vector<std::size_t> cell_to_t_;
  std::vector<std::size_t> step_dir_;
  std::vector<Csr> succ_;
};

// ---------------------------------------------------------------------------
// Path statistics

/// max over zig-zag paths of the summed counts; ties keep the smallest state index.
inline PathScore max_path(const DetectionNetwork& net, const std::vector<std::vector<std::int32_t>>& counts) {
  const std::size_t T = net.steps(), S = net.state_count();
  std::vector<std::int64_t> value(counts[0].begin(), counts[0].end()), next(S);
  std::vector<std::vector<std::int32_t>> pred(T);
  for (std::size_t t = 1; t < T; ++t) {
    std::fill(next.begin(), next.end(), -1);
    pred[t].assign(S, -1);
    for (std::size_t s = 0; s < S; ++s) {
      const std::int64_t v = value[s];
      if (v < 0) continue;
      net.for_each_successor(t, s, [&](std::size_t h) {
        if (v > next[h]) {
          next[h] = v;
          pred[t][h] = static_cast<std::int32_t>(s);
        }
      });
    }
    for (std::size_t h = 0; h < S; ++h) value[h] = next[h] < 0 ? -1 : next[h] + counts[t][h];
  }
  std::size_t best = 0;
  for (std::size_t s = 1; s < S; ++s)
    if (value[s] > value[best]) best = s;
  if (value[best] < 0) throw ConfigError("glrt_approx: the network has no complete zig-zag path");
  PathScore out;
  out.count = value[best];
  out.path.resize(T);
  std::size_t s = best;
  for (std::size_t t = T; t-- > 0;) {
    out.path[t] = net.node(t, s);
    if (t > 0) s = static_cast<std::size_t>(pred[t][s]);
  }
  return out;
}

inline PathScore glrt_approx(const DetectionNetwork& net, const PointCloud& cloud) {
  return max_path(net, net.all_counts(cloud));
}

inline PathScore glrt_approx(const PointCloud& cloud, const DetectionConfig& config) {
  return glrt_approx(DetectionNetwork(config), cloud);
}

/// Longest run of consecutive zig-zag steps with a neighbor-linked chain of
/// active states; active[t] lists the significant states at step t in increasing order.
inline RunStatistic longest_run(const DetectionNetwork& net, const std::vector<std::vector<std::uint32_t>>& active) {
  struct Entry {
    std::uint32_t state;
    std::int32_t run;
    std::int32_t pred;
  };
  const std::size_t T = net.steps(), S = net.state_count();
  std::vector<std::vector<Entry>> entries(T);
  std::vector<std::int32_t> best_run(S, 0), best_pred(S, -1);
  std::vector<std::size_t> touched;
  int L = 0;
  std::size_t end_t = 0, end_i = 0;
  for (std::size_t t = 0; t < T; ++t) {
    if (t > 0) {
      for (const auto& e : entries[t - 1]) {
        net.for_each_successor(t, e.state, [&](std::size_t h) {
          if (best_pred[h] < 0) touched.push_back(h);
          if (e.run > best_run[h]) {
            best_run[h] = e.run;
            best_pred[h] = static_cast<std::int32_t>(e.state);
          }
        });
      }
    }
    entries[t].reserve(active[t].size());
    for (std::uint32_t s : active[t]) {
      const Entry e{s, 1 + best_run[s], best_pred[s]};
      if (e.run > L) {
        L = e.run;
        end_t = t;
        end_i = entries[t].size();
      }
      entries[t].push_back(e);
    }
    for (std::size_t h : touched) {
      best_run[h] = 0;
      best_pred[h] = -1;
    }
    touched.clear();
  }
  RunStatistic out;
  out.length = L;
  if (L == 0) return out;
  out.start = end_t + 1 - static_cast<std::size_t>(L);
  out.witness.resize(static_cast<std::size_t>(L));
  Entry e = entries[end_t][end_i];
  for (std::size_t t = end_t;; --t) {
    out.witness[t - out.start] = net.node(t, e.state);
    if (t == out.start) break;
    const auto& prev = entries[t - 1];
    const auto it = std::lower_bound(prev.begin(), prev.end(), static_cast<std::uint32_t>(e.pred),
                                     [](const Entry& a, std::uint32_t s) { return a.state < s; });
    e = *it;
  }
  return out;
}

inline std::vector<std::vector<std::uint32_t>> active_states(const std::vector<std::vector<std::int32_t>>& counts,
                                                             double threshold) {
  std::vector<std::vector<std::uint32_t>> out(counts.size());
  for (std::size_t t = 0; t < counts.size(); ++t)
    for (std::size_t s = 0; s < counts[t].size(); ++s)
      if (counts[t][s] > threshold) out[t].push_back(static_cast<std::uint32_t>(s));
  return out;
}

inline RunStatistic lsr(const DetectionNetwork& net, const PointCloud& cloud) {
  return longest_run(net, active_states(net.all_counts(cloud), net.config().significance_count()));
}

inline RunStatistic lsr(const PointCloud& cloud, const DetectionConfig& config) {
  return lsr(DetectionNetwork(config), cloud);
}

/// H1 iff L > log(1/delta).
inline Decision decide_lsr(const RunStatistic& stat, const DetectionConfig& config) {
  return stat.length > config.run_threshold() ? Decision::H1 : Decision::H0;
}

inline Decision decide_glrt(const PathScore& score, double threshold) {
  return static_cast<double>(score.count) > threshold ? Decision::H1 : Decision::H0;
}

// ---------------------------------------------------------------------------
// Monte-Carlo calibration under H0

struct Calibration {
  double value = 0.0;  // calibrated tau (LSR) or count threshold (GLRT)
  double level = 0.05;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<double> samples;  // per-trial critical values, sorted
};

inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
  return Rng(seed).substream(static_cast<std::uint64_t>(trial) + 1).next_u64();
}

namespace detail {

inline double upper_quantile(std::vector<double>& samples, double level) {
  std::sort(samples.begin(), samples.end());
  if (samples.empty()) return 0.0;
  const double pos = std::ceil((1.0 - level) * static_cast<double>(samples.size()) - 1e-9);
  const auto idx = static_cast<std::size_t>(std::clamp(pos, 1.0, static_cast<double>(samples.size()))) - 1;
  return samples[idx];
}

}  // namespace detail

/// Smallest integer c with L <= floor(log(1/delta)) when "significant" means count > c.
inline std::int64_t critical_count(const DetectionNetwork& net, const std::vector<std::vector<std::int32_t>>& counts) {
  const int allowed = static_cast<int>(std::floor(net.config().run_threshold()));
  std::int64_t hi = 0;
  for (const auto& row : counts)
    for (std::int32_t v : row) hi = std::max<std::int64_t>(hi, v);
  std::int64_t lo = -1;
  if (longest_run(net, active_states(counts, static_cast<double>(lo))).length <= allowed) return lo;
  // invariant: L(lo) > allowed, L(hi) <= allowed
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (longest_run(net, active_states(counts, static_cast<double>(mid))).length <= allowed)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

/// tau with H0 false-alarm rate <= level on `trials` uniform clouds of the network's n.
inline Calibration calibrate_lsr_tau(const DetectionNetwork& net, std::size_t trials, double level, std::uint64_t seed) {
  const auto& cfg = net.config();
  Calibration cal{0.0, level, trials, seed, {}};
  const double scale = cfg.significance_scale();
  if (!(scale > 0.0)) throw ConfigError("calibrate_lsr_tau: need n > 0");
  for (std::size_t i = 0; i < trials; ++i) {
    const auto cloud = gen_uniform_cloud(cfg.n, cfg.params.d, trial_seed(seed, i));
    const auto c = critical_count(net, net.all_counts(cloud));
    cal.samples.push_back((static_cast<double>(c) + 0.5) / scale);
  }
  cal.value = detail::upper_quantile(cal.samples, level);
  return cal;
}

/// Count threshold for the path statistic with H0 false-alarm rate <= level.
inline Calibration calibrate_glrt(const DetectionNetwork& net, std::size_t trials, double level, std::uint64_t seed) {
  const auto& cfg = net.config();
  Calibration cal{0.0, level, trials, seed, {}};
  for (std::size_t i = 0; i < trials; ++i) {
    const auto cloud = gen_uniform_cloud(cfg.n, cfg.params.d, trial_seed(seed, i));
    cal.samples.push_back(static_cast<double>(glrt_approx(net, cloud).count));
  }
  cal.value = detail::upper_quantile(cal.samples, level);
  return cal;
}

// ---------------------------------------------------------------------------
// Grey-level images

/// Flat indices of the pixels whose interior meets the slab of `node`.
/// The piece's range over each pixel column is exact for degree <= 1 (corners)
/// and sampled on a 9^k grid otherwise.
inline std::vector<std::size_t> region_pixels(const PixelVolume& vol, const PolyNetworkSpec& spec, const PolyNode& node,
                                              double multiplier) {
  const int k = spec.k(), c = spec.codim();
  if (vol.dim() != spec.params().d) throw ConfigError("region_pixels: volume dimension differs from network");
  const double D = spec.Delta();
  const double pad = multiplier * spec.delta();
  std::vector<int> xlo(static_cast<std::size_t>(k)), xhi(static_cast<std::size_t>(k));
  for (int a = 0; a < k; ++a) {
    const int N = vol.dims[static_cast<std::size_t>(a)];
    const double lo = (node.cell[static_cast<std::size_t>(a)] - 1) * D, hi = node.cell[static_cast<std::size_t>(a)] * D;
    int first = std::max(0, static_cast<int>(std::floor(lo * N)) - 1), last = std::min(N - 1, static_cast<int>(std::ceil(hi * N)));
    while (first <= last && !(static_cast<double>(first + 1) / N > lo)) ++first;
    while (last >= first && !(static_cast<double>(last) / N < hi)) --last;
    if (first > last) return {};
    xlo[static_cast<std::size_t>(a)] = first;
    xhi[static_cast<std::size_t>(a)] = last;
  }
  const int samples = spec.degree() <= 1 ? 2 : 9;
  std::vector<std::size_t> out;
  std::vector<int> ix(xlo);
  std::vector<int> zlo(static_cast<std::size_t>(c)), zhi(static_cast<std::size_t>(c));
  std::vector<double> x(static_cast<std::size_t>(k));
  std::vector<int> idx(static_cast<std::size_t>(k + c));
  while (true) {
    std::vector<double> blo(static_cast<std::size_t>(k)), bhi(static_cast<std::size_t>(k));
    for (int a = 0; a < k; ++a) {
      const int N = vol.dims[static_cast<std::size_t>(a)];
      blo[static_cast<std::size_t>(a)] = std::max((node.cell[static_cast<std::size_t>(a)] - 1) * D, static_cast<double>(ix[static_cast<std::size_t>(a)]) / N);
      bhi[static_cast<std::size_t>(a)] = std::min(node.cell[static_cast<std::size_t>(a)] * D, static_cast<double>(ix[static_cast<std::size_t>(a)] + 1) / N);
    }
    bool empty = false;
    for (int r = 0; r < c && !empty; ++r) {
      double pmin = std::numeric_limits<double>::infinity(), pmax = -pmin;
      std::vector<int> g(static_cast<std::size_t>(k), 0);
      while (true) {
        for (int a = 0; a < k; ++a)
          x[static_cast<std::size_t>(a)] = blo[static_cast<std::size_t>(a)] +
                                           (bhi[static_cast<std::size_t>(a)] - blo[static_cast<std::size_t>(a)]) * g[static_cast<std::size_t>(a)] / (samples - 1);
        const double v = eval_coefs(spec, node.cell, node.coefs[static_cast<std::size_t>(r)], x);
        pmin = std::min(pmin, v);
        pmax = std::max(pmax, v);
        int a = 0;
        for (; a < k; ++a) {
          if (++g[static_cast<std::size_t>(a)] < samples) break;
          g[static_cast<std::size_t>(a)] = 0;
        }
        if (a == k) break;
      }
      const int N = vol.dims[static_cast<std::size_t>(k + r)];
      const double lo = pmin - pad, hi = pmax + pad;
      int first = std::max(0, static_cast<int>(std::floor(lo * N)) - 1), last = std::min(N - 1, static_cast<int>(std::ceil(hi * N)));
      while (first <= last && !(static_cast<double>(first + 1) / N > lo)) ++first;
      while (last >= first && !(static_cast<double>(last) / N < hi)) --last;
      if (first > last) empty = true;
      zlo[static_cast<std::size_t>(r)] = first;
      zhi[static_cast<std::size_t>(r)] = last;
    }
    if (!empty) {
      std::vector<int> iz(zlo);
      while (true) {
        for (int a = 0; a < k; ++a) idx[static_cast<std::size_t>(a)] = ix[static_cast<std::size_t>(a)];
        for (int r = 0; r < c; ++r) idx[static_cast<std::size_t>(k + r)] = iz[static_cast<std::size_t>(r)];
        out.push_back(vol.index(idx));
        int r = 0;
        for (; r < c; ++r) {
          if (++iz[static_cast<std::size_t>(r)] <= zhi[static_cast<std::size_t>(r)]) break;
          iz[static_cast<std::size_t>(r)] = zlo[static_cast<std::size_t>(r)];
        }
        if (r == c) break;
      }
    }
    int a = 0;
    for (; a < k; ++a) {
      if (++ix[static_cast<std::size_t>(a)] <= xhi[static_cast<std::size_t>(a)]) break;
      ix[static_cast<std::size_t>(a)] = xlo[static_cast<std::size_t>(a)];
    }
    if (a == k) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// <Y, xi_S> with xi_S the unit-norm indicator of the region's pixels; 0 when no pixel meets S.
inline double image_node_statistic(const PixelVolume& vol, const PolyNetworkSpec& spec, const PolyNode& node,
                                   double multiplier) {
  const auto px = region_pixels(vol, spec, node, multiplier);
  if (px.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i : px) sum += vol.data[i];
  return sum / std::sqrt(static_cast<double>(px.size()));
}

inline double image_node_statistic(const PixelVolume& vol, const PolyNode& node, const DetectionConfig& config) {
  return image_node_statistic(vol, config.spec(), node, config.multiplier);
}

/// Adds mu * xi_S for the region of `node`.
inline void add_region_signal(PixelVolume& vol, const PolyNode& node, const DetectionConfig& config, double mu) {
  const auto px = region_pixels(vol, config.spec(), node, config.multiplier);
  if (px.empty()) return;
  const double v = mu / std::sqrt(static_cast<double>(px.size()));
  for (std::size_t i : px) vol.data[i] += v;
}

/// sqrt(2 log #nodes).
inline double image_tau(const DetectionConfig& config) {
  const auto nodes = static_cast<double>(count_nodes(config.spec(), 1e18));
  return std::sqrt(2.0 * std::log(std::max(nodes, 2.0)));
}

inline std::vector<std::vector<double>> image_statistics(const DetectionNetwork& net, const PixelVolume& vol) {
  const auto& cfg = net.config();
  std::vector<std::vector<double>> out(net.steps(), std::vector<double>(net.state_count()));
  for (std::size_t t = 0; t < net.steps(); ++t)
    for (std::size_t s = 0; s < net.state_count(); ++s) out[t][s] = image_node_statistic(vol, net.spec(), net.node(t, s), cfg.multiplier);
  return out;
}

inline RunStatistic image_lsr(const DetectionNetwork& net, const PixelVolume& vol, std::optional<double> tau = {}) {
  const double thr = tau.value_or(image_tau(net.config()));
  const auto stats = image_statistics(net, vol);
  std::vector<std::vector<std::uint32_t>> active(stats.size());
  for (std::size_t t = 0; t < stats.size(); ++t)
    for (std::size_t s = 0; s < stats[t].size(); ++s)
      if (stats[t][s] > thr) active[t].push_back(static_cast<std::uint32_t>(s));
  return longest_run(net, active);
}

inline RunStatistic image_lsr(const PixelVolume& vol, const DetectionConfig& config, std::optional<double> tau = {}) {
  return image_lsr(DetectionNetwork(config), vol, tau);
}

}  // namespace gcnet
