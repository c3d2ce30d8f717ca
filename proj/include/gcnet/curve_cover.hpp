#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "gcnet/beam_net.hpp"
#include "gcnet/curve.hpp"
#include "gcnet/error.hpp"

namespace gcnet {

/// Chain [b_0,b_1],[b_1,b_2],... stored as its vertex sequence.
struct BeamChain {
  GridSpec grid;
  std::vector<GridPoint> points;
  bool beamlets = false;
  std::vector<std::size_t> parent;  // beamlet chains: index of the source beam per segment

  std::size_t size() const { return points.size() < 2 ? 0 : points.size() - 1; }
  Segment segment(std::size_t i) const { return Segment::make(points[i], points[i + 1]); }
};

struct CoverOptions {
  int K = 2;                     // safety margin added to j(alpha, kappa)
  std::size_t tube_samples = 10000;
  bool throw_on_violation = true;
};

struct CoverReport {
  std::size_t beams = 0;
  double claim1_bound = 0.0;      // lambda 2^j + 2
  bool claim1 = true;
  std::size_t claim2_failures = 0;  // segments that are not beams
  std::size_t claim3_failures = 0;  // consecutive pairs failing the beam predicate
  std::size_t claim4_failures = 0;  // curve samples outside their tube
  std::size_t sdiff_failures = 0;   // Delta - slack_i <= s_{i+1} - s_i < 3 sqrt(d) Delta
  std::size_t sdiff_strict_failures = 0;  // s_{i+1} - s_i < Delta (slack from snapped starts)
  double max_snap = 0.0;            // max |b_i - gamma(s_i)|
  bool snap_ok = true;              // max_snap <= delta / 2
  double max_tube_distance = 0.0;
  std::vector<double> arclengths;
  std::vector<BeamKind> kinds;

  bool all_pass() const {
    return claim1 && claim2_failures == 0 && claim3_failures == 0 && claim4_failures == 0 && sdiff_failures == 0 &&
           snap_ok;
  }
  std::string summary() const {
    std::ostringstream os;
    os << "beams=" << beams << " claim1=" << (claim1 ? "pass" : "FAIL") << " (bound " << claim1_bound << ")"
       << " claim2_failures=" << claim2_failures << " claim3_failures=" << claim3_failures
       << " claim4_failures=" << claim4_failures << " sdiff_failures=" << sdiff_failures << " max_snap=" << max_snap
       << (snap_ok ? "" : " (exceeds delta/2)");
    return os.str();
  }
};

struct CoverResult {
  BeamChain chain;
  CoverReport report;
};

/// ceil((J + log2 kappa) / (1 + alpha)), the smallest scale at which kappa Delta^alpha <= delta.
inline int curve_scale(const CurveClass& cls, int J) {
  cls.validate();
  return static_cast<int>(std::ceil((J + std::log2(cls.kappa)) / (1.0 + cls.alpha) - 1e-12));
}

/// Smallest J <= max_J with j = curve_scale + K and j <= J/2 - 2 (so delta <= Delta/16).
inline std::pair<int, int> choose_cover_scale(const CurveClass& cls, int K = 2, int max_J = 30) {
  for (int J = 4; J <= max_J; ++J) {
    const int j = std::max(1, curve_scale(cls, J) + K);
    if (2 * (j + 2) <= J) return {j, J};
  }
  throw ConfigError("choose_cover_scale: no admissible scale with J <= " + std::to_string(max_J));
}

namespace detail {

// gamma extended linearly along the endpoint tangents.
class ExtendedCurve {
 public:
  explicit ExtendedCurve(const CurveOracle& g) : g_(g), d_(static_cast<std::size_t>(g.dim())) {
    p0_ = g.position(0.0);
    t0_ = g.tangent(0.0);
    p1_ = g.position(g.length());
    t1_ = g.tangent(g.length());
  }
  std::size_t dim() const { return d_; }
  double length() const { return g_.length(); }
  void position(double s, std::span<double> out) const {
    if (s < 0.0) {
      for (std::size_t i = 0; i < d_; ++i) out[i] = p0_[i] + s * t0_[i];
    } else if (s > g_.length()) {
      for (std::size_t i = 0; i < d_; ++i) out[i] = p1_[i] + (s - g_.length()) * t1_[i];
    } else {
      g_.position(s, out);
    }
  }
  double coord(double s, int r) const {
    std::vector<double> p(d_);
    position(s, p);
    return p[static_cast<std::size_t>(r)];
  }
  void tangent(double s, std::span<double> out) const {
    if (s < 0.0) std::copy(t0_.begin(), t0_.end(), out.begin());
    else if (s > g_.length()) std::copy(t1_.begin(), t1_.end(), out.begin());
    else g_.tangent(s, out);
  }

 private:
  const CurveOracle& g_;
  std::size_t d_;
  std::vector<double> p0_, t0_, p1_, t1_;
};

inline int dominant_axis(std::span<const double> v) {
  int best = 0;
  for (std::size_t r = 1; r < v.size(); ++r)
    if (std::fabs(v[r]) > std::fabs(v[static_cast<std::size_t>(best)])) best = static_cast<int>(r);
  return best;
}

// Nearest multiple of q (in delta0 units) to x (real), ties toward the smaller multiple.
inline std::int64_t snap_units(double x, const GridSpec& g, std::int64_t q) {
  const double u = std::ldexp(x, g.J) / static_cast<double>(q);
  const double fl = std::floor(u);
  const double m = (u - fl > 0.5) ? fl + 1.0 : fl;
  return static_cast<std::int64_t>(m) * q;
}

inline bool inside_cube(std::span<const double> p, double tol) {
  for (double x : p)
    if (x < -tol || x > 1.0 + tol) return false;
  return true;
}

}  // namespace detail

/// Builds the beam chain covering gamma at scale (j, J) by the crossing-arclength
/// construction, then audits the four Claims, the spacing bound and the snap bound.
inline CoverResult cover_curve(const CurveOracle& gamma, int j, int J, const CoverOptions& opt = {}) {
  const GridSpec g(gamma.dim(), j, J);
  g.require_beam_scale();
  const CurveClass& cls = gamma.curve_class();
  cls.validate();
  const detail::ExtendedCurve ext(gamma);
  const std::size_t d = ext.dim();
  const double Delta = g.Delta(), delta = g.delta(), delta0 = g.delta0();
  const double len = gamma.length();
  const double cap = 3.0 * std::sqrt(static_cast<double>(d)) * Delta;
  const double geom_tol = 1e-12;
  std::vector<double> p(d), tan(d);
  const auto fail = [](const std::string& why) { throw ConfigError("curve not coverable at this scale: " + why); };

  // starting arclength: extend backward until gamma_r hits an r-hyperplane
  ext.tangent(0.0, tan);
  int r = detail::dominant_axis(tan);
  double s_prev = 0.0;
  double level = 0.0;
  {
    const double x = ext.coord(0.0, r);
    const double m = x / Delta;
    if (std::fabs(m - std::nearbyint(m)) * Delta <= delta0 / 16.0) {
      level = std::nearbyint(m) * Delta;
    } else {
      const double t = tan[static_cast<std::size_t>(r)];
      level = (t > 0.0 ? std::floor(m) : std::ceil(m)) * Delta;
      s_prev = -std::fabs(x - level) / std::fabs(t);
      if (-s_prev > cap) fail("backward extension exceeds cap");
    }
  }
  std::vector<double> s_list{s_prev};
  std::vector<int> level_axis{r};
  std::vector<double> level_list{level};
  std::vector<double> slack_list;

  const std::size_t max_steps = static_cast<std::size_t>(std::ceil((len + 2 * cap) / Delta)) + 8;
  while (s_prev < len) {
    if (s_list.size() > max_steps) fail("crossing sequence does not terminate");
    ext.tangent(s_prev, tan);
    r = detail::dominant_axis(tan);
    double a = r == level_axis.back() ? level_list.back() : ext.coord(s_prev, r);
    // if the snapped gridpoint already lies on an r-hyperplane, advance from it
    double slack = 0.0;
    if (r != level_axis.back()) {
      const std::int64_t b = detail::snap_units(std::clamp(a, 0.0, 1.0), g, g.delta_units());
      if (b % g.Delta_units() == 0) {
        slack = std::fabs(a - std::ldexp(static_cast<double>(b), -J));
        a = std::ldexp(static_cast<double>(b), -J);
      }
    }
    slack_list.push_back(slack);
    const double up = std::ceil((a + Delta) / Delta - 1e-9) * Delta;
    const double down = std::floor((a - Delta) / Delta + 1e-9) * Delta;
    const auto reached = [&](double s) {
      const double x = ext.coord(s, r);
      return x >= up || x <= down;
    };
    const double limit = std::min(s_prev + cap, len + cap);
    const double step = Delta / 8.0;
    double lo = s_prev, hi = s_prev;
    bool found = false;
    while (hi < limit) {
      lo = hi;
      hi = std::min(hi + step, limit);
      if (reached(hi)) {
        found = true;
        break;
      }
    }
    if (!found) fail("no hyperplane crossing within 3 sqrt(d) Delta");
    while (hi - lo > delta0 / 16.0) {
      const double mid = 0.5 * (lo + hi);
      if (reached(mid)) hi = mid; else lo = mid;
    }
    const double x = ext.coord(hi, r);
    s_prev = hi;
    s_list.push_back(hi);
    level_axis.push_back(r);
    level_list.push_back(x >= up ? up : down);
  }

  // snap to delta-gridpoints; the crossing coordinate is exact
  CoverResult res;
  res.chain.grid = g;
  CoverReport& rep = res.report;
  for (std::size_t i = 0; i < s_list.size(); ++i) {
    ext.position(s_list[i], p);
    if (!detail::inside_cube(p, delta0)) fail("extension leaves the unit cube");
    GridPoint b;
    double err = 0.0;
    for (std::size_t q = 0; q < d; ++q) {
      const double x = std::clamp(p[q], 0.0, 1.0);
      b.c[q] = static_cast<int>(q) == level_axis[i] ? detail::snap_units(level_list[i], g, g.Delta_units())
                                                    : detail::snap_units(x, g, g.delta_units());
      err = std::max(err, std::fabs(std::ldexp(static_cast<double>(b.c[q]), -J) - p[q]));
    }
    rep.max_snap = std::max(rep.max_snap, err);
    res.chain.points.push_back(b);
  }
  rep.arclengths = s_list;
  rep.beams = res.chain.size();

  // audit
  rep.claim1_bound = cls.lambda * std::ldexp(1.0, j) + 2.0;
  rep.claim1 = static_cast<double>(rep.beams) <= rep.claim1_bound;
  rep.snap_ok = rep.max_snap <= delta / 2.0 + geom_tol;
  for (std::size_t i = 0; i + 1 < s_list.size(); ++i) {
    const double ds = s_list[i + 1] - s_list[i];
    if (ds < Delta - delta0 / 8.0) ++rep.sdiff_strict_failures;
    if (ds < Delta - slack_list[i] - delta0 / 8.0 || ds >= cap) ++rep.sdiff_failures;
    const auto kind = classify_beam(g, res.chain.points[i], res.chain.points[i + 1]);
    if (kind) rep.kinds.push_back(*kind);
    else ++rep.claim2_failures;
    if (i + 2 < s_list.size() &&
        !beam_triple(g, res.chain.points[i], res.chain.points[i + 1], res.chain.points[i + 2]))
      ++rep.claim3_failures;
  }
  if (rep.beams > 0 && opt.tube_samples > 0) {
    std::size_t seg = 0;
    std::vector<double> a(d), b(d);
    for (std::size_t n = 0; n < opt.tube_samples; ++n) {
      const double s = opt.tube_samples == 1 ? 0.0 : len * static_cast<double>(n) / static_cast<double>(opt.tube_samples - 1);
      while (seg + 1 < rep.beams && s_list[seg + 1] < s) ++seg;
      gamma.position(s, p);
      for (std::size_t q = 0; q < d; ++q) {
        a[q] = std::ldexp(static_cast<double>(res.chain.points[seg].c[q]), -J);
        b[q] = std::ldexp(static_cast<double>(res.chain.points[seg + 1].c[q]), -J);
      }
      double dist = sup_distance_to_segment(p, a, b);
      // a sample exactly at a crossing belongs to both adjacent beams
      if (seg + 1 < rep.beams && s_list[seg + 1] - s <= delta0) {
        for (std::size_t q = 0; q < d; ++q) {
          a[q] = b[q];
          b[q] = std::ldexp(static_cast<double>(res.chain.points[seg + 2].c[q]), -J);
        }
        dist = std::min(dist, sup_distance_to_segment(p, a, b));
      }
      rep.max_tube_distance = std::max(rep.max_tube_distance, dist);
      if (dist > delta + geom_tol) ++rep.claim4_failures;
    }
  }
  if (opt.throw_on_violation && !rep.all_pass())
    throw ClaimViolation("cover_curve: " + rep.summary() + " at j=" + std::to_string(j) + " J=" + std::to_string(J));
  return res;
}

/// Replaces every beam by the beamlets joining its successive Delta-hyperplane
/// crossings, each snapped to the nearest delta0-gridpoint on its hyperplane.
inline BeamChain beams_to_beamlets(const BeamChain& chain) {
  const GridSpec& g = chain.grid;
  BeamChain out;
  out.grid = g;
  out.beamlets = true;
  if (chain.points.empty()) return out;
  out.points.push_back(chain.points.front());
  const std::int64_t D = g.Delta_units();
  for (std::size_t i = 0; i + 1 < chain.points.size(); ++i) {
    const GridPoint& a = chain.points[i];
    const GridPoint& b = chain.points[i + 1];
    struct Cross {
      double t;
      int axis;
      std::int64_t level;
    };
    std::vector<Cross> cross;
    for (int r = 0; r < g.d; ++r) {
      const auto ri = static_cast<std::size_t>(r);
      const std::int64_t lo = std::min(a.c[ri], b.c[ri]), hi = std::max(a.c[ri], b.c[ri]);
      if (lo == hi) continue;
      for (std::int64_t m = detail::floor_div(lo + D - 1, D) * D; m <= hi; m += D) {
        const double t = static_cast<double>(m - a.c[ri]) / static_cast<double>(b.c[ri] - a.c[ri]);
        if (t > 0.0 && t < 1.0) cross.push_back({t, r, m});
      }
    }
    std::sort(cross.begin(), cross.end(), [](const Cross& x, const Cross& y) { return x.t < y.t; });
    for (const auto& c : cross) {
      GridPoint p;
      for (int q = 0; q < g.d; ++q) {
        const auto qi = static_cast<std::size_t>(q);
        if (q == c.axis) {
          p.c[qi] = c.level;
        } else {
          const double x = static_cast<double>(a.c[qi]) + c.t * static_cast<double>(b.c[qi] - a.c[qi]);
          const double fl = std::floor(x);
          p.c[qi] = static_cast<std::int64_t>(x - fl > 0.5 ? fl + 1.0 : fl);
        }
      }
      if (!(p == out.points.back())) {
        out.points.push_back(p);
        out.parent.push_back(i);
      }
    }
    if (!(b == out.points.back())) {
      out.points.push_back(b);
      out.parent.push_back(i);
    }
  }
  return out;
}

struct BeamletChainReport {
  std::size_t beamlets = 0;
  std::size_t invalid = 0;        // segments failing is_beamlet
  std::size_t continuation_failures = 0;
  std::size_t max_per_beam = 0;
  bool ok() const { return invalid == 0 && continuation_failures == 0; }
};

inline BeamletChainReport audit_beamlet_chain(const BeamChain& beams, const BeamChain& beamlets) {
  const GridSpec& g = beamlets.grid;
  BeamletChainReport rep;
  rep.beamlets = beamlets.size();
  for (std::size_t i = 0; i + 1 < beamlets.points.size(); ++i) {
    if (!is_beamlet(g, beamlets.points[i], beamlets.points[i + 1])) ++rep.invalid;
    if (i + 2 < beamlets.points.size() &&
        !beamlet_triple(g, beamlets.points[i], beamlets.points[i + 1], beamlets.points[i + 2]))
      ++rep.continuation_failures;
  }
  std::vector<std::size_t> per_beam(beams.size(), 0);
  for (auto i : beamlets.parent) ++per_beam[i];
  for (auto n : per_beam) rep.max_per_beam = std::max(rep.max_per_beam, n);
  return rep;
}

}  // namespace gcnet
