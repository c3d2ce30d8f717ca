#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gcnet/error.hpp"
#include "gcnet/rng.hpp"
#include "gcnet/smoothness.hpp"

namespace gcnet {

/// Parameters of the curve class Gamma(alpha, lambda, kappa), alpha in (1, 2].
struct CurveClass {
  double alpha = 2.0;
  double lambda = 1.0;
  double kappa = 1.0;

  void validate() const {
    if (!(alpha > 1.0) || alpha > 2.0) throw ConfigError("CurveClass: alpha must lie in (1, 2]");
    if (!(lambda > 0.0)) throw ConfigError("CurveClass: lambda must be > 0");
    if (!(kappa > 0.0)) throw ConfigError("CurveClass: kappa must be > 0");
  }
};

/// A curve in [0,1]^d parametrized by arclength on [0, length()].
class CurveOracle {
 public:
  virtual ~CurveOracle() = default;
  virtual int dim() const = 0;
  virtual double length() const = 0;
  virtual const CurveClass& curve_class() const = 0;
  virtual void position(double s, std::span<double> out) const = 0;
  virtual void tangent(double s, std::span<double> out) const = 0;

  std::vector<double> position(double s) const {
    std::vector<double> out(static_cast<std::size_t>(dim()));
    position(s, out);
    return out;
  }
  std::vector<double> tangent(double s) const {
    std::vector<double> out(static_cast<std::size_t>(dim()));
    tangent(s, out);
    return out;
  }
};

/// Straight segment from a to b.
class LineCurve final : public CurveOracle {
 public:
  LineCurve(std::vector<double> a, std::vector<double> b, CurveClass cls = {})
      : a_(std::move(a)), b_(std::move(b)), cls_(cls) {
    if (a_.size() != b_.size() || a_.empty()) throw ConfigError("LineCurve: endpoint dimensions differ");
    double sq = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i) sq += (b_[i] - a_[i]) * (b_[i] - a_[i]);
    length_ = std::sqrt(sq);
    if (!(length_ > 0.0)) throw ConfigError("LineCurve: degenerate segment");
  }

  using CurveOracle::position;
  using CurveOracle::tangent;
  int dim() const override { return static_cast<int>(a_.size()); }
  double length() const override { return length_; }
  const CurveClass& curve_class() const override { return cls_; }
  void position(double s, std::span<double> out) const override {
    for (std::size_t i = 0; i < a_.size(); ++i) out[i] = a_[i] + (b_[i] - a_[i]) * (s / length_);
  }
  void tangent(double, std::span<double> out) const override {
    for (std::size_t i = 0; i < a_.size(); ++i) out[i] = (b_[i] - a_[i]) / length_;
  }

 private:
  std::vector<double> a_, b_;
  CurveClass cls_;
  double length_ = 0.0;
};

/// Regular parametric curve p(t), t in [t0, t1], reparametrized by arclength.
/// The arclength table uses composite 8-point Gauss-Legendre quadrature; the
/// inverse is a bracketed Newton iteration.
class ParametricCurve final : public CurveOracle {
 public:
  using Map = std::function<void(double, std::span<double>)>;

  ParametricCurve(int d, double t0, double t1, Map p, Map dp, Map ddp, CurveClass cls, int panels = 1024)
      : d_(d), t0_(t0), t1_(t1), p_(std::move(p)), dp_(std::move(dp)), ddp_(std::move(ddp)), cls_(cls) {
    if (d < 1 || !(t1 > t0)) throw ConfigError("ParametricCurve: bad parameter interval");
    static constexpr std::array<double, 8> xs = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                                 -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                                 0.7966664774136267,  0.9602898564975363};
    static constexpr std::array<double, 8> ws = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                 0.2223810344533745, 0.1012285362903763};
    knots_.resize(static_cast<std::size_t>(panels) + 1);
    cumulative_.assign(knots_.size(), 0.0);
    const double h = (t1 - t0) / panels;
    for (int i = 0; i <= panels; ++i) knots_[static_cast<std::size_t>(i)] = t0 + h * i;
    for (int i = 0; i < panels; ++i) {
      const double mid = t0 + h * (i + 0.5);
      double acc = 0.0;
      for (std::size_t q = 0; q < xs.size(); ++q) acc += ws[q] * speed(mid + 0.5 * h * xs[q]);
      cumulative_[static_cast<std::size_t>(i) + 1] = cumulative_[static_cast<std::size_t>(i)] + 0.5 * h * acc;
    }
    length_ = cumulative_.back();
  }

  using CurveOracle::position;
  using CurveOracle::tangent;
  int dim() const override { return d_; }
  double length() const override { return length_; }
  const CurveClass& curve_class() const override { return cls_; }
  void set_curve_class(CurveClass cls) { cls_ = cls; }

  void position(double s, std::span<double> out) const override { p_(parameter_at(s), out); }

  void tangent(double s, std::span<double> out) const override {
    dp_(parameter_at(s), out);
    const double v = norm2(out);
    for (auto& x : out) x /= v;
  }

  /// Second arclength derivative gamma''(s).
  void curvature_vector(double s, std::span<double> out) const {
    const double t = parameter_at(s);
    std::vector<double> v(static_cast<std::size_t>(d_)), a(v.size());
    dp_(t, v);
    ddp_(t, a);
    const double sp2 = dot(v, v);
    const double va = dot(v, a);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (a[i] * sp2 - v[i] * va) / (sp2 * sp2);
  }

  /// Half the maximal sup-norm curvature, the kappa of the alpha = 2 class.
  double estimate_kappa(int samples = 4096) const {
    std::vector<double> c(static_cast<std::size_t>(d_));
    double worst = 0.0;
    for (int i = 0; i <= samples; ++i) {
      curvature_vector(length_ * i / samples, c);
      worst = std::max(worst, sup_norm(c));
    }
    return 0.5 * worst;
  }

  double parameter_at(double s) const {
    if (s <= 0.0) return t0_;
    if (s >= length_) return t1_;
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    const std::size_t i = static_cast<std::size_t>(std::distance(cumulative_.begin(), it)) - 1;
    double lo = knots_[i], hi = knots_[i + 1];
    double t = lo + (hi - lo) * (s - cumulative_[i]) / (cumulative_[i + 1] - cumulative_[i]);
    for (int iter = 0; iter < 40; ++iter) {
      const double err = arclength_from(i, t) - s;
      if (std::fabs(err) < 1e-15) break;
      if (err > 0.0) hi = t; else lo = t;
      double next = t - err / speed(t);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::fabs(next - t) < 1e-16) break;
      t = next;
    }
    return t;
  }

 private:
  static double dot(std::span<const double> a, std::span<const double> b) {
    double out = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) out += a[i] * b[i];
    return out;
  }
  static double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

  double speed(double t) const {
    std::vector<double> v(static_cast<std::size_t>(d_));
    dp_(t, v);
    return norm2(v);
  }

  // Arclength from t0 to t with t inside panel i (8-point rule on the partial panel).
  double arclength_from(std::size_t i, double t) const {
    static constexpr std::array<double, 8> xs = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                                 -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                                 0.7966664774136267,  0.9602898564975363};
    static constexpr std::array<double, 8> ws = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                 0.2223810344533745, 0.1012285362903763};
    const double a = knots_[i];
    const double mid = 0.5 * (a + t), half = 0.5 * (t - a);
    double acc = 0.0;
    for (std::size_t q = 0; q < xs.size(); ++q) acc += ws[q] * speed(mid + half * xs[q]);
    return cumulative_[i] + half * acc;
  }

  int d_;
  double t0_, t1_;
  Map p_, dp_, ddp_;
  CurveClass cls_;
  std::vector<double> knots_;
  std::vector<double> cumulative_;
  double length_ = 0.0;
};

/// Graph curve t -> (t, y0 + A sin(2 pi f t + phase)), t in [0, 1], in Gamma(2, lambda, kappa)
/// with kappa half the maximal sup-norm curvature (sampled, inflated by `margin`).
inline ParametricCurve sinusoid_curve(double y0, double A, double f, double phase, double lambda = 2.0,
                                      double margin = 1.05) {
  const double w = 2.0 * 3.14159265358979323846 * f;
  ParametricCurve g(
      2, 0.0, 1.0,
      [=](double t, std::span<double> o) {
        o[0] = t;
        o[1] = y0 + A * std::sin(w * t + phase);
      },
      [=](double t, std::span<double> o) {
        o[0] = 1.0;
        o[1] = A * w * std::cos(w * t + phase);
      },
      [=](double t, std::span<double> o) {
        o[0] = 0.0;
        o[1] = -A * w * w * std::sin(w * t + phase);
      },
      CurveClass{2.0, lambda, 1.0});
  g.set_curve_class(CurveClass{2.0, lambda, std::max(margin * g.estimate_kappa(), 1e-3)});
  return g;
}

struct CurveReport {
  std::size_t samples = 0;
  std::size_t unit_tangent = 0;  // | |gamma'|_2 - 1 | > tol
  std::size_t taylor = 0;        // first-order Taylor bound with kappa
  std::size_t tangent_holder = 0;
  std::size_t chord = 0;
  std::size_t range = 0;         // outside [0,1]^d
  bool length_ok = true;         // length <= lambda
  double worst_excess = 0.0;
  bool ok() const { return length_ok && unit_tangent + taylor + tangent_holder + chord + range == 0; }
};

/// Sampled falsification of the class conditions of a curve.
inline CurveReport validate_curve(const CurveOracle& g, std::size_t samples, std::uint64_t seed, double tol = 1e-9) {
  const auto& cls = g.curve_class();
  const double len = g.length();
  const std::size_t d = static_cast<std::size_t>(g.dim());
  Rng rng(seed);
  CurveReport rep;
  rep.length_ok = len <= cls.lambda + tol;
  std::vector<double> ps(d), pt(d), pr(d), ts(d), tt(d), tr(d), w(d);
  auto excess = [&](double v) { rep.worst_excess = std::max(rep.worst_excess, v); };
  for (std::size_t n = 0; n < samples; ++n) {
    std::array<double, 3> u = {rng.uniform(0.0, len), rng.uniform(0.0, len), rng.uniform(0.0, len)};
    std::sort(u.begin(), u.end());
    const double r = u[0], s = u[1], t = u[2];
    g.position(r, pr);
    g.position(s, ps);
    g.position(t, pt);
    g.tangent(r, tr);
    g.tangent(s, ts);
    g.tangent(t, tt);
    double sq = 0.0;
    for (double x : ts) sq += x * x;
    if (std::fabs(std::sqrt(sq) - 1.0) > tol) ++rep.unit_tangent, excess(std::fabs(std::sqrt(sq) - 1.0));
    for (double x : ps)
      if (x < -tol || x > 1.0 + tol) ++rep.range, excess(std::max(-x, x - 1.0));
    // forward and backward Taylor expansions around s
    for (double other : {r, t}) {
      const auto& po = other == r ? pr : pt;
      for (std::size_t i = 0; i < d; ++i) w[i] = po[i] - ps[i] - (other - s) * ts[i];
      const double allowed = cls.kappa * std::pow(std::fabs(other - s), cls.alpha);
      if (sup_norm(w) > allowed + tol) ++rep.taylor, excess(sup_norm(w) - allowed);
    }
    const double dtan = sup_distance(tt, tr);
    const double tan_allowed = 2.0 * cls.kappa * std::pow(t - r, cls.alpha - 1.0);
    if (dtan > tan_allowed + tol) ++rep.tangent_holder, excess(dtan - tan_allowed);
    if (t > r) {
      for (std::size_t i = 0; i < d; ++i) w[i] = ps[i] - pr[i] - ((s - r) / (t - r)) * (pt[i] - pr[i]);
      const double allowed = 2.0 * cls.kappa * std::pow(t - r, cls.alpha);
      if (sup_norm(w) > allowed + tol) ++rep.chord, excess(sup_norm(w) - allowed);
    }
    ++rep.samples;
  }
  return rep;
}

}  // namespace gcnet
