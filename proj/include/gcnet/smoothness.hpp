#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "gcnet/error.hpp"
#include "gcnet/rng.hpp"

namespace gcnet {

/// Parameters of the Hölder class H^{k,d-k}(alpha, beta).
///
/// The polynomial degree is the largest integer strictly below alpha, so the
/// top derivatives are Hölder with exponent alpha - degree in (0, 1]. For
/// alpha in (1, 2] this gives linear pieces with Lipschitz slopes.
struct HolderParams {
  int k = 1;
  int d = 2;
  double alpha = 2.0;
  double beta = 1.0;

  int degree() const { return static_cast<int>(std::ceil(alpha)) - 1; }
  double exponent() const { return alpha - degree(); }
  int codim() const { return d - k; }

  void validate() const {
    if (k < 1) throw ConfigError("HolderParams: k must be >= 1");
    if (d < k) throw ConfigError("HolderParams: d must be >= k");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("HolderParams: alpha must be > 0");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("HolderParams: beta must be > 0");
  }
};

using MultiIndex = std::vector<int>;

inline double factorial(int n) {
  double out = 1.0;
  for (int i = 2; i <= n; ++i) out *= i;
  return out;
}

inline double multi_factorial(std::span<const int> s) {
  double out = 1.0;
  for (int si : s) out *= factorial(si);
  return out;
}

inline int order(std::span<const int> s) {
  int total = 0;
  for (int si : s) total += si;
  return total;
}

inline double binomial(int n, int r) {
  if (r < 0 || r > n) return 0.0;
  double out = 1.0;
  for (int i = 1; i <= r; ++i) out = out * (n - r + i) / i;
  return std::round(out);
}

/// All multi-indices s in N^k with |s| <= degree, graded by |s| and
/// lexicographic within a grade. Also tabulates s + t e_i for the neighbor
/// predicate.
class MultiIndexSet {
 public:
  MultiIndexSet(int k, int degree) : k_(k), degree_(degree) {
    for (int total = 0; total <= degree; ++total) {
      MultiIndex s(static_cast<std::size_t>(k), 0);
      emit(s, 0, total);
    }
    for (std::size_t a = 0; a < indices_.size(); ++a) lookup_[indices_[a]] = static_cast<int>(a);
    shift_.assign(indices_.size() * static_cast<std::size_t>(k) * static_cast<std::size_t>(degree + 1), -1);
    for (std::size_t a = 0; a < indices_.size(); ++a) {
      for (int i = 0; i < k; ++i) {
        for (int t = 0; t <= degree; ++t) {
          MultiIndex shifted = indices_[a];
          shifted[static_cast<std::size_t>(i)] += t;
          if (order(shifted) > degree) continue;
          shift_[shift_slot(a, i, t)] = lookup_.at(shifted);
        }
      }
    }
  }

  int k() const { return k_; }
  int degree() const { return degree_; }
  std::size_t size() const { return indices_.size(); }
  const MultiIndex& operator[](std::size_t a) const { return indices_[a]; }
  const std::vector<MultiIndex>& all() const { return indices_; }

  int index_of(const MultiIndex& s) const {
    const auto it = lookup_.find(s);
    return it == lookup_.end() ? -1 : it->second;
  }

  // Position of s_a + t e_i, or -1 when its order exceeds the degree.
  int shifted(std::size_t a, int axis, int t) const { return shift_[shift_slot(a, axis, t)]; }

 private:
  void emit(MultiIndex& s, int pos, int remaining) {
    if (pos == k_ - 1) {
      s[static_cast<std::size_t>(pos)] = remaining;
      indices_.push_back(s);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      s[static_cast<std::size_t>(pos)] = v;
      emit(s, pos + 1, remaining - v);
    }
  }

  std::size_t shift_slot(std::size_t a, int axis, int t) const {
    return (a * static_cast<std::size_t>(k_) + static_cast<std::size_t>(axis)) *
               static_cast<std::size_t>(degree_ + 1) +
           static_cast<std::size_t>(t);
  }

  int k_;
  int degree_;
  std::vector<MultiIndex> indices_;
  std::map<MultiIndex, int> lookup_;
  std::vector<int> shift_;
};

/// Closed-form constants of the class used throughout the network construction.
struct DerivedConstants {
  double c1 = 0.0;  // sum over |s| = degree of 1/s!
  double c2 = 0.0;  // sum over |s| <= degree of 2^{-|s|}/s!
  double c3 = 0.0;  // number of multi-indices with |s| <= degree
  double c4 = 0.0;  // sum of |s| over those multi-indices
  double c0 = 0.0;  // slab half-thickness multiplier, 2^{-alpha} + c2/2
  double rho = 0.0; // k / (k + alpha (d - k))
};

inline DerivedConstants compute_constants(const HolderParams& params) {
  params.validate();
  const int deg = params.degree();
  const MultiIndexSet set(params.k, deg);
  DerivedConstants out;
  for (const auto& s : set.all()) {
    const int o = order(s);
    const double inv_fact = 1.0 / multi_factorial(s);
    if (o == deg) out.c1 += inv_fact;
    out.c2 += std::ldexp(inv_fact, -o);
  }
  for (int s = 0; s <= deg; ++s) {
    const double count = binomial(s + params.k - 1, params.k - 1);
    out.c3 += count;
    out.c4 += s * count;
  }
  out.c0 = std::pow(2.0, -params.alpha) + out.c2 / 2.0;
  out.rho = params.k / (params.k + params.alpha * (params.d - params.k));
  return out;
}

/// delta = c1 * beta * Delta^alpha.
inline double scale_link(const HolderParams& params, double Delta) {
  if (!(Delta > 0.0) || Delta > 1.0) throw ConfigError("scale_link: Delta must lie in (0, 1]");
  return compute_constants(params).c1 * params.beta * std::pow(Delta, params.alpha);
}

/// Growth sequence a_J bounding coefficients of scale-indexed networks.
struct ScaleSequence {
  double a_J(int J) const { return slope * J; }
  double slope = 1.0;
};

/// j(alpha, beta) = ceil((J + log2(c1 beta)) / (1 + alpha)), checked against J and a_J.
inline int scale_for_class(const HolderParams& params, int J, ScaleSequence seq = {}) {
  const double c1 = compute_constants(params).c1;
  const int j = static_cast<int>(std::ceil((J + std::log2(c1 * params.beta)) / (1.0 + params.alpha)));
  if (j > J) throw ConfigError("J too small: j(alpha,beta) = " + std::to_string(j) + " exceeds J = " + std::to_string(J));
  if (seq.a_J(J) < params.beta)
    throw ConfigError("J too small: a_J = " + std::to_string(seq.a_J(J)) + " is below beta");
  return std::max(j, 0);
}

// ---------------------------------------------------------------------------
// Function oracles

/// A user function f : [0,1]^k -> R^{d-k} entering through its derivatives.
/// Implementations must be pure (safe to evaluate concurrently).
class FunctionOracle {
 public:
  virtual ~FunctionOracle() = default;
  virtual const HolderParams& params() const = 0;
  /// s-th partial derivative of coordinate r at x, |s| <= degree.
  virtual double derivative(int r, std::span<const double> x, std::span<const int> s) const = 0;

  double value(int r, std::span<const double> x) const {
    const std::vector<int> zero(static_cast<std::size_t>(params().k), 0);
    return derivative(r, x, zero);
  }
};

/// f_r(x) = offset_r + amp_r * sin(<freq_r, x> + phase_r).
class TrigOracle final : public FunctionOracle {
 public:
  struct Component {
    double amp = 0.0;
    std::vector<double> freq;  // one per axis
    double phase = 0.0;
    double offset = 0.5;
  };

  TrigOracle(HolderParams params, std::vector<Component> components)
      : params_(params), components_(std::move(components)) {
    params_.validate();
    if (static_cast<int>(components_.size()) != params_.codim())
      throw ConfigError("TrigOracle: need one component per coordinate (d - k)");
    for (const auto& c : components_)
      if (static_cast<int>(c.freq.size()) != params_.k) throw ConfigError("TrigOracle: freq needs k entries");
  }

  const HolderParams& params() const override { return params_; }
  const std::vector<Component>& components() const { return components_; }

  double derivative(int r, std::span<const double> x, std::span<const int> s) const override {
    const auto& c = components_[static_cast<std::size_t>(r)];
    double arg = c.phase;
    double scale = c.amp;
    int total = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      arg += c.freq[i] * x[i];
      scale *= std::pow(c.freq[i], s[i]);
      total += s[i];
    }
    const double wave = scale * std::sin(arg + total * (std::numbers::pi / 2.0));
    return total == 0 ? c.offset + wave : wave;
  }

  /// Smallest beta for which the closed-form derivative and Hölder bounds hold.
  double required_beta() const {
    const MultiIndexSet set(params_.k, params_.degree());
    double need = 0.0;
    for (const auto& c : components_) {
      double l1 = 0.0;
      for (double w : c.freq) l1 += std::fabs(w);
      for (const auto& s : set.all()) {
        double mag = std::fabs(c.amp);
        for (std::size_t i = 0; i < s.size(); ++i) mag *= std::pow(std::fabs(c.freq[i]), s[i]);
        need = std::max(need, order(s) == 0 ? std::fabs(c.offset) + mag : mag);
        // min(l1 t, 2) <= (l1 t)^e 2^(1-e) bounds the top-order Hölder quotient
        if (order(s) == params_.degree()) {
          const double e = params_.exponent();
          need = std::max(need, mag * std::pow(l1, e) * std::pow(2.0, 1.0 - e));
        }
      }
    }
    return need;
  }

  bool range_in_unit_interval() const {
    return std::all_of(components_.begin(), components_.end(), [](const Component& c) {
      return c.offset - std::fabs(c.amp) >= 0.0 && c.offset + std::fabs(c.amp) <= 1.0;
    });
  }

 private:
  HolderParams params_;
  std::vector<Component> components_;
};

/// Univariate polynomial f(x) = sum_i coeffs[i] x^i (k = 1, one coordinate).
class PolyOracle final : public FunctionOracle {
 public:
  PolyOracle(HolderParams params, std::vector<double> coeffs) : params_(params), coeffs_(std::move(coeffs)) {
    params_.validate();
    if (params_.k != 1 || params_.codim() != 1) throw ConfigError("PolyOracle: requires k = 1 and d = 2");
  }

  const HolderParams& params() const override { return params_; }
  const std::vector<double>& coeffs() const { return coeffs_; }

  double derivative(int, std::span<const double> x, std::span<const int> s) const override {
    const int n = s[0];
    double out = 0.0;
    for (std::size_t i = coeffs_.size(); i-- > static_cast<std::size_t>(n);) {
      double falling = 1.0;
      for (int q = 0; q < n; ++q) falling *= static_cast<double>(i) - q;
      out += coeffs_[i] * falling * std::pow(x[0], static_cast<double>(i) - n);
    }
    return out;
  }

 private:
  HolderParams params_;
  std::vector<double> coeffs_;
};

/// Degree-floor Taylor expansion of one coordinate around a center.
struct TaylorPolynomial {
  std::vector<double> center;
  std::vector<double> coefficients;  // f^{(s)}(center), ordered by MultiIndexSet
  std::shared_ptr<const MultiIndexSet> indices;

  double operator()(std::span<const double> y) const {
    double out = 0.0;
    for (std::size_t a = 0; a < indices->size(); ++a) {
      const auto& s = (*indices)[a];
      double term = coefficients[a];
      for (std::size_t i = 0; i < s.size(); ++i)
        term *= std::pow(y[i] - center[i], s[i]) / factorial(s[i]);
      out += term;
    }
    return out;
  }
};

inline TaylorPolynomial taylor_polynomial(const FunctionOracle& f, std::span<const double> x, int r = 0) {
  const auto& p = f.params();
  for (double xi : x)
    if (xi < 0.0 || xi > 1.0) throw ConfigError("taylor_polynomial: center outside [0,1]^k");
  TaylorPolynomial out;
  out.center.assign(x.begin(), x.end());
  out.indices = std::make_shared<const MultiIndexSet>(p.k, p.degree());
  for (const auto& s : out.indices->all()) out.coefficients.push_back(f.derivative(r, x, s));
  return out;
}

inline double sup_norm(std::span<const double> v) {
  double out = 0.0;
  for (double x : v) out = std::max(out, std::fabs(x));
  return out;
}

inline double sup_distance(std::span<const double> a, std::span<const double> b) {
  double out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) out = std::max(out, std::fabs(a[i] - b[i]));
  return out;
}

struct OracleReport {
  std::size_t samples = 0;
  std::size_t bound_violations = 0;   // |f^{(s)}| > beta
  std::size_t holder_violations = 0;  // top derivatives not Hölder
  std::size_t range_violations = 0;   // f outside [0, 1]
  double worst_excess = 0.0;
  bool ok() const { return bound_violations + holder_violations + range_violations == 0; }
};

/// Sampled falsification of the class conditions.
inline OracleReport validate_function_oracle(const FunctionOracle& f, std::size_t samples, std::uint64_t seed,
                                             double tol = 1e-9) {
  const auto& p = f.params();
  const MultiIndexSet set(p.k, p.degree());
  Rng rng(seed);
  OracleReport rep;
  std::vector<double> x(static_cast<std::size_t>(p.k)), y(x.size());
  for (std::size_t n = 0; n < samples; ++n) {
    for (auto& v : x) v = rng.uniform();
    for (auto& v : y) v = rng.uniform();
    const double dist = sup_distance(x, y);
    for (int r = 0; r < p.codim(); ++r) {
      const double fx = f.value(r, x);
      if (fx < -tol || fx > 1.0 + tol) {
        ++rep.range_violations;
        rep.worst_excess = std::max(rep.worst_excess, std::max(-fx, fx - 1.0));
      }
      for (const auto& s : set.all()) {
        const double dx = f.derivative(r, x, s);
        if (std::fabs(dx) > p.beta + tol) {
          ++rep.bound_violations;
          rep.worst_excess = std::max(rep.worst_excess, std::fabs(dx) - p.beta);
        }
        if (order(s) == p.degree()) {
          const double diff = std::fabs(f.derivative(r, y, s) - dx);
          const double allowed = p.beta * std::pow(dist, p.exponent());
          if (diff > allowed + tol) {
            ++rep.holder_violations;
            rep.worst_excess = std::max(rep.worst_excess, diff - allowed);
          }
        }
      }
    }
    ++rep.samples;
  }
  return rep;
}

}  // namespace gcnet
