#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "gcnet/curve.hpp"
#include "gcnet/data.hpp"
#include "gcnet/error.hpp"
#include "gcnet/rng.hpp"
#include "gcnet/smoothness.hpp"

namespace gcnet {

// ---------------------------------------------------------------------------
// Point clouds

inline PointCloud gen_uniform_cloud(std::size_t n, int d, std::uint64_t seed) {
  if (d < 1) throw ConfigError("gen_uniform_cloud: d must be >= 1");
  Rng rng(seed);
  PointCloud cloud(d);
  cloud.coords.resize(n * static_cast<std::size_t>(d));
  for (double& v : cloud.coords) v = rng.uniform();
  return cloud;
}

struct H1Cloud {
  PointCloud cloud;
  std::size_t planted = 0;
  std::size_t clipped = 0;
  double clipped_fraction() const { return planted == 0 ? 0.0 : static_cast<double>(clipped) / planted; }
};

namespace detail {

// x uniform on [0,1]^k, z = f(x) + uniform offset in the sup-ball of radius eta, clipped to the cube.
inline bool append_tube_point(PointCloud& cloud, const FunctionOracle& f, double eta, Rng& rng) {
  const auto& p = f.params();
  std::vector<double> pt(static_cast<std::size_t>(p.d));
  for (int i = 0; i < p.k; ++i) pt[static_cast<std::size_t>(i)] = rng.uniform();
  const std::span<const double> x(pt.data(), static_cast<std::size_t>(p.k));
  bool clipped = false;
  for (int r = 0; r < p.codim(); ++r) {
    double z = f.value(r, x) + rng.uniform(-eta, eta);
    if (z < 0.0 || z > 1.0) {
      clipped = true;
      z = std::clamp(z, 0.0, 1.0);
    }
    pt[static_cast<std::size_t>(p.k + r)] = z;
  }
  cloud.add(pt);
  return clipped;
}

}  // namespace detail

/// Mixture (1 - eps) Uniform[0,1]^d + eps Uniform(graph_eta(f)).
inline H1Cloud gen_h1_cloud(std::size_t n, double eps, const FunctionOracle& f, double eta, std::uint64_t seed) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw ConfigError("gen_h1_cloud: eps must lie in [0,1]");
  if (!(eta > 0.0)) throw ConfigError("gen_h1_cloud: eta must be > 0");
  const int d = f.params().d;
  Rng rng(seed);
  H1Cloud out{PointCloud(d), 0, 0};
  out.cloud.coords.reserve(n * static_cast<std::size_t>(d));
  std::vector<double> pt(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.uniform() < eps) {
      ++out.planted;
      if (detail::append_tube_point(out.cloud, f, eta, rng)) ++out.clipped;
    } else {
      for (double& v : pt) v = rng.uniform();
      out.cloud.add(pt);
    }
  }
  return out;
}

/// n points of which exactly `planted` lie in graph_eta(f); the rest are uniform.
inline H1Cloud gen_planted_cloud(std::size_t n, std::size_t planted, const FunctionOracle& f, double eta,
                                 std::uint64_t seed) {
  if (planted > n) throw ConfigError("gen_planted_cloud: planted count exceeds n");
  if (!(eta >= 0.0)) throw ConfigError("gen_planted_cloud: eta must be >= 0");
  const int d = f.params().d;
  Rng rng(seed);
  H1Cloud out{PointCloud(d), planted, 0};
  std::vector<double> pt(static_cast<std::size_t>(d));
  for (std::size_t i = planted; i < n; ++i) {
    for (double& v : pt) v = rng.uniform();
    out.cloud.add(pt);
  }
  for (std::size_t i = 0; i < planted; ++i)
    if (detail::append_tube_point(out.cloud, f, eta, rng)) ++out.clipped;
  return out;
}

/// Random trig function in the (alpha, beta) class: one wave per coordinate with values
/// in [margin, 1 - margin]; the amplitude is shrunk until required_beta() <= beta.
inline TrigOracle random_trig_function(HolderParams params, Rng& rng, double max_amp = 0.2, double max_freq = 6.0,
                                       double margin = 0.05) {
  params.validate();
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<TrigOracle::Component> comps;
    for (int r = 0; r < params.codim(); ++r) {
      TrigOracle::Component c;
      c.freq.resize(static_cast<std::size_t>(params.k));
      for (double& w : c.freq) w = rng.uniform(0.0, max_freq);
      c.amp = std::min(rng.uniform(0.0, max_amp), 0.5 - margin);
      c.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      c.offset = rng.uniform(margin + c.amp, 1.0 - margin - c.amp);
      comps.push_back(std::move(c));
    }
    TrigOracle f(params, comps);
    for (int shrink = 0; shrink < 60 && f.required_beta() > params.beta; ++shrink) {
      for (auto& c : comps) c.amp *= 0.8;
      f = TrigOracle(params, comps);
    }
    if (f.required_beta() <= params.beta) return f;
  }
  throw ConfigError("random_trig_function: no admissible function after 100 tries");
}


// ---------------------------------------------------------------------------
// Filaments and volumes

/// Graph curve along axis 1 on [x0, x0 + length] (unit-cube coordinates):
/// y_r(x) = center_r + amp_r sin(freq_r x + phase_r) + splay_r ramp(|x - hub_x| - hub_half).
/// ramp(g) is 0 for g <= 0, g^2 / 2w up to g = w, then linear with slope 1 (C^1, curvature <= splay / w).
/// freq is in radians per unit of axis 1; splay is empty outside hub groups.
struct FilamentSpec {
  int d = 3;
  double x0 = 0.0;
  double length = 0.5;
  std::vector<double> amp, freq, phase, center, splay;
  double hub_x = 0.0;
  double hub_half = 0.0;
  double splay_width = 1.0;

  double length_px(int side) const { return length * side; }

  double transverse(int r, double x, int deriv) const {
    const auto i = static_cast<std::size_t>(r);
    const double arg = freq[i] * x + phase[i];
    const double u = x - hub_x, g = std::fabs(u) - hub_half, w = splay_width;
    const double m = splay.empty() || g <= 0.0 ? 0.0 : splay[i];
    switch (deriv) {
      case 0: return center[i] + amp[i] * std::sin(arg) + m * (g < w ? 0.5 * g * g / w : g - 0.5 * w);
      case 1: return amp[i] * freq[i] * std::cos(arg) + m * (u > 0 ? 1.0 : -1.0) * (g < w ? g / w : 1.0);
      default: return -amp[i] * freq[i] * freq[i] * std::sin(arg) + (g < w ? m / w : 0.0);
    }
  }

  void validate() const {
    if (d < 2) throw ConfigError("FilamentSpec: d must be >= 2");
    const auto c = static_cast<std::size_t>(d - 1);
    if (amp.size() != c || freq.size() != c || phase.size() != c || center.size() != c || (!splay.empty() && splay.size() != c))
      throw ConfigError("FilamentSpec: need one amplitude, frequency, phase and center per transverse axis");
    if (!(length > 0.0)) throw ConfigError("FilamentSpec: length must be > 0");
    if (!(splay_width > 0.0)) throw ConfigError("FilamentSpec: splay_width must be > 0");
  }
};

/// Arclength curve of a filament; lambda and kappa are declared with a 5% margin.
inline ParametricCurve filament_curve(const FilamentSpec& f) {
  f.validate();
  ParametricCurve g(
      f.d, f.x0, f.x0 + f.length,
      [f](double t, std::span<double> o) {
        o[0] = t;
        for (int r = 0; r + 1 < f.d; ++r) o[static_cast<std::size_t>(r) + 1] = f.transverse(r, t, 0);
      },
      [f](double t, std::span<double> o) {
        o[0] = 1.0;
        for (int r = 0; r + 1 < f.d; ++r) o[static_cast<std::size_t>(r) + 1] = f.transverse(r, t, 1);
      },
      [f](double t, std::span<double> o) {
        o[0] = 0.0;
        for (int r = 0; r + 1 < f.d; ++r) o[static_cast<std::size_t>(r) + 1] = f.transverse(r, t, 2);
      },
      CurveClass{2.0, 1.0, 1.0});
  g.set_curve_class(CurveClass{2.0, 1.05 * g.length(), std::max(1.05 * g.estimate_kappa(), 1e-3)});
  return g;
}

/// Sampled check that the filament stays inside the cube, `margin` away from it transversally.
inline bool filament_in_cube(const FilamentSpec& f, double margin = 0.0, int samples = 2048) {
  if (f.x0 < 0.0 || f.x0 + f.length > 1.0 + 1e-12) return false;
  for (int i = 0; i <= samples; ++i) {
    const double x = f.x0 + f.length * i / samples;
    for (int r = 0; r + 1 < f.d; ++r) {
      const double y = f.transverse(r, x, 0);
      if (y < margin || y > 1.0 - margin) return false;
    }
  }
  return true;
}

struct FilamentRanges {
  int d = 3;
  int side = 64;
  double length_px_lo = 10.0, length_px_hi = 64.0;
  double amp_lo = 0.0, amp_hi = 0.08;
  double freq_lo = 0.0, freq_hi = 12.0;
  double margin = 0.02;  // transverse distance kept from the cube boundary

  void validate() const {
    if (d < 2 || side < 1) throw ConfigError("FilamentRanges: need d >= 2 and side >= 1");
    if (!(length_px_lo > 0.0 && length_px_lo <= length_px_hi) || !(amp_lo >= 0.0 && amp_lo <= amp_hi) ||
        !(freq_lo >= 0.0 && freq_lo <= freq_hi) || !(margin >= 0.0 && margin < 0.5))
      throw ConfigError("FilamentRanges: empty or negative range");
    if (length_px_hi > side) throw ConfigError("FilamentRanges: filaments longer than the cube");
  }
};

/// Groups of filaments that coincide on a common window of hub_px pixels and splay apart outside it,
/// member m leaving in transverse direction angle0 + 2 pi m / per_group.
struct HubSpec {
  int groups = 5;
  int per_group = 4;
  double hub_px = 3.0;
  double splay_lo = 0.3, splay_hi = 0.8;  // transverse slope far from the hub
  double transition_px = 3.0;
  // Matched control: every member shifted control_offset_px along its splay direction so the group
  // never meets. Placement always checks both variants, so hub and control draws stay identical.
  double control_offset_px = 4.0;
  bool control = false;

  void validate() const {
    if (groups < 1 || per_group < 1 || !(hub_px > 0.0) || !(transition_px > 0.0) || !(0.0 <= splay_lo && splay_lo <= splay_hi) ||
        !(control_offset_px >= 0.0))
      throw ConfigError("HubSpec: invalid group layout or splay range");
  }
};

struct Filament {
  FilamentSpec spec;
  ParametricCurve curve;
};

namespace detail {

inline FilamentSpec draw_filament(const FilamentRanges& R, Rng& rng) {
  FilamentSpec f;
  f.d = R.d;
  f.length = rng.uniform(R.length_px_lo, R.length_px_hi) / R.side;
  f.x0 = rng.uniform(0.0, 1.0 - f.length);
  for (int r = 0; r + 1 < R.d; ++r) {
    const double a = rng.uniform(R.amp_lo, R.amp_hi);
    f.amp.push_back(a);
    f.freq.push_back(rng.uniform(R.freq_lo, R.freq_hi));
    f.phase.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
    f.center.push_back(rng.uniform(R.margin + a, 1.0 - R.margin - a));
  }
  return f;
}

}  // namespace detail

/// Random trig filaments along axis 1; out-of-cube draws are resampled up to 100 times.
/// With hubs the count must equal groups * per_group.
inline std::vector<Filament> gen_trig_filaments(int count, const FilamentRanges& ranges,
                                                const std::optional<HubSpec>& hubs, std::uint64_t seed) {
  ranges.validate();
  if (count < 0) throw ConfigError("gen_trig_filaments: count must be >= 0");
  Rng rng(seed);
  std::vector<Filament> out;
  auto accept = [&](FilamentSpec f) { out.push_back({f, filament_curve(f)}); };
  if (!hubs) {
    for (int i = 0; i < count; ++i) {
      int tries = 0;
      FilamentSpec f = detail::draw_filament(ranges, rng);
      while (!filament_in_cube(f, ranges.margin)) {
        if (++tries >= 100) throw ConfigError("gen_trig_filaments: ranges keep producing out-of-cube curves");
        f = detail::draw_filament(ranges, rng);
      }
      accept(f);
    }
    return out;
  }
  const HubSpec& H = *hubs;
  H.validate();
  if (H.groups * H.per_group != count) throw ConfigError("gen_trig_filaments: hub groups must account for every filament");
  if (H.hub_px > ranges.length_px_hi) throw ConfigError("gen_trig_filaments: hub longer than the longest filament");
  const double half = 0.5 * H.hub_px / ranges.side;
  for (int g = 0; g < H.groups; ++g) {
    std::vector<FilamentSpec> members;
    for (int tries = 0; members.size() < static_cast<std::size_t>(H.per_group); ++tries) {
      if (tries >= 100) throw ConfigError("gen_trig_filaments: cannot place hub group inside the cube");
      members.clear();
      FilamentSpec base = detail::draw_filament(ranges, rng);
      base.hub_x = rng.uniform(0.25, 0.75);
      base.hub_half = half;
      base.splay_width = H.transition_px / ranges.side;
      const double angle0 = rng.uniform(0.0, 2.0 * std::numbers::pi);
      for (int m = 0; m < H.per_group; ++m) {
        const double angle = angle0 + 2.0 * std::numbers::pi * m / H.per_group;
        bool placed = false;
        for (int inner = 0; inner < 100 && !placed; ++inner) {
          FilamentSpec f = base;
          f.length = rng.uniform(std::max(ranges.length_px_lo, H.hub_px), ranges.length_px_hi) / ranges.side;
          // hub inside the central half of the member
          const double lo = std::max(0.0, f.hub_x + half - 0.75 * f.length), hi = std::min(f.hub_x - half - 0.25 * f.length, 1.0 - f.length);
          if (lo > hi) continue;
          f.x0 = rng.uniform(lo, hi);
          const double slope = rng.uniform(H.splay_lo, H.splay_hi);
          f.splay.assign(static_cast<std::size_t>(ranges.d - 1), 0.0);
          f.splay[0] = slope * std::cos(angle);
          if (ranges.d > 2) f.splay[1] = slope * std::sin(angle);
          FilamentSpec shifted = f;
          shifted.center[0] += H.control_offset_px / ranges.side * std::cos(angle);
          if (ranges.d > 2) shifted.center[1] += H.control_offset_px / ranges.side * std::sin(angle);
          if (filament_in_cube(f, ranges.margin) && filament_in_cube(shifted, ranges.margin)) {
            members.push_back(H.control ? shifted : f);
            placed = true;
          }
        }
        if (!placed) break;
      }
    }
    for (auto& f : members) accept(f);
  }
  return out;
}

/// Lights every voxel visited by quarter-voxel arclength samples s in [0, L), plus the endpoint.
inline PixelVolume rasterize(const std::vector<Filament>& filaments, const std::vector<int>& dims, double amplitude) {
  auto vol = PixelVolume::zeros(dims);
  const int d = vol.dim();
  std::vector<int> idx(static_cast<std::size_t>(d));
  std::vector<double> p(static_cast<std::size_t>(d));
  for (const auto& f : filaments) {
    if (f.curve.dim() != d) throw ConfigError("rasterize: filament dimension differs from volume");
    const double L = f.curve.length();
    const double h = 0.25 / *std::max_element(dims.begin(), dims.end());
    auto light = [&](double s) {
      f.curve.position(s, p);
      for (int a = 0; a < d; ++a) {
        const int N = dims[static_cast<std::size_t>(a)];
        idx[static_cast<std::size_t>(a)] = std::clamp(static_cast<int>(std::floor(p[static_cast<std::size_t>(a)] * N)), 0, N - 1);
      }
      vol.at(idx) = amplitude;
    };
    for (std::size_t i = 0; static_cast<double>(i) * h < L - 1e-6 * h; ++i) light(static_cast<double>(i) * h);
    light(std::max(0.0, L - 1e-6 * h));  // endpoint, nudged inside the last voxel
  }
  return vol;
}

struct NoiseSpec {
  double sigma = 0.0;
  double snr = std::numeric_limits<double>::infinity();
  double amplitude = 0.0;
  std::uint64_t seed = 0;
};

struct NoisyVolume {
  PixelVolume volume;
  NoiseSpec noise;
};

/// sigma = amplitude / snr with amplitude the largest |voxel|; snr = +inf leaves the volume unchanged.
inline NoisyVolume add_noise(const PixelVolume& vol, double snr, std::uint64_t seed) {
  NoisyVolume out{vol, {}};
  out.noise.snr = snr;
  out.noise.seed = seed;
  for (double v : vol.data) out.noise.amplitude = std::max(out.noise.amplitude, std::fabs(v));
  if (std::isinf(snr) && snr > 0) return out;
  if (!(snr > 0.0) || !std::isfinite(snr)) throw ConfigError("add_noise: snr must be > 0");
  if (out.noise.amplitude == 0.0) throw ConfigError("add_noise: volume has no signal voxels to calibrate the SNR");
  out.noise.sigma = out.noise.amplitude / snr;
  Rng rng(seed);
  for (double& v : out.volume.data) v += out.noise.sigma * rng.normal();
  return out;
}

/// Noise-only volume with the sigma a signal of `amplitude` would get at `snr`.
inline NoisyVolume noise_volume(const std::vector<int>& dims, double amplitude, double snr, std::uint64_t seed) {
  NoisyVolume out{PixelVolume::zeros(dims), {}};
  out.noise = {amplitude / snr, snr, amplitude, seed};
  Rng rng(seed);
  for (double& v : out.volume.data) v = out.noise.sigma * rng.normal();
  return out;
}

}  // namespace gcnet
