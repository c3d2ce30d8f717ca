#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gcnet/error.hpp"

namespace gcnet {

/// n points in [0,1]^d, stored flat with stride d.
struct PointCloud {
  int d = 2;
  std::vector<double> coords;

  PointCloud() = default;
  explicit PointCloud(int dim) : d(dim) {}

  std::size_t size() const { return d > 0 ? coords.size() / static_cast<std::size_t>(d) : 0; }
  bool empty() const { return coords.empty(); }

  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
  }

  void add(std::span<const double> p) {
    if (p.size() != static_cast<std::size_t>(d)) throw ConfigError("PointCloud: point has wrong dimension");
    coords.insert(coords.end(), p.begin(), p.end());
  }

  void validate() const {
    if (d < 1) throw ConfigError("PointCloud: d must be >= 1");
    if (coords.size() % static_cast<std::size_t>(d) != 0) throw FormatError("PointCloud: ragged coordinate array");
    for (double v : coords)
      if (!(v >= 0.0 && v <= 1.0)) throw FormatError("PointCloud: coordinate outside [0,1]");
  }
};

inline bool is_power_of_two(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

/// Row-major voxel array on [0,1]^d; voxel (i_1..i_d) covers prod [i_a/n_a, (i_a+1)/n_a].
/// Axis 1 is the slowest index.
struct PixelVolume {
  std::vector<int> dims;
  std::vector<double> data;

  static PixelVolume zeros(std::vector<int> dims) {
    PixelVolume v;
    v.dims = std::move(dims);
    std::size_t total = 1;
    for (int n : v.dims) {
      if (n < 1) throw ConfigError("PixelVolume: side lengths must be positive");
      total *= static_cast<std::size_t>(n);
    }
    v.data.assign(total, 0.0);
    return v;
  }

  static PixelVolume cube(int d, int side) { return zeros(std::vector<int>(static_cast<std::size_t>(d), side)); }

  int dim() const { return static_cast<int>(dims.size()); }
  std::size_t size() const { return data.size(); }
  double voxel(int axis) const { return 1.0 / dims[static_cast<std::size_t>(axis)]; }

  std::size_t index(std::span<const int> idx) const {
    std::size_t out = 0;
    for (std::size_t a = 0; a < dims.size(); ++a) out = out * static_cast<std::size_t>(dims[a]) + static_cast<std::size_t>(idx[a]);
    return out;
  }

  std::vector<int> unravel(std::size_t flat) const {
    std::vector<int> idx(dims.size());
    for (std::size_t a = dims.size(); a-- > 0;) {
      idx[a] = static_cast<int>(flat % static_cast<std::size_t>(dims[a]));
      flat /= static_cast<std::size_t>(dims[a]);
    }
    return idx;
  }

  double& at(std::span<const int> idx) { return data[index(idx)]; }
  double at(std::span<const int> idx) const { return data[index(idx)]; }

  bool same_shape(const PixelVolume& o) const { return dims == o.dims; }

  /// Cubic, power-of-two side, finite values.
  int side_log2() const {
    if (dims.empty()) throw ConfigError("PixelVolume: no dimensions");
    for (int n : dims)
      if (n != dims[0]) throw ConfigError("PixelVolume: dyadic scales need equal side lengths");
    if (!is_power_of_two(dims[0])) throw ConfigError("PixelVolume: side length must be a power of two");
    int J = 0;
    while ((1 << J) < dims[0]) ++J;
    return J;
  }

  void validate() const {
    std::size_t total = 1;
    for (int n : dims) {
      if (n < 1) throw FormatError("PixelVolume: side lengths must be positive");
      total *= static_cast<std::size_t>(n);
    }
    if (total != data.size()) throw FormatError("PixelVolume: data length " + std::to_string(data.size()) +
                                                " does not match dims");
    for (double v : data)
      if (!std::isfinite(v)) throw FormatError("PixelVolume: non-finite intensity");
  }
};

}  // namespace gcnet
