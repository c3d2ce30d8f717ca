#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace gcnet {

// Counter-based SplitMix64 stream. Value i of a stream is mix(seed + (i+1) * golden),
// so outputs depend only on (seed, i) and are identical on every platform.
// Floating-point draws use the top 53 bits; normals use Box-Muller.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() {
    ++counter_;
    std::uint64_t z = seed_ + counter_ * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t seed() const { return seed_; }

  // Independent stream derived from this seed and a stream label.
  Rng substream(std::uint64_t label) const {
    Rng mixer(seed_ ^ (label * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
    return Rng(mixer.next_u64());
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gcnet
