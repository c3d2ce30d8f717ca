#include <gtest/gtest.h>

#include <cmath>

#include "gcnet/synth.hpp"

using namespace gcnet;

namespace {

const HolderParams kLine{1, 2, 2.0, 1.0};

TrigOracle flat(double z) { return TrigOracle(kLine, {TrigOracle::Component{0.0, {0.0}, 0.0, z}}); }

FilamentSpec straight(int d, double x0_px, double len_px, int side) {
  FilamentSpec f;
  f.d = d;
  f.x0 = x0_px / side;
  f.length = len_px / side;
  for (int r = 0; r + 1 < d; ++r) {
    f.amp.push_back(0.0);
    f.freq.push_back(0.0);
    f.phase.push_back(0.0);
    f.center.push_back((10.5 + r) / side);
  }
  return f;
}

}  // namespace

TEST(UniformCloud, EmptyAndDeterministic) {
  EXPECT_TRUE(gen_uniform_cloud(0, 2, 1).empty());
  EXPECT_EQ(gen_uniform_cloud(100, 3, 5).coords, gen_uniform_cloud(100, 3, 5).coords);
  EXPECT_NE(gen_uniform_cloud(100, 3, 5).coords, gen_uniform_cloud(100, 3, 6).coords);
  EXPECT_THROW(gen_uniform_cloud(10, 0, 1), ConfigError);
}

TEST(UniformCloud, MeansAndCellCounts) {
  const std::size_t n = 40000;
  const auto c = gen_uniform_cloud(n, 2, 77);
  c.validate();
  double m[2] = {0, 0};
  std::vector<double> bins(16, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = c.point(i);
    m[0] += p[0];
    m[1] += p[1];
    bins[static_cast<std::size_t>(std::floor(p[0] * 4)) * 4 + static_cast<std::size_t>(std::floor(p[1] * 4))] += 1;
  }
  EXPECT_NEAR(m[0] / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(m[1] / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
  double chi = 0;
  for (double b : bins) chi += (b - n / 16.0) * (b - n / 16.0) / (n / 16.0);
  EXPECT_LT(chi, 37.7);  // chi-square(15) upper 0.001 quantile
}

TEST(H1Cloud, ZeroEpsIsUniform) {
  const auto h = gen_h1_cloud(20000, 0.0, flat(0.5), 0.01, 3);
  EXPECT_EQ(h.planted, 0u);
  std::vector<double> bins(10, 0.0);
  for (std::size_t i = 0; i < h.cloud.size(); ++i) bins[static_cast<std::size_t>(std::floor(h.cloud.point(i)[1] * 10))] += 1;
  double chi = 0;
  for (double b : bins) chi += (b - 2000.0) * (b - 2000.0) / 2000.0;
  EXPECT_LT(chi, 27.9);  // chi-square(9) upper 0.001 quantile
}

TEST(H1Cloud, FullEpsLiesInTube) {
  Rng rng(4);
  const auto f = random_trig_function(kLine, rng);
  const auto h = gen_h1_cloud(5000, 1.0, f, 0.02, 8);
  EXPECT_EQ(h.planted, 5000u);
  for (std::size_t i = 0; i < h.cloud.size(); ++i) {
    const auto p = h.cloud.point(i);
    ASSERT_LE(std::fabs(p[1] - f.value(0, p.subspan(0, 1))), 0.02 + 1e-12);
  }
}

TEST(H1Cloud, MixtureCountIsBinomial) {
  const std::size_t n = 10000;
  const auto h = gen_h1_cloud(n, 0.1, flat(0.5), 0.01, 9);
  EXPECT_NEAR(static_cast<double>(h.planted), 1000.0, 4 * std::sqrt(n * 0.1 * 0.9));
  EXPECT_THROW(gen_h1_cloud(10, 1.5, flat(0.5), 0.01, 1), ConfigError);
  EXPECT_THROW(gen_h1_cloud(10, 0.5, flat(0.5), 0.0, 1), ConfigError);
}

TEST(PlantedCloud, ExactCount) {
  const auto h = gen_planted_cloud(1000, 100, flat(0.25), 0.005, 2);
  EXPECT_EQ(h.cloud.size(), 1000u);
  std::size_t near = 0;
  for (std::size_t i = 900; i < 1000; ++i) near += std::fabs(h.cloud.point(i)[1] - 0.25) <= 0.005;
  EXPECT_EQ(near, 100u);
  EXPECT_THROW(gen_planted_cloud(10, 11, flat(0.5), 0.01, 1), ConfigError);
}

TEST(RandomTrig, InClass) {
  Rng rng(12);
  for (const HolderParams& p : {HolderParams{1, 2, 1.5, 1.0}, HolderParams{2, 3, 2.0, 1.0}, HolderParams{1, 3, 2.0, 1.0}}) {
    for (int i = 0; i < 20; ++i) {
      const auto f = random_trig_function(p, rng);
      EXPECT_LE(f.required_beta(), p.beta);
      EXPECT_TRUE(validate_function_oracle(f, 500, 7).ok());
    }
  }
}

TEST(Filaments, ZeroAmplitudeIsStraight) {
  FilamentRanges r;
  r.side = 32;
  r.length_px_hi = 32;
  r.amp_hi = 0.0;
  for (const auto& f : gen_trig_filaments(10, r, std::nullopt, 3)) {
    std::vector<double> a(3), b(3);
    f.curve.position(0.0, a);
    f.curve.position(f.curve.length(), b);
    EXPECT_NEAR(a[1], b[1], 1e-12);
    EXPECT_NEAR(a[2], b[2], 1e-12);
    EXPECT_NEAR(f.curve.length(), f.spec.length, 1e-9);
  }
}

TEST(Filaments, PassCurveValidators) {
  FilamentRanges r;  // 64^3, lengths 10-64
  for (const auto& hubs : {std::optional<HubSpec>{}, std::optional<HubSpec>{HubSpec{}}}) {
    const auto fs = gen_trig_filaments(20, r, hubs, 17);
    ASSERT_EQ(fs.size(), 20u);
    for (const auto& f : fs) {
      EXPECT_GE(f.spec.length_px(64), 10.0 - 1e-9);
      EXPECT_LE(f.spec.length_px(64), 64.0 + 1e-9);
      const auto rep = validate_curve(f.curve, 2000, 5);
      EXPECT_TRUE(rep.ok()) << "taylor " << rep.taylor << " range " << rep.range << " excess " << rep.worst_excess;
    }
  }
}

TEST(Filaments, HubGroupsCoincideOnWindow) {
  FilamentRanges r;
  const HubSpec h;
  const auto fs = gen_trig_filaments(20, r, h, 23);
  for (int g = 0; g < h.groups; ++g) {
    const auto& lead = fs[static_cast<std::size_t>(g * h.per_group)].spec;
    for (int m = 1; m < h.per_group; ++m) {
      const auto& f = fs[static_cast<std::size_t>(g * h.per_group + m)].spec;
      EXPECT_EQ(f.hub_x, lead.hub_x);
      EXPECT_NEAR(2.0 * f.hub_half * 64, 3.0, 1e-12);
      for (int i = 0; i <= 30; ++i) {
        const double x = f.hub_x - f.hub_half + 2.0 * f.hub_half * i / 30.0;
        ASSERT_GE(x, f.x0);
        ASSERT_LE(x, f.x0 + f.length);
        for (int c = 0; c < 2; ++c) EXPECT_DOUBLE_EQ(f.transverse(c, x, 0), lead.transverse(c, x, 0));
      }
      // outside the window the members separate
      const double far = lead.hub_x + lead.hub_half + 8.0 / 64;
      if (far <= std::min(f.x0 + f.length, lead.x0 + lead.length)) {
        EXPECT_GT(std::hypot(f.transverse(0, far, 0) - lead.transverse(0, far, 0), f.transverse(1, far, 0) - lead.transverse(1, far, 0)),
                  1.0 / 64);
      }
    }
  }
  EXPECT_THROW(gen_trig_filaments(19, r, h, 23), ConfigError);
}

TEST(Filaments, ControlSharesDrawsButNoHub) {
  FilamentRanges r;
  HubSpec h;
  const auto hub = gen_trig_filaments(20, r, h, 5);
  h.control = true;
  const auto ctl = gen_trig_filaments(20, r, h, 5);
  for (std::size_t i = 0; i < hub.size(); ++i) {
    EXPECT_EQ(hub[i].spec.length, ctl[i].spec.length);
    EXPECT_EQ(hub[i].spec.x0, ctl[i].spec.x0);
    const double shift = std::hypot(ctl[i].spec.center[0] - hub[i].spec.center[0], ctl[i].spec.center[1] - hub[i].spec.center[1]);
    EXPECT_NEAR(shift * 64, h.control_offset_px, 1e-9);
  }
}

TEST(Rasterize, EmptyAndStraight) {
  const auto z = rasterize({}, {16, 16, 16}, 1.0);
  EXPECT_EQ(std::count(z.data.begin(), z.data.end(), 0.0), 16 * 16 * 16);
  for (int len : {1, 5, 12, 20}) {
    const auto f = straight(3, 3.0, len, 32);
    const auto v = rasterize({Filament{f, filament_curve(f)}}, {32, 32, 32}, 2.0);
    EXPECT_EQ(std::count(v.data.begin(), v.data.end(), 2.0), len) << "length " << len;
  }
  const auto f2 = straight(2, 0.0, 32, 32);
  const auto v2 = rasterize({Filament{f2, filament_curve(f2)}}, {32, 32}, 1.0);
  EXPECT_EQ(std::count(v2.data.begin(), v2.data.end(), 1.0), 32);
}

TEST(Noise, InfiniteSnrUnchangedAndErrors) {
  auto v = PixelVolume::cube(3, 8);
  v.data[5] = 1.0;
  const auto same = add_noise(v, std::numeric_limits<double>::infinity(), 1);
  EXPECT_EQ(same.volume.data, v.data);
  EXPECT_EQ(same.noise.sigma, 0.0);
  EXPECT_THROW(add_noise(PixelVolume::cube(3, 8), 2.0, 1), ConfigError);
  EXPECT_THROW(add_noise(v, 0.0, 1), ConfigError);
  EXPECT_EQ(add_noise(v, 2.0, 4).volume.data, add_noise(v, 2.0, 4).volume.data);
}

TEST(Noise, SigmaWithinOnePercentAt64) {
  auto v = PixelVolume::cube(3, 64);
  v.data[123] = 1.6;
  for (double snr : {2.0, 0.8}) {
    const auto out = add_noise(v, snr, 99);
    EXPECT_DOUBLE_EQ(out.noise.sigma, 1.6 / snr);
    double s = 0, ss = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double e = out.volume.data[i] - v.data[i];
      s += e;
      ss += e * e;
    }
    const double n = static_cast<double>(v.size());
    const double sd = std::sqrt(ss / n - (s / n) * (s / n));
    EXPECT_NEAR(sd / out.noise.sigma, 1.0, 0.01);
  }
}
