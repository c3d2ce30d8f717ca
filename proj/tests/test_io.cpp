#include <gtest/gtest.h>

#include <sstream>

#include "gcnet/io.hpp"
#include "gcnet/synth.hpp"

using namespace gcnet;

namespace {

std::string header(const std::string& dims, const std::string& dtype = "f32") {
  return R"({"dims":)" + dims + R"(,"dtype":")" + dtype + R"(","order":"row-major","endianness":"little"})" + "\n";
}

}  // namespace

TEST(VolumeIo, RoundTripIsExactForFloats) {
  Rng rng(1);
  auto v = PixelVolume::zeros({4, 8, 2});
  for (double& x : v.data) x = static_cast<float>(rng.normal());
  std::stringstream ss;
  write_volume(ss, v);
  const auto back = read_volume(ss);
  EXPECT_EQ(back.dims, v.dims);
  EXPECT_EQ(back.data, v.data);
}

TEST(VolumeIo, LayoutIsLittleEndianRowMajor) {
  auto v = PixelVolume::zeros({1, 2});
  v.data = {1.0, -2.0};
  std::stringstream ss;
  write_volume(ss, v);
  const std::string s = ss.str();
  const auto nl = s.find('\n');
  ASSERT_EQ(s.size(), nl + 1 + 8);
  // 1.0f = 0x3f800000, -2.0f = 0xc0000000
  const unsigned char want[8] = {0, 0, 0x80, 0x3f, 0, 0, 0, 0xc0};
  for (int i = 0; i < 8; ++i) EXPECT_EQ(static_cast<unsigned char>(s[nl + 1 + static_cast<std::size_t>(i)]), want[i]);
}

TEST(VolumeIo, FormatViolations) {
  const std::string four(16, '\0');
  for (const std::string& bad : {std::string("not json\n") + four, header("[2,2]", "f64") + four, header("[2,0]") + four,
                                 header("[2,2]") + four.substr(0, 12), header("[2,2]") + four + "x", header("\"2\"") + four,
                                 std::string("")}) {
    std::stringstream ss(bad);
    EXPECT_THROW(read_volume(ss), FormatError) << bad.substr(0, 40);
  }
  std::stringstream nan(header("[1]") + std::string("\x00\x00\xc0\x7f", 4));
  EXPECT_THROW(read_volume(nan), std::exception);
}

TEST(CloudIo, RoundTripAndErrors) {
  const auto c = gen_uniform_cloud(50, 3, 4);
  std::stringstream ss;
  write_cloud_csv(ss, c);
  const auto back = read_cloud_csv(ss);
  EXPECT_EQ(back.d, 3);
  EXPECT_EQ(back.coords, c.coords);
  for (const char* bad : {"x1,x2\n0.1\n", "x1,x2\n0.1,0.2,0.3\n", "x1,x2\n0.1,abc\n", "x1,x2\n0.1,1.5\n", "a,b\n0.1,0.2\n", ""}) {
    std::stringstream s(bad);
    EXPECT_THROW(read_cloud_csv(s), FormatError) << bad;
  }
}

TEST(CoefficientIo, RoundTrip) {
  Rng rng(2);
  auto v = PixelVolume::cube(2, 8);
  for (double& x : v.data) x = rng.uniform();
  const auto t = beamlet_transform(v, 1);
  std::stringstream ss;
  write_coefficients_csv(ss, t);
  const auto back = read_coefficients_csv(ss, 1, 3);
  EXPECT_EQ(back.beamlets, t.beamlets);
  EXPECT_EQ(back.coef, t.coef);
  std::stringstream bad("b1_1,b1_2,b2_1,b2_2,coefficient\n0,0,7,7,1.0\n");
  EXPECT_THROW(read_coefficients_csv(bad, 2, 3), FormatError);
}

TEST(JsonViews, GcnAndDecision) {
  auto v = PixelVolume::cube(2, 4);
  for (int i = 0; i < 4; ++i) v.at(std::vector<int>{i, 1}) = 1.0;
  const auto g = threshold_and_build(beamlet_transform(v, 1), 0.1, true);
  const auto j = gcn_json(g);
  EXPECT_EQ(j["vertices"].size(), g.node_count());
  EXPECT_EQ(j["edges"].size(), g.edge_count());
  for (const auto& e : j["edges"]) {
    const auto& row = g.graph.out[e[0].get<std::size_t>()];
    EXPECT_TRUE(std::binary_search(row.begin(), row.end(), e[1].get<std::uint32_t>()));
  }
  const auto d = decision_json("lsr", 3, 2.5, Decision::H1, {PolyNode{{1}, {{0, 1}}}});
  EXPECT_EQ(d["decision"], "H1");
  EXPECT_EQ(d["witness"][0]["cell"][0], 1);
  EXPECT_EQ(d["witness"][0]["coefficients"][0][1], 1);
}

TEST(Manifest, Fields) {
  RunManifest m;
  m.subcommand = "synth";
  m.outputs = {"volume.f32"};
  const auto j = m.to_json();
  for (const char* key : {"subcommand", "config", "seeds", "inputs", "outputs", "version", "wall_clock_seconds"})
    EXPECT_TRUE(j.contains(key)) << key;
}
