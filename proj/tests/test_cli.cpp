#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "gcnet/io.hpp"

using namespace gcnet;
namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("gcnet_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GCNET_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

fs::path write_config(const std::string& name, const json& j) {
  const auto p = workdir() / name;
  write_text(p, j.dump());
  return p;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST(Cli, EmptyScenario) {
  const auto cfg = write_config("empty.json", {{"family", "empty"}, {"dims", {8, 8, 8}}});
  const auto out = workdir() / "empty";
  ASSERT_EQ(run_cli("synth --config " + q(cfg) + " --out " + q(out)), 0);
  const auto v = read_volume(out / "volume.f32");
  EXPECT_EQ(v.dims, (std::vector<int>{8, 8, 8}));
  EXPECT_EQ(std::count(v.data.begin(), v.data.end(), 0.0), 512);
  const auto m = read_json(out / "manifest.json");
  EXPECT_EQ(m["subcommand"], "synth");
  EXPECT_EQ(m["config"]["family"], "empty");
  EXPECT_EQ(m["outputs"][0], "volume.f32");
}

TEST(Cli, ManifestRerunIsByteIdentical) {
  const auto cfg = write_config("fil.json", {{"family", "filaments"}, {"dims", {16, 16, 16}}, {"count", 5},
                                             {"length_px", {5, 16}}, {"snr", 2}, {"seed", 9}});
  const auto a = workdir() / "fil_a", b = workdir() / "fil_b";
  ASSERT_EQ(run_cli("synth --config " + q(cfg) + " --out " + q(a)), 0);
  ASSERT_EQ(run_cli("synth --config " + q(a / "manifest.json") + " --out " + q(b)), 0);
  for (const char* f : {"volume.f32", "filaments.json", "noise.json"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  auto ma = read_json(a / "manifest.json"), mb = read_json(b / "manifest.json");
  EXPECT_EQ(ma["config"], mb["config"]);
  EXPECT_EQ(ma["config"]["margin"], 0.02);  // defaults are echoed
  ASSERT_EQ(run_cli("synth --config " + q(cfg) + " --seed 10 --out " + q(b)), 0);
  EXPECT_NE(slurp(a / "volume.f32"), slurp(b / "volume.f32"));
}

TEST(Cli, LsiOfConstantVolumeIsAStepFunction) {
  auto v = PixelVolume::cube(2, 16);
  for (double& x : v.data) x = 2.0;
  const auto in = workdir() / "const.f32";
  write_volume(in, v);
  const auto out = workdir() / "lsi";
  ASSERT_EQ(run_cli("stats --stat lsi --scale 2 --threshold-grid values:-1,0.1,0.2,0.5 --input " + q(in) + " --out " + q(out)), 0);
  // coefficient = 2 x Euclidean length; count lengths above t/2 directly
  const GridSpec g(2, 2, 4);
  const auto segs = all_beamlets(g);
  std::istringstream csv(slurp(out / "lsi.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "threshold,lsi");
  std::size_t rows = 0;
  // rows run from the highest threshold down, so S rises
  double prev = -1.0, prev_t = 1e9;
  while (std::getline(csv, line)) {
    const double t = std::stod(line.substr(0, line.find(','))), s = std::stod(line.substr(line.find(',') + 1));
    std::size_t above = 0;
    for (const auto& seg : segs) above += 2.0 * euclidean_length(g, seg) > t;
    EXPECT_NEAR(s, std::log1p(static_cast<double>(above)) / std::log1p(static_cast<double>(segs.size())), 1e-12);
    EXPECT_GE(s, prev);
    EXPECT_LT(t, prev_t);
    prev = s;
    prev_t = t;
    ++rows;
  }
  EXPECT_EQ(rows, 4u);
}

TEST(Cli, StatsWriteTheirSeries) {
  const auto cfg = write_config("small.json", {{"family", "filaments"}, {"dims", {16, 16, 16}}, {"count", 6},
                                               {"length_px", {8, 16}}, {"snr", 3}, {"seed", 3}});
  const auto vol = workdir() / "small";
  ASSERT_EQ(run_cli("synth --config " + q(cfg) + " --out " + q(vol)), 0);
  const auto in = q(vol / "volume.f32");
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"edges_vs_nodes", "edges_vs_nodes.csv"}, {"betweenness", "betweenness_survival.csv"}, {"fsi", "fsi.csv"}, {"fsr", "fsr.csv"}};
  for (const auto& [stat, file] : runs) {
    const auto out = workdir() / ("stat_" + stat);
    ASSERT_EQ(run_cli("stats --stat " + stat + " --scale 2 --vertex-count 300 --input " + in + " --out " + q(out)), 0) << stat;
    EXPECT_TRUE(fs::file_size(out / file) > 10) << stat;
    EXPECT_TRUE(fs::exists(out / "manifest.json"));
  }
  const auto s = read_json(workdir() / "stat_betweenness" / "betweenness.json");
  EXPECT_EQ(s["nodes"], 300);
}

TEST(Cli, LsrOnUniformCloudsIsMostlyH0) {
  const auto cal = workdir() / "cal";
  const auto cfg = write_config("cloud.json", {{"family", "uniform_cloud"}, {"n", 1000}, {"d", 2}});
  ASSERT_EQ(run_cli("synth --config " + q(cfg) + " --seed 1 --out " + q(cal)), 0);
  ASSERT_EQ(run_cli("detect --stat lsr --seed 77 --input " + q(cal / "cloud.csv") + " --out " + q(cal)), 0);
  const double tau = read_json(cal / "decision.json")["tau"];
  const auto tau_cfg = write_config("tau.json", {{"tau", tau}});
  int h0 = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    const auto dir = workdir() / ("u" + std::to_string(s));
    ASSERT_EQ(run_cli("synth --config " + q(cfg) + " --seed " + std::to_string(100 + s) + " --out " + q(dir)), 0);
    ASSERT_EQ(run_cli("detect --config " + q(tau_cfg) + " --input " + q(dir / "cloud.csv") + " --out " + q(dir)), 0);
    h0 += read_json(dir / "decision.json")["decision"] == "H0";
  }
  EXPECT_GE(h0, 19);
}

TEST(Cli, CoverSineCurveAllPass) {
  const auto out = workdir() / "cover";
  ASSERT_EQ(run_cli("cover --out " + q(out)), 0);
  const auto c = read_json(out / "chain.json");
  EXPECT_TRUE(c["report"]["all_pass"].get<bool>());
  EXPECT_TRUE(c["beamlet_report"]["ok"].get<bool>());
  EXPECT_EQ(c["beams"].size(), c["report"]["beams"].get<std::size_t>());
  EXPECT_LE(c["beams"].size(), c["report"]["claim1"]["bound"].get<double>());
}

TEST(Cli, ExitCodes) {
  const auto out = q(workdir() / "errors");
  const auto vol = workdir() / "zeros.f32";
  write_volume(vol, PixelVolume::cube(2, 8));
  const auto bad_family = write_config("bad.json", {{"family", "nope"}});
  EXPECT_EQ(run_cli("synth --config " + q(bad_family) + " --out " + out), 2);
  EXPECT_EQ(run_cli("synth --no-such-flag"), 2);
  EXPECT_EQ(run_cli("stats --stat nope --input " + q(vol) + " --out " + out), 2);
  EXPECT_EQ(run_cli("stats --threshold-grid quantile:3 --input " + q(vol) + " --out " + out), 2);
  const auto junk = workdir() / "junk.f32";
  write_text(junk, "{\"dims\":[4,4]}\n");
  EXPECT_EQ(run_cli("transform --input " + q(junk) + " --out " + out), 3);
  const auto coarse = write_config("coarse.json", {{"scale", 2}, {"J", 16}, {"tube_samples", 500}});
  EXPECT_EQ(run_cli("cover --config " + q(coarse) + " --out " + out), 4);
  EXPECT_EQ(run_cli("detect --stat glrt --input " + q(vol) + " --out " + out), 2);
}
