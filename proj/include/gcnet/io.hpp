#pragma once

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcnet/beam_net.hpp"
#include "gcnet/curve_cover.hpp"
#include "gcnet/data.hpp"
#include "gcnet/detect.hpp"
#include "gcnet/error.hpp"
#include "gcnet/volumes.hpp"

namespace gcnet {

inline constexpr const char* kVersion = "0.1.0";

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Volumes: one JSON header line, then raw little-endian float32 data.

inline void write_volume(std::ostream& os, const PixelVolume& vol) {
  vol.validate();
  const json header = {{"dims", vol.dims}, {"dtype", "f32"}, {"order", "row-major"}, {"endianness", "little"}};
  os << header.dump() << '\n';
  std::vector<unsigned char> buf(vol.size() * 4);
  for (std::size_t i = 0; i < vol.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(vol.data[i]));
    for (int b = 0; b < 4; ++b) buf[i * 4 + static_cast<std::size_t>(b)] = static_cast<unsigned char>(bits >> (8 * b));
  }
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

inline PixelVolume read_volume(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("volume: missing header line");
  json h;
  try {
    h = json::parse(line);
  } catch (const json::exception& e) {
    throw FormatError(std::string("volume: header is not JSON: ") + e.what());
  }
  if (!h.is_object() || !h.contains("dims") || !h["dims"].is_array()) throw FormatError("volume: header needs a dims array");
  if (h.value("dtype", "") != "f32" || h.value("order", "") != "row-major" || h.value("endianness", "") != "little")
    throw FormatError("volume: only f32 row-major little-endian data is supported");
  std::vector<int> dims;
  for (const auto& d : h["dims"]) {
    if (!d.is_number_integer() || d.get<long long>() < 1 || d.get<long long>() > (1 << 20))
      throw FormatError("volume: dims must be positive integers");
    dims.push_back(d.get<int>());
  }
  if (dims.empty() || dims.size() > 3) throw FormatError("volume: 1 to 3 dims expected");
  auto vol = PixelVolume::zeros(dims);
  std::vector<unsigned char> buf(vol.size() * 4);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(is.gcount()) != buf.size()) throw FormatError("volume: truncated data");
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("volume: trailing bytes after data");
  for (std::size_t i = 0; i < vol.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(buf[i * 4 + static_cast<std::size_t>(b)]) << (8 * b);
    vol.data[i] = std::bit_cast<float>(bits);
  }
  vol.validate();
  return vol;
}

inline void write_volume(const std::filesystem::path& p, const PixelVolume& vol) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + p.string());
  write_volume(os, vol);
}

inline PixelVolume read_volume(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw FormatError("cannot open " + p.string());
  return read_volume(is);
}

// ---------------------------------------------------------------------------
// CSV

inline std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline void write_cloud_csv(std::ostream& os, const PointCloud& c) {
  for (int a = 0; a < c.d; ++a) os << (a ? "," : "") << 'x' << a + 1;
  os << '\n';
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto p = c.point(i);
    for (std::size_t a = 0; a < p.size(); ++a) os << (a ? "," : "") << fmt(p[a]);
    os << '\n';
  }
}

inline PointCloud read_cloud_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("cloud: empty file");
  int d = 1;
  for (char ch : line) d += ch == ',';
  if (line.empty() || line[0] != 'x') throw FormatError("cloud: header must be x1,...,xd");
  PointCloud c(d);
  std::vector<double> p(static_cast<std::size_t>(d));
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t a = 0;
    while (std::getline(ss, cell, ',')) {
      if (a >= p.size()) throw FormatError("cloud: too many columns on row " + std::to_string(row));
      try {
        std::size_t used = 0;
        p[a] = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw FormatError("cloud: bad number '" + cell + "' on row " + std::to_string(row));
      }
      ++a;
    }
    if (a != p.size()) throw FormatError("cloud: too few columns on row " + std::to_string(row));
    c.add(p);
  }
  c.validate();
  return c;
}

inline PointCloud read_cloud_csv(const std::filesystem::path& p) {
  std::ifstream is(p);
  if (!is) throw FormatError("cannot open " + p.string());
  return read_cloud_csv(is);
}

inline void write_cloud_csv(const std::filesystem::path& p, const PointCloud& c) {
  std::ofstream os(p);
  if (!os) throw ConfigError("cannot write " + p.string());
  write_cloud_csv(os, c);
}

/// Coefficient table: endpoints in delta0 units, then the coefficient.
inline void write_coefficients_csv(std::ostream& os, const CoefficientTable& t) {
  const int d = t.grid.d;
  for (int a = 0; a < d; ++a) os << "b1_" << a + 1 << ',';
  for (int a = 0; a < d; ++a) os << "b2_" << a + 1 << ',';
  os << "coefficient\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& s = t.beamlets[i];
    for (int a = 0; a < d; ++a) os << s.b1.c[static_cast<std::size_t>(a)] << ',';
    for (int a = 0; a < d; ++a) os << s.b2.c[static_cast<std::size_t>(a)] << ',';
    os << fmt(t.coef[i]) << '\n';
  }
}

inline CoefficientTable read_coefficients_csv(std::istream& is, int j, int J) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("coefficients: empty file");
  int cols = 1;
  for (char ch : line) cols += ch == ',';
  if ((cols - 1) % 2 != 0 || cols < 5) throw FormatError("coefficients: header must list b1, b2 and coefficient");
  const int d = (cols - 1) / 2;
  CoefficientTable t;
  t.grid = GridSpec(d, j, J);
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != cols) throw FormatError("coefficients: wrong column count on row " + std::to_string(row));
    GridPoint a, b;
    try {
      for (int r = 0; r < d; ++r) {
        a.c[static_cast<std::size_t>(r)] = std::stoll(cells[static_cast<std::size_t>(r)]);
        b.c[static_cast<std::size_t>(r)] = std::stoll(cells[static_cast<std::size_t>(d + r)]);
      }
      t.coef.push_back(std::stod(cells.back()));
    } catch (const std::exception&) {
      throw FormatError("coefficients: bad value on row " + std::to_string(row));
    }
    if (!is_beamlet(t.grid, a, b)) throw FormatError("coefficients: row " + std::to_string(row) + " is not a beamlet at this scale");
    t.beamlets.push_back(Segment::make(a, b));
  }
  return t;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void write(std::ostream& os) const {
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt(r[i]);
      os << '\n';
    }
  }
};

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + p.string());
  os << s;
}

inline void write_csv(const std::filesystem::path& p, const CsvTable& t) {
  std::ostringstream os;
  t.write(os);
  write_text(p, os.str());
}

// ---------------------------------------------------------------------------
// JSON views

inline json point_json(const GridPoint& p, int d) {
  json a = json::array();
  for (int r = 0; r < d; ++r) a.push_back(p.c[static_cast<std::size_t>(r)]);
  return a;
}

inline json segment_json(const GridSpec& g, const Segment& s, const char* kind) {
  return {{"kind", kind}, {"b1", point_json(s.b1, g.d)}, {"b2", point_json(s.b2, g.d)}, {"j", g.j}, {"J", g.J}};
}

inline json chain_json(const BeamChain& c) {
  json segs = json::array();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto s = c.segment(i);
    std::string kind = "beamlet";
    if (!c.beamlets) {
      const auto k = classify_beam(c.grid, s.b1, s.b2);
      kind = !k ? "invalid" : k->r2 < 0 ? "r-beam" : "r1r2-beam";
    }
    segs.push_back(segment_json(c.grid, s, kind.c_str()));
  }
  return segs;
}

inline json report_json(const CoverReport& r) {
  return {{"beams", r.beams},
          {"claim1", {{"pass", r.claim1}, {"bound", r.claim1_bound}}},
          {"claim2_failures", r.claim2_failures},
          {"claim3_failures", r.claim3_failures},
          {"claim4_failures", r.claim4_failures},
          {"spacing_failures", r.sdiff_failures},
          {"max_snap", r.max_snap},
          {"max_tube_distance", r.max_tube_distance},
          {"all_pass", r.all_pass()}};
}

inline json gcn_json(const GCN& g) {
  json v = json::array(), e = json::array();
  for (std::size_t i = 0; i < g.node_count(); ++i)
    v.push_back({{"id", i},
                 {"b1", point_json(g.vertices[i].b1, g.grid.d)},
                 {"b2", point_json(g.vertices[i].b2, g.grid.d)},
                 {"coefficient", g.weights[i]}});
  for (std::uint32_t u = 0; u < g.graph.n; ++u)
    for (auto w : g.graph.out[u])
      if (g.dag || u < w) e.push_back({u, w});
  return {{"dag", g.dag}, {"j", g.grid.j}, {"J", g.grid.J}, {"vertices", v}, {"edges", e}};
}

inline json node_json(const PolyNode& n) { return {{"cell", n.cell}, {"coefficients", n.coefs}}; }

inline json decision_json(const std::string& statistic, double value, double threshold, Decision d,
                          const std::vector<PolyNode>& witness) {
  json w = json::array();
  for (const auto& n : witness) w.push_back(node_json(n));
  return {{"statistic", statistic}, {"value", value}, {"threshold", threshold}, {"decision", to_string(d)}, {"witness", w}};
}

// ---------------------------------------------------------------------------
// Run manifest

struct RunManifest {
  std::string subcommand;
  json config = json::object();
  json seeds = json::object();
  std::vector<std::string> inputs, outputs;
  double wall_seconds = 0.0;

  json to_json() const {
    return {{"subcommand", subcommand}, {"config", config},   {"seeds", seeds},
            {"inputs", inputs},         {"outputs", outputs}, {"version", kVersion},
            {"wall_clock_seconds", wall_seconds}};
  }
};

}  // namespace gcnet
