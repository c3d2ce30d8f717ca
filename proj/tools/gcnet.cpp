// gcnet: batch front end for synthesis, transforms, network statistics, curve covers and detection.
//
// Every run resolves an options object (defaults <- --config file <- flags), echoes it into
// manifest.json and writes its artifacts to --out. Passing a manifest back through --config
// reruns the same computation.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gcnet/gcnet.hpp"

namespace fs = std::filesystem;
using namespace gcnet;

namespace {

struct Flags {
  std::string config, out = ".", input, reference, stat, grid;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads, scale, max_scale;
  std::optional<std::size_t> vertex_count;
  std::optional<double> eps;
  bool dag = true;
  CLI::Option* dag_opt = nullptr;
};

json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  try {
    json j = json::parse(is);
    if (!j.is_object()) throw ConfigError("config " + path + " must be a JSON object");
    // a manifest carries its resolved options under "config"
    if (j.contains("subcommand") && j.contains("config") && j["config"].is_object()) return j["config"];
    return j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
}

template <class T>
T get(const json& o, const char* key) {
  try {
    return o.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("option '") + key + "': " + e.what());
  }
}

template <class T>
T get_or(const json& o, const char* key, T fallback) {
  if (!o.contains(key) || o[key].is_null()) return fallback;
  return get<T>(o, key);
}

json resolve_options(const Flags& f, json defaults) {
  json o = std::move(defaults);
  if (!f.config.empty()) o.update(load_json(f.config));
  if (f.seed) o["seed"] = *f.seed;
  if (f.threads) o["threads"] = *f.threads;
  if (f.scale) o["scale"] = *f.scale;
  if (f.max_scale) o["max_scale"] = *f.max_scale;
  if (!f.input.empty()) o["input"] = f.input;
  if (!f.reference.empty()) o["reference"] = f.reference;
  if (!f.stat.empty()) o["stat"] = f.stat;
  if (!f.grid.empty()) o["threshold_grid"] = f.grid;
  if (f.vertex_count) o["vertex_count"] = *f.vertex_count;
  if (f.eps) o["eps"] = *f.eps;
  if (f.dag_opt && f.dag_opt->count() > 0) o["dag"] = f.dag;
  if (get_or<int>(o, "threads", 1) < 1) throw ConfigError("--threads must be >= 1");
  return o;
}

double snr_value(const json& o) {
  if (!o.contains("snr") || o["snr"].is_null()) return std::numeric_limits<double>::infinity();
  if (o["snr"].is_string()) {
    if (o["snr"] == "inf") return std::numeric_limits<double>::infinity();
    throw ConfigError("snr must be a number, \"inf\" or null");
  }
  return get<double>(o, "snr");
}

std::pair<double, double> range_of(const json& o, const char* key, std::pair<double, double> fallback) {
  if (!o.contains(key)) return fallback;
  const auto v = get<std::vector<double>>(o, key);
  if (v.size() != 2) throw ConfigError(std::string("option '") + key + "' must be [lo, hi]");
  return {v[0], v[1]};
}

HolderParams holder_of(const json& o, int d) {
  HolderParams p{get_or<int>(o, "k", 1), get_or<int>(o, "d", d), get_or<double>(o, "alpha", 2.0), get_or<double>(o, "beta", 1.0)};
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Threshold grids: quantile:N:lo:hi, linear:lo:hi:N, values:a,b,...

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  return out;
}

double to_num(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("threshold grid: bad number '" + s + "'");
  }
}

std::size_t to_count(const std::string& s) {
  const double v = to_num(s);
  if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("threshold grid: count must be a positive integer");
  return static_cast<std::size_t>(v);
}

/// Thresholds in descending order; quantiles are taken over `sample`.
std::vector<double> threshold_grid(const std::string& spec, std::vector<double> sample) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const auto args = colon == std::string::npos ? std::vector<std::string>{} : split(spec.substr(colon + 1), ':');
  std::vector<double> t;
  if (kind == "quantile") {
    if (args.size() != 3) throw ConfigError("threshold grid: quantile:N:lo:hi");
    const auto n = to_count(args[0]);
    const double lo = to_num(args[1]), hi = to_num(args[2]);
    if (!(0.0 <= lo && lo <= hi && hi <= 1.0)) throw ConfigError("threshold grid: need 0 <= lo <= hi <= 1");
    if (sample.empty()) throw ConfigError("threshold grid: no values to take quantiles of");
    std::sort(sample.begin(), sample.end());
    for (std::size_t i = 0; i < n; ++i) {
      const double q = n == 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
      t.push_back(sample[static_cast<std::size_t>(std::llround(q * static_cast<double>(sample.size() - 1)))]);
    }
  } else if (kind == "linear") {
    if (args.size() != 3) throw ConfigError("threshold grid: linear:lo:hi:N");
    const double lo = to_num(args[0]), hi = to_num(args[1]);
    const auto n = to_count(args[2]);
    for (std::size_t i = 0; i < n; ++i) t.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  } else if (kind == "values") {
    if (args.size() != 1) throw ConfigError("threshold grid: values:a,b,...");
    for (const auto& v : split(args[0], ',')) t.push_back(to_num(v));
    if (t.empty()) throw ConfigError("threshold grid: no values");
  } else {
    throw ConfigError("threshold grid: unknown kind '" + kind + "' (quantile, linear or values)");
  }
  std::sort(t.begin(), t.end(), std::greater<>());
  return t;
}

// ---------------------------------------------------------------------------

class Run {
 public:
  Run(std::string sub, const Flags& f, json options) : out_(f.out) {
    m_.subcommand = std::move(sub);
    m_.config = std::move(options);
    fs::create_directories(out_);
  }

  const json& opt() const { return m_.config; }
  void seed(const std::string& name, std::uint64_t v) { m_.seeds[name] = v; }
  void input(const std::string& p) { m_.inputs.push_back(p); }

  fs::path output(const std::string& name) {
    m_.outputs.push_back(name);
    return out_ / name;
  }

  void json_out(const std::string& name, const json& j) { write_text(output(name), j.dump(2) + '\n'); }
  void csv_out(const std::string& name, const CsvTable& t) { write_csv(output(name), t); }

  void finish() {
    m_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_text(out_ / "manifest.json", m_.to_json().dump(2) + '\n');
  }

 private:
  fs::path out_;
  RunManifest m_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

json filament_json(const FilamentSpec& f) {
  json j = {{"x0", f.x0}, {"length", f.length}, {"amp", f.amp}, {"freq", f.freq}, {"phase", f.phase}, {"center", f.center}};
  if (!f.splay.empty()) {
    j["splay"] = f.splay;
    j["hub_x"] = f.hub_x;
    j["hub_half"] = f.hub_half;
    j["splay_width"] = f.splay_width;
  }
  return j;
}

// ---------------------------------------------------------------------------
// synth

void fill(json& o, const char* key, json value) {
  if (!o.contains(key)) o[key] = std::move(value);
}

// The echoed config lists every effective setting of the family.
json synth_options(const Flags& f) {
  json o = resolve_options(f, {{"family", "filaments"}, {"seed", 1}});
  const auto family = get<std::string>(o, "family");
  fill(o, "snr", "inf");
  if (family == "filaments" || family == "empty" || family == "noise") {
    fill(o, "dims", {64, 64, 64});
    fill(o, "amplitude", 1.0);
  }
  if (family == "filaments") {
    const FilamentRanges r;
    const auto dims = get<std::vector<int>>(o, "dims");
    fill(o, "length_px", {10.0, dims.empty() ? 0.0 : static_cast<double>(dims[0])});
    fill(o, "amplitude_range", {r.amp_lo, r.amp_hi});
    fill(o, "frequency_range", {r.freq_lo, r.freq_hi});
    fill(o, "margin", r.margin);
    fill(o, "noise_seed", trial_seed(get<std::uint64_t>(o, "seed"), 1));
    if (o.contains("hubs") && o["hubs"].is_object()) {
      const HubSpec h;
      json& hj = o["hubs"];
      fill(hj, "groups", h.groups);
      fill(hj, "per_group", h.per_group);
      fill(hj, "hub_px", h.hub_px);
      fill(hj, "splay", {h.splay_lo, h.splay_hi});
      fill(hj, "transition_px", h.transition_px);
      fill(hj, "control_offset_px", h.control_offset_px);
      fill(hj, "control", h.control);
      fill(o, "count", get<int>(hj, "groups") * get<int>(hj, "per_group"));
    }
    fill(o, "count", 20);
  }
  if (family == "uniform_cloud" || family == "h1_cloud" || family == "planted_cloud") {
    fill(o, "d", 2);
    if (family != "uniform_cloud") {
      fill(o, "k", 1);
      fill(o, "alpha", 2.0);
      fill(o, "beta", 1.0);
    }
  }
  return o;
}

void cmd_synth(const Flags& f) {
  Run run("synth", f, synth_options(f));
  const json& o = run.opt();
  const auto family = get<std::string>(o, "family");
  const auto seed = get<std::uint64_t>(o, "seed");
  const double snr = snr_value(o);
  const double amplitude = get_or<double>(o, "amplitude", 1.0);
  run.seed("scenario", seed);

  auto emit_volume = [&](const PixelVolume& clean, std::uint64_t noise_seed) {
    const auto noisy = add_noise(clean, snr, noise_seed);
    if (std::isfinite(snr)) run.seed("noise", noise_seed);
    write_volume(run.output("volume.f32"), noisy.volume);
    run.json_out("noise.json", {{"sigma", noisy.noise.sigma},
                                {"snr", std::isfinite(snr) ? json(snr) : json("inf")},
                                {"amplitude", noisy.noise.amplitude},
                                {"seed", noise_seed}});
  };

  if (family == "filaments" || family == "empty" || family == "noise") {
    const auto dims = get_or<std::vector<int>>(o, "dims", {64, 64, 64});
    if (family == "empty") {
      emit_volume(PixelVolume::zeros(dims), trial_seed(seed, 1));
    } else if (family == "noise") {
      if (!std::isfinite(snr)) throw ConfigError("noise scenario needs a finite snr");
      const auto nv = noise_volume(dims, amplitude, snr, seed);
      write_volume(run.output("volume.f32"), nv.volume);
      run.json_out("noise.json", {{"sigma", nv.noise.sigma}, {"snr", snr}, {"amplitude", amplitude}, {"seed", seed}});
    } else {
      for (int n : dims)
        if (n != dims[0]) throw ConfigError("filament scenarios need a cubic volume");
      FilamentRanges r;
      r.d = static_cast<int>(dims.size());
      r.side = dims[0];
      std::tie(r.length_px_lo, r.length_px_hi) = range_of(o, "length_px", {10.0, static_cast<double>(r.side)});
      std::tie(r.amp_lo, r.amp_hi) = range_of(o, "amplitude_range", {r.amp_lo, r.amp_hi});
      std::tie(r.freq_lo, r.freq_hi) = range_of(o, "frequency_range", {r.freq_lo, r.freq_hi});
      r.margin = get_or<double>(o, "margin", r.margin);
      std::optional<HubSpec> hubs;
      if (o.contains("hubs") && !o["hubs"].is_null()) {
        const json& h = o["hubs"];
        HubSpec s;
        s.groups = get_or<int>(h, "groups", s.groups);
        s.per_group = get_or<int>(h, "per_group", s.per_group);
        s.hub_px = get_or<double>(h, "hub_px", s.hub_px);
        std::tie(s.splay_lo, s.splay_hi) = range_of(h, "splay", {s.splay_lo, s.splay_hi});
        s.transition_px = get_or<double>(h, "transition_px", s.transition_px);
        s.control_offset_px = get_or<double>(h, "control_offset_px", s.control_offset_px);
        s.control = get_or<bool>(h, "control", false);
        hubs = s;
      }
      const int count = get_or<int>(o, "count", hubs ? hubs->groups * hubs->per_group : 20);
      const auto fils = gen_trig_filaments(count, r, hubs, seed);
      json specs = json::array();
      for (const auto& fl : fils) specs.push_back(filament_json(fl.spec));
      run.json_out("filaments.json", specs);
      emit_volume(rasterize(fils, dims, amplitude), get_or<std::uint64_t>(o, "noise_seed", trial_seed(seed, 1)));
    }
  } else if (family == "uniform_cloud" || family == "h1_cloud" || family == "planted_cloud") {
    const auto n = get<std::size_t>(o, "n");
    const int d = get_or<int>(o, "d", 2);
    if (family == "uniform_cloud") {
      write_cloud_csv(run.output("cloud.csv"), gen_uniform_cloud(n, d, seed));
    } else {
      const auto params = holder_of(o, d);
      Rng frng(trial_seed(seed, 2));
      const auto fn = random_trig_function(params, frng);
      run.seed("function", trial_seed(seed, 2));
      const double eta = get<double>(o, "eta");
      const auto h1 = family == "h1_cloud" ? gen_h1_cloud(n, get<double>(o, "eps"), fn, eta, seed)
                                           : gen_planted_cloud(n, get<std::size_t>(o, "planted"), fn, eta, seed);
      write_cloud_csv(run.output("cloud.csv"), h1.cloud);
      json comps = json::array();
      for (const auto& c : fn.components())
        comps.push_back({{"amp", c.amp}, {"freq", c.freq}, {"phase", c.phase}, {"offset", c.offset}});
      run.json_out("truth.json", {{"planted", h1.planted}, {"clipped_fraction", h1.clipped_fraction()}, {"function", comps}});
    }
  } else {
    throw ConfigError("unknown scenario family '" + family + "'");
  }
  run.finish();
}

// ---------------------------------------------------------------------------
// transform / stats

PixelVolume load_input_volume(Run& run, const char* key = "input") {
  if (!run.opt().contains(key)) throw ConfigError(std::string("--") + key + " volume is required");
  const auto p = get<std::string>(run.opt(), key);
  run.input(p);
  return read_volume(fs::path(p));
}

void cmd_transform(const Flags& f) {
  Run run("transform", f, resolve_options(f, {{"scale", 3}}));
  const auto vol = load_input_volume(run);
  const auto table = beamlet_transform(vol, get<int>(run.opt(), "scale"));
  std::ostringstream os;
  write_coefficients_csv(os, table);
  write_text(run.output("coefficients.csv"), os.str());
  run.json_out("transform.json", {{"beamlets", table.size()}, {"j", table.grid.j}, {"J", table.grid.J},
                                  {"min", table.min()}, {"max", table.max()}});
  run.finish();
}

void stats_edges_vs_nodes(Run& run, const CoefficientTable& table, bool dag) {
  const auto grid = threshold_grid(get<std::string>(run.opt(), "threshold_grid"), table.coef);
  CsvTable t{{"threshold", "nodes", "edges"}, {}};
  for (const auto& p : edges_vs_nodes(table, grid, dag))
    t.rows.push_back({p.threshold, static_cast<double>(p.nodes), static_cast<double>(p.edges)});
  run.csv_out("edges_vs_nodes.csv", t);
}

void stats_lsi(Run& run, const CoefficientTable& table) {
  const auto grid = threshold_grid(get<std::string>(run.opt(), "threshold_grid"), table.coef);
  CsvTable t{{"threshold", "lsi"}, {}};
  const auto s = lsi_curve(table, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) t.rows.push_back({grid[i], s[i]});
  run.csv_out("lsi.csv", t);
}

GCN top_gcn(Run& run, const CoefficientTable& table, bool dag) {
  const auto k = get<std::size_t>(run.opt(), "vertex_count");
  return threshold_and_build(table, threshold_for_count(table, k, dag), dag);
}

void stats_betweenness(Run& run, const CoefficientTable& table, bool dag) {
  const auto g = top_gcn(run, table, dag);
  const auto b = betweenness(g);
  CsvTable per{{"vertex", "coefficient", "betweenness"}, {}};
  for (std::size_t v = 0; v < b.size(); ++v) per.rows.push_back({static_cast<double>(v), g.weights[v], b[v]});
  run.csv_out("betweenness.csv", per);
  // survival: fraction of vertices with betweenness >= x
  auto sorted = b;
  std::sort(sorted.begin(), sorted.end());
  CsvTable surv{{"betweenness", "fraction_at_least"}, {}};
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (i == 0 || sorted[i] != sorted[i - 1])
      surv.rows.push_back({sorted[i], static_cast<double>(sorted.size() - i) / static_cast<double>(sorted.size())});
  run.csv_out("betweenness_survival.csv", surv);
  run.json_out("betweenness.json", {{"nodes", g.node_count()}, {"edges", g.edge_count()},
                                    {"max", sorted.empty() ? 0.0 : sorted.back()}});
}

std::vector<double> path_weights(const PathDecomposition& d) {
  std::vector<double> w;
  for (const auto& p : d) w.push_back(p.weight);
  return w;
}

void stats_fsi(Run& run, const CoefficientTable& table) {
  const auto d = lwp_decomposition(top_gcn(run, table, true));
  if (d.empty()) throw ConfigError("fsi: no vertices survive the threshold");
  CsvTable paths{{"rank", "weight", "vertices"}, {}};
  for (std::size_t i = 0; i < d.size(); ++i)
    paths.rows.push_back({static_cast<double>(i), d[i].weight, static_cast<double>(d[i].vertices.size())});
  run.csv_out("paths.csv", paths);
  const auto grid = threshold_grid(get_or<std::string>(run.opt(), "threshold_grid", "quantile:64:0:1"), path_weights(d));
  CsvTable t{{"t", "fsi"}, {}};
  for (double x : grid) t.rows.push_back({x, fsi(d, x)});
  run.csv_out("fsi.csv", t);
}

void stats_fsr(Run& run, const PixelVolume& vol, int j) {
  const json& o = run.opt();
  PixelVolume ref;
  if (o.contains("reference")) {
    ref = load_input_volume(run, "reference");
  } else {
    const auto s = get<std::uint64_t>(o, "seed");
    run.seed("reference_noise", s);
    ref = energy_matched_noise(vol, s);
  }
  const auto k = get<std::size_t>(o, "vertex_count");
  const double eps = get<double>(o, "eps");
  CsvTable t{{"t", "fsr"}, {}};
  json summary;
  if (!o.contains("threshold_grid")) {
    const auto c = fsr_curve(vol, ref, j, k, eps);
    for (std::size_t i = 0; i < c.t.size(); ++i) t.rows.push_back({c.t[i], c.ratio[i]});
    summary = {{"vertex_threshold", c.vertex_threshold}, {"image_paths", c.image_paths},
               {"reference_paths", c.reference_paths}, {"max_ratio", c.max_ratio()}};
  } else {
    if (!vol.same_shape(ref)) throw ConfigError("fsr: volumes differ in shape");
    const auto ti = beamlet_transform(vol, j), tr = beamlet_transform(ref, j);
    const double vt = threshold_for_count(ti, k, true);
    const auto di = lwp_decomposition(threshold_and_build(ti, vt, true));
    const auto dr = lwp_decomposition(threshold_and_build(tr, vt, true));
    if (di.empty() || dr.empty()) throw ConfigError("fsr: a decomposition is empty; raise --vertex-count");
    auto pooled = path_weights(di);
    const auto wr = path_weights(dr);
    pooled.insert(pooled.end(), wr.begin(), wr.end());
    double best = 0.0;
    for (double x : threshold_grid(get<std::string>(o, "threshold_grid"), pooled)) {
      const double r = fsr(di, dr, x, eps);
      best = std::max(best, r);
      t.rows.push_back({x, r});
    }
    summary = {{"vertex_threshold", vt}, {"image_paths", di.size()}, {"reference_paths", dr.size()}, {"max_ratio", best}};
  }
  std::sort(t.rows.begin(), t.rows.end());
  run.csv_out("fsr.csv", t);
  run.json_out("fsr.json", summary);
}

void cmd_stats(const Flags& f) {
  auto options = resolve_options(f, {{"scale", 3}, {"dag", true}, {"vertex_count", 4000}, {"eps", 0.01}, {"seed", 1},
                                      {"stat", "edges_vs_nodes"}});
  const auto stat = get<std::string>(options, "stat");
  if (!options.contains("threshold_grid") && (stat == "edges_vs_nodes" || stat == "lsi"))
    options["threshold_grid"] = stat == "lsi" ? "quantile:64:0.5:0.999" : "quantile:64:0.9:0.999";
  Run run("stats", f, std::move(options));
  const json& o = run.opt();
  const bool dag = get<bool>(o, "dag");
  const int j = get<int>(o, "scale");
  const auto vol = load_input_volume(run);
  if (stat == "fsr") {
    stats_fsr(run, vol, j);
  } else {
    const auto table = beamlet_transform(vol, j);
    if (stat == "edges_vs_nodes")
      stats_edges_vs_nodes(run, table, dag);
    else if (stat == "lsi")
      stats_lsi(run, table);
    else if (stat == "betweenness")
      stats_betweenness(run, table, dag);
    else if (stat == "fsi")
      stats_fsi(run, table);
    else
      throw ConfigError("unknown --stat '" + stat + "' (edges_vs_nodes, betweenness, fsi, fsr, lsi)");
  }
  run.finish();
}

// ---------------------------------------------------------------------------
// cover

void cmd_cover(const Flags& f) {
  Run run("cover", f,
          resolve_options(f, {{"curve", {{"y0", 0.5}, {"amplitude", 0.1}, {"frequency", 1.0}, {"phase", 0.0}, {"lambda", 2.0}}},
                              {"K", 2}, {"max_scale", 30}, {"tube_samples", 10000}}));
  const json& o = run.opt();
  const json& c = o.at("curve");
  const auto gamma = sinusoid_curve(get<double>(c, "y0"), get<double>(c, "amplitude"), get<double>(c, "frequency"),
                                    get<double>(c, "phase"), get_or<double>(c, "lambda", 2.0));
  const auto rep = validate_curve(gamma, 2000, 1);
  if (!rep.ok()) throw ConfigError("cover: the curve fails its class validators");
  int j = 0, J = 0;
  if (o.contains("scale")) {
    if (!o.contains("J")) throw ConfigError("cover: --scale needs J in the config (or omit both to choose them)");
    j = get<int>(o, "scale");
    J = get<int>(o, "J");
  } else {
    std::tie(j, J) = choose_cover_scale(gamma.curve_class(), get<int>(o, "K"), get<int>(o, "max_scale"));
  }
  CoverOptions opt;
  opt.K = get<int>(o, "K");
  opt.tube_samples = get<std::size_t>(o, "tube_samples");
  opt.throw_on_violation = false;
  const auto res = cover_curve(gamma, j, J, opt);
  const auto beamlets = beams_to_beamlets(res.chain);
  const auto audit = audit_beamlet_chain(res.chain, beamlets);
  const double lam = gamma.curve_class().lambda;
  const double beamlet_bound = 2.0 * res.chain.grid.d * (lam * std::ldexp(1.0, j) + 2.0);
  run.json_out("chain.json",
               {{"j", j},
                {"J", J},
                {"beams", chain_json(res.chain)},
                {"beamlets", chain_json(beamlets)},
                {"report", report_json(res.report)},
                {"beamlet_report",
                 {{"beamlets", audit.beamlets}, {"bound", beamlet_bound}, {"within_bound", audit.beamlets <= beamlet_bound},
                  {"invalid", audit.invalid}, {"continuation_failures", audit.continuation_failures}, {"ok", audit.ok()}}}});
  run.finish();
  if (!res.report.all_pass() || !audit.ok() || audit.beamlets > beamlet_bound)
    throw ClaimViolation("cover: " + res.report.summary());
}

// ---------------------------------------------------------------------------
// detect

void cmd_detect(const Flags& f) {
  Run run("detect", f,
          resolve_options(f, {{"stat", "lsr"}, {"k", 1}, {"alpha", 2.0}, {"beta", 1.0}, {"eta", 0.0}, {"trials", 100},
                              {"level", 0.05}, {"seed", 1}}));
  const json& o = run.opt();
  const auto stat = get<std::string>(o, "stat");
  if (stat != "lsr" && stat != "glrt") throw ConfigError("unknown --stat '" + stat + "' (glrt or lsr)");
  if (!o.contains("input")) throw ConfigError("--input cloud (.csv) or volume is required");
  const auto path = get<std::string>(o, "input");
  run.input(path);
  const double eta = get<double>(o, "eta");
  const auto trials = get<std::size_t>(o, "trials");
  const double level = get<double>(o, "level");
  const auto seed = get<std::uint64_t>(o, "seed");

  if (fs::path(path).extension() == ".csv") {
    const auto cloud = read_cloud_csv(fs::path(path));
    const auto params = holder_of(o, cloud.d);
    if (params.d != cloud.d) throw ConfigError("detect: config d differs from the cloud dimension");
    auto cfg = DetectionConfig::resolve(params, cloud.size(), eta);
    json cal = json::object();
    if (stat == "lsr") {
      if (o.contains("tau")) {
        cfg.tau = get<double>(o, "tau");
      } else {
        run.seed("calibration", seed);
        cfg.tau = calibrate_lsr_tau(DetectionNetwork(cfg), trials, level, seed).value;
        cal = {{"trials", trials}, {"level", level}, {"seed", seed}};
      }
      const DetectionNetwork net(cfg);
      const auto s = lsr(net, cloud);
      auto d = decision_json("lsr", s.length, cfg.run_threshold(), decide_lsr(s, cfg), s.witness);
      d["tau"] = cfg.tau;
      d["calibration"] = cal;
      run.json_out("decision.json", d);
    } else {
      const DetectionNetwork net(cfg);
      double thr = 0.0;
      if (o.contains("threshold")) {
        thr = get<double>(o, "threshold");
      } else {
        run.seed("calibration", seed);
        thr = calibrate_glrt(net, trials, level, seed).value;
        cal = {{"trials", trials}, {"level", level}, {"seed", seed}};
      }
      const auto s = glrt_approx(net, cloud);
      auto d = decision_json("glrt", static_cast<double>(s.count), thr, decide_glrt(s, thr), s.path);
      d["calibration"] = cal;
      run.json_out("decision.json", d);
    }
    run.json_out("network.json", {{"cells", cfg.cells}, {"delta", cfg.delta}, {"n", cfg.n}, {"significance_count", cfg.significance_count()}});
  } else {
    if (stat == "glrt") throw ConfigError("detect: glrt applies to point clouds only");
    const auto vol = read_volume(fs::path(path));
    const auto params = holder_of(o, vol.dim());
    auto cfg = DetectionConfig::for_image(params, vol.size(), eta);
    cfg.tau = o.contains("tau") ? get<double>(o, "tau") : image_tau(cfg);
    const auto s = image_lsr(vol, cfg, cfg.tau);
    auto d = decision_json("lsr", s.length, cfg.run_threshold(), decide_lsr(s, cfg), s.witness);
    d["tau"] = cfg.tau;
    run.json_out("decision.json", d);
  }
  run.finish();
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON options file or a previous manifest.json");
  sub->add_option("--out", f.out, "output directory")->capture_default_str();
  sub->add_option("--seed", f.seed, "random seed");
  sub->add_option("--threads", f.threads, "worker cap (computation is single-threaded)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gcnet: good-continuation networks, beamlet statistics and detection"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Flags f;

  auto* synth = app.add_subcommand("synth", "generate a volume or point cloud from a scenario");
  add_common(synth, f);

  auto* transform = app.add_subcommand("transform", "beamlet coefficients of a volume");
  add_common(transform, f);
  transform->add_option("--input", f.input, "volume file");
  transform->add_option("--scale", f.scale, "beamlet scale j");

  auto* stats = app.add_subcommand("stats", "network and survival statistics of a volume");
  add_common(stats, f);
  stats->add_option("--input", f.input, "volume file");
  stats->add_option("--reference", f.reference, "reference volume for fsr (default: energy-matched noise)");
  stats->add_option("--stat", f.stat, "edges_vs_nodes | betweenness | fsi | fsr | lsi");
  stats->add_option("--scale", f.scale, "beamlet scale j");
  stats->add_option("--threshold-grid", f.grid, "quantile:N:lo:hi | linear:lo:hi:N | values:a,b,...");
  stats->add_option("--vertex-count", f.vertex_count, "network size for betweenness, fsi and fsr");
  stats->add_option("--eps", f.eps, "fsr regularizer");
  f.dag_opt = stats->add_flag("--dag,!--no-dag", f.dag, "keep forward beamlets only (default on)");

  auto* cover = app.add_subcommand("cover", "beam and beamlet chains covering a sinusoid curve");
  add_common(cover, f);
  cover->add_option("--scale", f.scale, "chain scale j (needs J in the config)");
  cover->add_option("--max-scale", f.max_scale, "largest grid exponent J when choosing the scale");

  auto* detect = app.add_subcommand("detect", "glrt or lsr detection on a point cloud or volume");
  add_common(detect, f);
  detect->add_option("--input", f.input, "cloud (.csv) or volume file");
  detect->add_option("--stat", f.stat, "glrt | lsr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*synth) cmd_synth(f);
    if (*transform) cmd_transform(f);
    if (*stats) cmd_stats(f);
    if (*cover) cmd_cover(f);
    if (*detect) cmd_detect(f);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const GuardError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return 3;
  } catch (const ClaimViolation& e) {
    std::cerr << "claim violation: " << e.what() << '\n';
    return 4;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
