#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mlcs/error.hpp"
#include "mlcs/experiment.hpp"

namespace mlcs::experiment {

using nlohmann::json;

namespace {

// Tracks which keys of one JSON object were consumed so leftovers can be
// reported as typos.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) const { return node_.contains(key) && !node_.at(key).is_null(); }

  template <typename T>
  std::optional<T> opt(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return std::nullopt;
    try {
      return node_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + " has the wrong type (" + node_.at(key).dump() + ")");
    }
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    auto v = opt<T>(key);
    return v ? *v : fallback;
  }

  std::optional<Section> child(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return std::nullopt;
    return Section(node_.at(key), join(key));
  }

  const json* raw(const std::string& key) {
    seen_.insert(key);
    return has(key) ? &node_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + join(key) + "'");
    }
  }

  std::string where(const std::string& key = {}) const { return "config key '" + join(key) + "'"; }

 private:
  std::string join(const std::string& key) const {
    if (key.empty()) return path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::size_t as_index(Section& s, const std::string& key, std::size_t fallback) {
  const auto v = s.opt<long long>(key);
  if (!v) return fallback;
  if (*v < 0) throw ConfigError(s.where(key) + " must be nonnegative");
  return static_cast<std::size_t>(*v);
}

cplx parse_amplitude(const json& node, const std::string& where) {
  if (node.is_number()) return {node.get<double>(), 0.0};
  if (node.is_array() && node.size() == 2 && node[0].is_number() && node[1].is_number()) {
    return {node[0].get<double>(), node[1].get<double>()};
  }
  throw ConfigError(where + " must be a number or [re, im]");
}

template <typename Region>
Region parse_region(Section s) {
  Region r;
  r.az_begin = as_index(s, "az_begin", 0);
  r.az_end = as_index(s, "az_end", 0);
  r.rg_begin = as_index(s, "rg_begin", 0);
  r.rg_end = as_index(s, "rg_end", 0);
  s.finish();
  return r;
}

template <typename Region>
json region_json(const Region& r) {
  return json{{"az_begin", r.az_begin}, {"az_end", r.az_end}, {"rg_begin", r.rg_begin}, {"rg_end", r.rg_end}};
}

SceneKind parse_kind(const std::string& name) {
  if (name == "points") return SceneKind::points;
  if (name == "rayleigh") return SceneKind::rayleigh;
  if (name == "empty") return SceneKind::empty;
  throw ConfigError("unknown scene kind '" + name + "' (expected points, rayleigh or empty)");
}

std::string kind_name(SceneKind k) {
  switch (k) {
    case SceneKind::points: return "points";
    case SceneKind::rayleigh: return "rayleigh";
    case SceneKind::empty: return "empty";
  }
  return "points";
}

void parse_radar(Section s, RadarSettings& r) {
  r.carrier_freq_hz = s.get("carrier_freq_hz", r.carrier_freq_hz);
  r.slant_range_m = s.get("slant_range_m", r.slant_range_m);
  r.platform_velocity_mps = s.get("platform_velocity_mps", r.platform_velocity_mps);
  r.range_bandwidth_hz = s.get("range_bandwidth_hz", r.range_bandwidth_hz);
  r.pulse_duration_s = s.get("pulse_duration_s", r.pulse_duration_s);
  r.range_fm_rate_hzps = s.opt<double>("range_fm_rate_hzps");
  r.prf_hz = s.opt<double>("prf_hz");
  r.range_sample_rate_hz = s.opt<double>("range_sample_rate_hz");
  r.range_oversampling = s.get("range_oversampling", r.range_oversampling);
  r.azimuth_oversampling = s.get("azimuth_oversampling", r.azimuth_oversampling);
  r.synthetic_aperture_time_s = s.get("synthetic_aperture_time_s", r.synthetic_aperture_time_s);
  r.light_speed_mps = s.get("light_speed_mps", r.light_speed_mps);
  if (auto w = s.opt<std::string>("azimuth_window")) r.azimuth_window = parse_window(*w);
  if (auto w = s.opt<std::string>("range_window")) r.range_window = parse_window(*w);
  s.finish();
}

void parse_scene(Section s, SceneConfig& sc) {
  if (auto k = s.opt<std::string>("kind")) sc.kind = parse_kind(*k);
  sc.shape.n_azimuth = as_index(s, "n_azimuth", sc.shape.n_azimuth);
  sc.shape.n_range = as_index(s, "n_range", sc.shape.n_range);
  sc.full_scale = s.get("full_scale", sc.full_scale);
  sc.targets_file = s.opt<std::string>("targets_file");
  if (const json* pts = s.raw("points")) {
    if (!pts->is_array()) throw ConfigError(s.where("points") + " must be an array");
    for (std::size_t j = 0; j < pts->size(); ++j) {
      Section p((*pts)[j], "scene.points[" + std::to_string(j) + "]");
      sim::CellTarget t;
      t.azimuth = as_index(p, "azimuth", 0);
      t.range = as_index(p, "range", 0);
      const json* amp = p.raw("amplitude");
      t.amplitude = amp ? parse_amplitude(*amp, p.where("amplitude")) : cplx(1.0, 0.0);
      p.finish();
      sc.points.push_back(t);
    }
  }
  if (auto r = s.child("region")) sc.region = parse_region<sim::RegionCells>(*r);
  sc.rayleigh.exact_scatterers = s.get("exact_scatterers", sc.rayleigh.exact_scatterers);
  sc.rayleigh.scatterers_per_cell = as_index(s, "scatterers_per_cell", sc.rayleigh.scatterers_per_cell);
  s.finish();
}

template <typename T>
std::vector<T> parse_list(Section& s, const std::string& key) {
  const json* node = s.raw(key);
  if (!node) return {};
  if (!node->is_array()) throw ConfigError(s.where(key) + " must be a list");
  std::vector<T> out;
  try {
    for (const auto& v : *node) {
      if constexpr (std::is_same_v<T, std::size_t>) {
        const auto x = v.get<long long>();
        if (x < 0) throw ConfigError(s.where(key) + " entries must be nonnegative");
        out.push_back(static_cast<std::size_t>(x));
      } else {
        out.push_back(v.get<T>());
      }
    }
  } catch (const json::exception&) {
    throw ConfigError(s.where(key) + " has an entry of the wrong type");
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  ExperimentConfig c;
  Section s(root, "");
  c.seed = s.get<std::uint64_t>("seed", c.seed);
  c.output_dir = s.get<std::string>("output_dir", c.output_dir);
  c.snr_db = s.opt<double>("noise_snr_db");
  if (auto r = s.child("radar")) parse_radar(*r, c.radar);
  if (auto r = s.child("rda")) {
    c.rda.range_migration = r->get("range_migration", c.rda.range_migration);
    if (auto inv = r->opt<std::string>("migration_inverse")) {
      if (*inv == "exact_transpose") {
        c.rda.inverse = rda::MigrationInverse::exact_transpose;
      } else if (*inv == "reverse_interpolation") {
        c.rda.inverse = rda::MigrationInverse::reverse_interpolation;
      } else {
        throw ConfigError("unknown migration_inverse '" + *inv +
                          "' (expected exact_transpose or reverse_interpolation)");
      }
    }
    r->finish();
  }
  if (auto sc = s.child("scene")) parse_scene(*sc, c.scene);
  if (auto sm = s.child("sampling")) {
    c.sampling.rate = sm->get("rate", c.sampling.rate);
    if (auto p = sm->opt<std::string>("pattern")) c.sampling.pattern = sim::parse_sampling_pattern(*p);
    c.sampling.seed = sm->opt<std::uint64_t>("seed");
    sm->finish();
  }
  if (auto so = s.child("solver")) {
    c.solver.lambda = so->opt<double>("lambda");
    if (auto mode = so->opt<std::string>("lambda_mode")) {
      if (*mode != "relative" && *mode != "absolute") {
        throw ConfigError("lambda_mode must be relative or absolute, got '" + *mode + "'");
      }
      c.solver.lambda_relative = *mode == "relative";
    }
    c.solver.mu = so->opt<double>("mu");
    c.solver.max_iterations = as_index(*so, "max_iterations", c.solver.max_iterations);
    c.solver.rel_change_tol = so->get("rel_change_tol", c.solver.rel_change_tol);
    c.solver.look_count = as_index(*so, "looks", c.solver.look_count);
    c.solver.warm_start = so->get("warm_start", c.solver.warm_start);
    so->finish();
  }
  if (auto ev = s.child("evaluation")) {
    if (auto r = ev->child("enl_region")) c.evaluation.enl_region = parse_region<metrics::RegionSpec>(*r);
    c.evaluation.baseline = ev->get("baseline", c.evaluation.baseline);
    c.evaluation.export_pgm_db = ev->opt<double>("export_pgm_db");
    ev->finish();
  }
  if (auto sw = s.child("sweep")) {
    SweepConfig sweep;
    sweep.rates = parse_list<double>(*sw, "rates");
    sweep.looks = parse_list<std::size_t>(*sw, "looks");
    sweep.repetitions = as_index(*sw, "repetitions", 0);
    sweep.workers = as_index(*sw, "workers", 1);
    sw->finish();
    c.sweep = sweep;
  }
  s.finish();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path);
}

Shape scene_shape(const ExperimentConfig& config) {
  return config.scene.full_scale ? Shape{150, 150} : config.scene.shape;
}

sim::RegionCells speckle_region(const ExperimentConfig& config) {
  if (config.scene.region) return *config.scene.region;
  const Shape s = scene_shape(config);
  const std::size_t side = config.scene.full_scale ? 24 : 12;
  const std::size_t az0 = s.n_azimuth / 2 >= side / 2 ? s.n_azimuth / 2 - side / 2 : 0;
  const std::size_t rg0 = s.n_range / 2 >= side / 2 ? s.n_range / 2 - side / 2 : 0;
  return {az0, std::min(az0 + side, s.n_azimuth), rg0, std::min(rg0 + side, s.n_range)};
}

metrics::RegionSpec look_region(const metrics::RegionSpec& cells, std::size_t look_count) {
  const std::size_t l = look_count;
  metrics::RegionSpec r;
  r.az_begin = (cells.az_begin + 1 + l - 1) / l;
  const long last = (static_cast<long>(cells.az_end) - 1 - static_cast<long>(l)) / static_cast<long>(l);
  r.az_end = last < static_cast<long>(r.az_begin) ? r.az_begin : static_cast<std::size_t>(last + 1);
  r.rg_begin = cells.rg_begin + 1;
  r.rg_end = cells.rg_end > r.rg_begin + 1 ? cells.rg_end - 1 : r.rg_begin;
  return r;
}

namespace {

void check_looks(std::size_t looks, const Shape& shape, const std::string& what) {
  if (looks < 1) throw ConfigError(what + " must be >= 1");
  if (shape.n_azimuth % looks != 0) {
    throw ConfigError(what + " = " + std::to_string(looks) + " does not divide the azimuth length " +
                      std::to_string(shape.n_azimuth));
  }
}

void check_rate(double rate, const std::string& what) {
  if (!(rate > 0.0 && rate <= 1.0)) throw ConfigError(what + " must lie in (0, 1]");
}

}  // namespace

void ExperimentConfig::validate() const {
  const RadarParams params(radar);
  const Shape shape = scene_shape(*this);
  if (shape.n_azimuth == 0 || shape.n_range == 0) throw ConfigError("scene grid must be nonempty");
  for (const auto& p : scene.points) {
    if (p.azimuth >= shape.n_azimuth || p.range >= shape.n_range) {
      throw ConfigError("point target (" + std::to_string(p.azimuth) + ", " + std::to_string(p.range) +
                        ") lies outside the " + to_string(shape) + " scene");
    }
  }
  if (scene.kind == SceneKind::points && scene.points.empty() && !scene.targets_file) {
    throw ConfigError("points scene needs scene.points or scene.targets_file");
  }
  if (scene.kind == SceneKind::rayleigh) {
    const auto r = speckle_region(*this);
    if (r.az_begin >= r.az_end || r.rg_begin >= r.rg_end || r.az_end > shape.n_azimuth ||
        r.rg_end > shape.n_range) {
      throw ConfigError("scene.region is empty or outside the scene");
    }
    if (scene.rayleigh.exact_scatterers && scene.rayleigh.scatterers_per_cell == 0) {
      throw ConfigError("scene.scatterers_per_cell must be >= 1");
    }
  }
  if (snr_db && !std::isfinite(*snr_db)) throw ConfigError("noise_snr_db must be finite");
  check_rate(sampling.rate, "sampling.rate");
  if (solver.lambda && !(*solver.lambda >= 0.0 && std::isfinite(*solver.lambda))) {
    throw ConfigError("solver.lambda must be finite and >= 0");
  }
  if (solver.mu && !(*solver.mu > 0.0 && std::isfinite(*solver.mu))) {
    throw ConfigError("solver.mu must be finite and > 0");
  }
  if (solver.max_iterations < 1) throw ConfigError("solver.max_iterations must be >= 1");
  if (!(solver.rel_change_tol >= 0.0)) throw ConfigError("solver.rel_change_tol must be >= 0");
  check_looks(solver.look_count, shape, "solver.looks");
  if (evaluation.enl_region) evaluation.enl_region->validate(shape);
  if (evaluation.export_pgm_db && !(*evaluation.export_pgm_db > 0.0)) {
    throw ConfigError("evaluation.export_pgm_db must be > 0");
  }
  if (sweep) {
    if (sweep->rates.empty()) throw ConfigError("sweep.rates must be a nonempty list");
    if (sweep->looks.empty()) throw ConfigError("sweep.looks must be a nonempty list");
    if (sweep->repetitions < 1) throw ConfigError("sweep.repetitions must be >= 1");
    if (sweep->workers < 1) throw ConfigError("sweep.workers must be >= 1");
    for (double r : sweep->rates) check_rate(r, "sweep.rates entry");
    for (std::size_t l : sweep->looks) check_looks(l, shape, "sweep.looks entry");
  }
  rda::build_filters(params, shape, rda);
}

std::string ExperimentConfig::canonical_json() const {
  json j;
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["noise_snr_db"] = snr_db ? json(*snr_db) : json(nullptr);

  json r;
  r["carrier_freq_hz"] = radar.carrier_freq_hz;
  r["slant_range_m"] = radar.slant_range_m;
  r["platform_velocity_mps"] = radar.platform_velocity_mps;
  r["range_bandwidth_hz"] = radar.range_bandwidth_hz;
  r["pulse_duration_s"] = radar.pulse_duration_s;
  r["range_fm_rate_hzps"] = radar.range_fm_rate_hzps ? json(*radar.range_fm_rate_hzps) : json(nullptr);
  r["prf_hz"] = radar.prf_hz ? json(*radar.prf_hz) : json(nullptr);
  r["range_sample_rate_hz"] =
      radar.range_sample_rate_hz ? json(*radar.range_sample_rate_hz) : json(nullptr);
  r["range_oversampling"] = radar.range_oversampling;
  r["azimuth_oversampling"] = radar.azimuth_oversampling;
  r["synthetic_aperture_time_s"] = radar.synthetic_aperture_time_s;
  r["light_speed_mps"] = radar.light_speed_mps;
  r["azimuth_window"] = to_string(radar.azimuth_window);
  r["range_window"] = to_string(radar.range_window);
  j["radar"] = r;

  j["rda"] = {{"range_migration", rda.range_migration},
              {"migration_inverse", rda.inverse == rda::MigrationInverse::exact_transpose
                                        ? "exact_transpose"
                                        : "reverse_interpolation"}};

  json sc;
  sc["kind"] = kind_name(scene.kind);
  sc["n_azimuth"] = scene.shape.n_azimuth;
  sc["n_range"] = scene.shape.n_range;
  sc["full_scale"] = scene.full_scale;
  sc["targets_file"] = scene.targets_file ? json(*scene.targets_file) : json(nullptr);
  json pts = json::array();
  for (const auto& p : scene.points) {
    pts.push_back({{"azimuth", p.azimuth},
                   {"range", p.range},
                   {"amplitude", {p.amplitude.real(), p.amplitude.imag()}}});
  }
  sc["points"] = pts;
  sc["region"] = scene.region ? region_json(*scene.region) : json(nullptr);
  sc["exact_scatterers"] = scene.rayleigh.exact_scatterers;
  sc["scatterers_per_cell"] = scene.rayleigh.scatterers_per_cell;
  j["scene"] = sc;

  j["sampling"] = {{"rate", sampling.rate},
                   {"pattern", sim::to_string(sampling.pattern)},
                   {"seed", sampling.seed ? json(*sampling.seed) : json(nullptr)}};

  json so;
  so["lambda"] = solver.lambda ? json(*solver.lambda) : json(nullptr);
  so["lambda_mode"] = solver.lambda_relative ? "relative" : "absolute";
  so["mu"] = solver.mu ? json(*solver.mu) : json(nullptr);
  so["max_iterations"] = solver.max_iterations;
  so["rel_change_tol"] = solver.rel_change_tol;
  so["looks"] = solver.look_count;
  so["warm_start"] = solver.warm_start;
  j["solver"] = so;

  json ev;
  ev["enl_region"] = evaluation.enl_region ? region_json(*evaluation.enl_region) : json(nullptr);
  ev["baseline"] = evaluation.baseline;
  ev["export_pgm_db"] = evaluation.export_pgm_db ? json(*evaluation.export_pgm_db) : json(nullptr);
  j["evaluation"] = ev;

  if (sweep) {
    j["sweep"] = {{"rates", sweep->rates},
                  {"looks", sweep->looks},
                  {"repetitions", sweep->repetitions},
                  {"workers", sweep->workers}};
  } else {
    j["sweep"] = nullptr;
  }
  return j.dump(2);
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_json()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mlcs::experiment
