#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mlcs/error.hpp"
#include "mlcs/experiment.hpp"
#include "mlcs/grid_io.hpp"

#ifndef MLCS_VERSION
#define MLCS_VERSION "0.0.0"
#endif

namespace mlcs::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Rethrows with the stage name prefixed, keeping the error category.
template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  const std::string p = std::string(name) + ": ";
  try {
    return f();
  } catch (const solver::DivergenceError& e) {
    throw solver::DivergenceError(p + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(p + e.what());
  } catch (const IoError& e) {
    throw IoError(p + e.what());
  } catch (const ShapeError& e) {
    throw ShapeError(p + e.what());
  } catch (const std::exception& e) {
    throw Error(p + e.what());
  }
}

// Records every file a run writes so a failed run can be rolled back.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  fs::path add(const std::string& name) {
    files_.push_back(name);
    return dir_ / name;
  }
  const std::vector<std::string>& files() const { return files_; }
  void remove_all() const {
    std::error_code ec;
    for (const auto& f : files_) fs::remove(dir_ / f, ec);
  }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("metrics field " + what + " is not a number: '" + s + "'");
  }
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("metrics field " + what + " is not an integer: '" + s + "'");
  }
}

const char* kMetricsHeader =
    "run_id,rate,looks,repetition,seed,iterations,converged,lambda,mu,objective,enl_mlcs,enl_rda,"
    "error_vs_rda_db,peak_azimuth,peak_range,islr_db";

std::optional<metrics::RegionSpec> enl_cells(const ExperimentConfig& config) {
  if (config.evaluation.enl_region) return config.evaluation.enl_region;
  if (config.scene.kind != SceneKind::rayleigh) return std::nullopt;
  const auto r = speckle_region(config);
  return metrics::RegionSpec{r.az_begin, r.az_end, r.rg_begin, r.rg_end};
}

}  // namespace

void RunManifest::write(const std::string& path) const {
  json j;
  j["config_hash"] = config_hash;
  j["software_version"] = software_version;
  j["seed"] = seed;
  j["started_utc"] = started_utc;
  j["finished_utc"] = finished_utc;
  j["output_dir"] = output_dir;
  j["files"] = files;
  j["noise_reference"] = noise_reference;
  j["failed_runs"] = failed_runs;
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << j.dump(2) << '\n';
  if (!os) throw IoError("failed writing manifest");
}

void write_metrics_csv(const std::string& path, const RunMetrics& m) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << kMetricsHeader << '\n';
  os << m.run_id << ',' << fmt(m.rate) << ',' << m.looks << ',' << m.repetition << ',' << m.seed << ','
     << m.iterations << ',' << (m.converged ? 1 : 0) << ',' << fmt(m.lambda) << ',' << fmt(m.mu) << ','
     << fmt(m.objective) << ',' << fmt(m.enl_mlcs) << ',' << fmt(m.enl_rda) << ','
     << fmt(m.error_vs_rda_db) << ',' << m.peak_azimuth << ',' << m.peak_range << ',' << fmt(m.islr_db)
     << '\n';
  if (!os) throw IoError("failed writing metrics");
}

RunMetrics read_metrics_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open metrics file '" + path + "'");
  std::string header, row;
  if (!std::getline(is, header) || !std::getline(is, row)) throw IoError("metrics file '" + path + "' is truncated");
  const auto names = split_csv(header);
  const auto values = split_csv(row);
  if (names.size() != values.size()) throw IoError("metrics file '" + path + "' has ragged rows");
  std::map<std::string, std::string> f;
  for (std::size_t j = 0; j < names.size(); ++j) f[names[j]] = values[j];
  auto need = [&](const char* key) -> const std::string& {
    auto it = f.find(key);
    if (it == f.end()) throw IoError("metrics file '" + path + "' lacks column " + key);
    return it->second;
  };
  auto optional_num = [&](const char* key) -> std::optional<double> {
    const auto& s = need(key);
    if (s.empty()) return std::nullopt;
    return parse_double(s, key);
  };
  RunMetrics m;
  m.run_id = need("run_id");
  m.rate = parse_double(need("rate"), "rate");
  m.looks = parse_u64(need("looks"), "looks");
  m.repetition = parse_u64(need("repetition"), "repetition");
  m.seed = parse_u64(need("seed"), "seed");
  m.iterations = parse_u64(need("iterations"), "iterations");
  m.converged = need("converged") == "1";
  m.lambda = parse_double(need("lambda"), "lambda");
  m.mu = parse_double(need("mu"), "mu");
  m.objective = parse_double(need("objective"), "objective");
  m.enl_mlcs = optional_num("enl_mlcs");
  m.enl_rda = optional_num("enl_rda");
  m.error_vs_rda_db = optional_num("error_vs_rda_db");
  m.peak_azimuth = parse_u64(need("peak_azimuth"), "peak_azimuth");
  m.peak_range = parse_u64(need("peak_range"), "peak_range");
  m.islr_db = parse_double(need("islr_db"), "islr_db");
  return m;
}

SimulationProducts simulate(const ExperimentConfig& config) {
  const RadarParams params(config.radar);
  const Shape shape = scene_shape(config);
  const Seed seed{config.seed};
  SimulationProducts out;
  switch (config.scene.kind) {
    case SceneKind::points:
      out.scene = sim::point_scene(params, shape, config.scene.points);
      if (config.scene.targets_file) out.scene.targets = sim::read_target_list(*config.scene.targets_file);
      break;
    case SceneKind::rayleigh:
      out.scene = sim::rayleigh_scene(params, shape, speckle_region(config), seed, config.scene.rayleigh);
      break;
    case SceneKind::empty:
      out.scene = sim::empty_scene(params, shape);
      break;
  }
  out.raw = sim::simulate_raw(out.scene, params, seed, config.snr_db);
  const Seed mask_seed{config.sampling.seed.value_or(config.seed)};
  const auto mask = sim::generate_mask(shape, config.sampling.rate, mask_seed, config.sampling.pattern);
  out.data = sim::subsample(out.raw, mask);
  return out;
}

RunManifest run_simulate(const ExperimentConfig& config) {
  RunManifest manifest;
  manifest.started_utc = utc_now();
  stage("config", [&] { config.validate(); });
  const auto products = stage("simulate", [&] { return simulate(config); });

  const fs::path dir(config.output_dir);
  OutputSet out(dir);
  try {
    stage("write", [&] {
      fs::create_directories(dir);
      io::save_grid(out.add("raw.mlcs").string(), products.raw);
      io::save_grid(out.add("truth.mlcs").string(), products.scene.reflectivity);
      if (!products.scene.targets.empty()) {
        sim::write_target_list(out.add("targets.txt").string(), products.scene.targets);
      }
      out.add("data.mask.u64");
      out.add("data.values.cf32");
      sim::save_compressed(products.data, (dir / "data").string());
      manifest.config_hash = config.hash();
      manifest.software_version = MLCS_VERSION;
      manifest.seed = config.seed;
      manifest.output_dir = config.output_dir;
      manifest.files = out.files();
      manifest.finished_utc = utc_now();
      out.add("manifest.json");
      manifest.write((dir / "manifest.json").string());
    });
  } catch (...) {
    out.remove_all();
    throw;
  }
  return manifest;
}

RunProducts evaluate(const ExperimentConfig& config, const RunInputs& inputs) {
  stage("config", [&] { config.validate(); });
  const RadarParams params(config.radar);
  const Shape shape = scene_shape(config);
  const std::size_t looks = config.solver.look_count;

  sim::CompressedData data;
  std::optional<ComplexGrid> raw = inputs.raw;
  if (inputs.data) {
    data = *inputs.data;
  } else {
    auto products = stage("simulate", [&] { return simulate(config); });
    data = std::move(products.data);
    raw = std::move(products.raw);
  }
  if (!(data.full_shape == shape)) {
    throw ShapeError("input data grid " + to_string(data.full_shape) + " does not match the configured " +
                     to_string(shape));
  }

  const auto filters = stage("filters", [&] { return rda::build_filters(params, shape, config.rda); });
  RunProducts out;
  out.plan = stage("filters", [&] { return rda::make_look_plan(shape.n_azimuth, looks); });

  solver::SolverConfig sc;
  sc.look_count = looks;
  sc.mu = config.solver.mu;
  sc.max_iterations = config.solver.max_iterations;
  sc.rel_change_tol = config.solver.rel_change_tol;
  sc.seed = Seed{config.seed};
  sc.warm_start = config.solver.warm_start;
  const double base_lambda = config.solver.lambda.value_or(0.02 * static_cast<double>(looks));
  sc.lambda = config.solver.lambda_relative
                  ? base_lambda * stage("reconstruct", [&] { return solver::lambda_max(data, filters, out.plan); })
                  : base_lambda;

  auto rec = stage("reconstruct", [&] { return solver::reconstruct(data, filters, out.plan, sc); });
  out.looks = std::move(rec.looks);
  out.trace = std::move(rec.trace);

  stage("metrics", [&] {
    out.image = solver::multilook_sum(out.looks);
    RunMetrics& m = out.metrics;
    m.run_id = inputs.run_id;
    m.rate = data.mask.rate;
    m.looks = looks;
    m.repetition = inputs.repetition;
    m.seed = config.seed;
    m.iterations = out.trace.iterations();
    m.converged = out.trace.converged;
    m.lambda = sc.lambda;
    m.mu = out.trace.mu;
    m.objective = out.trace.rows.back().objective;

    const bool nonzero = std::any_of(out.image.values().begin(), out.image.values().end(),
                                     [](double v) { return v != 0.0; });
    if (nonzero) {
      const auto peak = metrics::peak_report(out.image);
      m.peak_azimuth = peak.azimuth;
      m.peak_range = peak.range;
      m.islr_db = peak.islr_db;
    }

    std::optional<LookStack> base_looks;
    if (config.evaluation.baseline && raw) {
      base_looks = rda::look_form(*raw, filters, out.plan);
      out.baseline_image = solver::multilook_sum(*base_looks);
      if (squared_norm(*base_looks) > 0.0) m.error_vs_rda_db = metrics::relative_error_db(out.looks, *base_looks);
    }
    if (const auto cells = enl_cells(config)) {
      const auto region = look_region(*cells, looks);
      m.enl_mlcs = metrics::enl(out.image, region);
      if (out.baseline_image) m.enl_rda = metrics::enl(*out.baseline_image, region);
    }
  });
  return out;
}

RunManifest run_single(const ExperimentConfig& config, const RunInputs& inputs) {
  RunManifest manifest;
  manifest.started_utc = utc_now();
  const RunProducts products = evaluate(config, inputs);

  const fs::path dir(config.output_dir);
  OutputSet out(dir);
  try {
    stage("write", [&] {
      fs::create_directories(dir);
      json looks_meta;
      looks_meta["look_count"] = products.plan.look_count;
      looks_meta["look_shape"] = {products.looks.look_shape().n_azimuth, products.looks.look_shape().n_range};
      looks_meta["bands"] = products.plan.bands;
      looks_meta["params_digest"] = hex64(RadarParams(config.radar).digest());
      std::vector<std::string> look_files;
      for (std::size_t i = 0; i < products.looks.look_count(); ++i) {
        const std::string name = "look_" + std::to_string(i) + ".mlcs";
        io::save_grid(out.add(name).string(), products.looks[i]);
        look_files.push_back(name);
      }
      looks_meta["files"] = look_files;
      {
        std::ofstream os(out.add("looks.json"), std::ios::trunc);
        os << looks_meta.dump(2) << '\n';
        if (!os) throw IoError("failed writing looks.json");
      }
      io::save_grid(out.add("image.mlcs").string(), products.image);
      if (products.baseline_image) io::save_grid(out.add("baseline_image.mlcs").string(), *products.baseline_image);
      if (config.evaluation.export_pgm_db) {
        export_image(products.image, out.add("image.pgm").string(), ExportFormat::pgm,
                     *config.evaluation.export_pgm_db);
      }
      {
        std::ofstream os(out.add("trace.csv"), std::ios::trunc);
        solver::write_trace_csv(os, products.trace);
        if (!os) throw IoError("failed writing trace.csv");
      }
      write_metrics_csv(out.add("metrics.csv").string(), products.metrics);

      manifest.config_hash = config.hash();
      manifest.software_version = MLCS_VERSION;
      manifest.seed = config.seed;
      manifest.output_dir = config.output_dir;
      manifest.files = out.files();
      manifest.finished_utc = utc_now();
      out.add("manifest.json");
      manifest.write((dir / "manifest.json").string());
    });
  } catch (...) {
    out.remove_all();
    throw;
  }
  return manifest;
}

std::vector<AggregateRow> aggregate(const std::vector<RunMetrics>& runs) {
  struct Acc {
    AggregateRow row;
    std::vector<double> enl_mlcs, enl_rda, err;
  };
  std::vector<Acc> groups;
  for (const auto& m : runs) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const Acc& a) { return a.row.rate == m.rate && a.row.looks == m.looks; });
    if (it == groups.end()) {
      groups.push_back({});
      it = std::prev(groups.end());
      it->row.rate = m.rate;
      it->row.looks = m.looks;
    }
    ++it->row.runs;
    if (m.enl_mlcs) it->enl_mlcs.push_back(*m.enl_mlcs);
    if (m.enl_rda) it->enl_rda.push_back(*m.enl_rda);
    if (m.error_vs_rda_db) it->err.push_back(*m.error_vs_rda_db);
  }
  auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = 0.0;
    sd = 0.0;
    if (v.empty()) return;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) return;
    for (double x : v) sd += (x - mean) * (x - mean);
    sd = std::sqrt(sd / static_cast<double>(v.size() - 1));
  };
  std::vector<AggregateRow> rows;
  for (auto& g : groups) {
    double unused = 0.0;
    stats(g.enl_mlcs, g.row.enl_mlcs_mean, g.row.enl_mlcs_std);
    stats(g.enl_rda, g.row.enl_rda_mean, g.row.enl_rda_std);
    stats(g.err, g.row.error_vs_rda_db_mean, unused);
    rows.push_back(g.row);
  }
  return rows;
}

void write_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "rate,looks,runs,enl_mlcs_mean,enl_mlcs_std,enl_rda_mean,enl_rda_std,error_vs_rda_db_mean\n";
  for (const auto& r : rows) {
    os << fmt(r.rate) << ',' << r.looks << ',' << r.runs << ',' << fmt(r.enl_mlcs_mean) << ','
       << fmt(r.enl_mlcs_std) << ',' << fmt(r.enl_rda_mean) << ',' << fmt(r.enl_rda_std) << ','
       << fmt(r.error_vs_rda_db_mean) << '\n';
  }
  if (!os) throw IoError("failed writing aggregate");
}

RunManifest run_sweep(const ExperimentConfig& config) {
  RunManifest manifest;
  manifest.started_utc = utc_now();
  if (!config.sweep) throw ConfigError("config has no sweep block");
  stage("config", [&] { config.validate(); });
  const SweepConfig& sw = *config.sweep;

  struct Job {
    std::string id;
    ExperimentConfig config;
    std::size_t repetition = 0;
    std::string error;
    bool ok = false;
  };
  const fs::path dir(config.output_dir);
  std::vector<Job> jobs;
  for (std::size_t ri = 0; ri < sw.rates.size(); ++ri) {
    for (std::size_t li = 0; li < sw.looks.size(); ++li) {
      for (std::size_t rep = 0; rep < sw.repetitions; ++rep) {
        Job job;
        char id[64];
        std::snprintf(id, sizeof id, "r%zu_l%zu_n%03zu", ri, li, rep);
        job.id = id;
        job.repetition = rep;
        job.config = config;
        job.config.sweep.reset();
        job.config.sampling.rate = sw.rates[ri];
        job.config.sampling.seed.reset();
        job.config.solver.look_count = sw.looks[li];
        job.config.seed = derive_seed(Seed{config.seed}, {ri, li, rep}).value;
        job.config.output_dir = (dir / "runs" / job.id).string();
        jobs.push_back(std::move(job));
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      Job& job = jobs[j];
      try {
        RunInputs in;
        in.run_id = job.id;
        in.repetition = job.repetition;
        run_single(job.config, in);
        job.ok = true;
      } catch (const std::exception& e) {
        job.error = e.what();
      }
    }
  };
  const std::size_t n_workers = std::min(sw.workers, jobs.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<RunMetrics> runs;
  for (auto& job : jobs) {
    if (!job.ok) {
      ++manifest.failed_runs;
      continue;
    }
    const fs::path run_dir = fs::path("runs") / job.id;
    std::ifstream ms(dir / run_dir / "manifest.json");
    const json run_manifest = json::parse(ms);
    for (const auto& f : run_manifest.at("files")) manifest.files.push_back((run_dir / f.get<std::string>()).string());
    manifest.files.push_back((run_dir / "manifest.json").string());
    runs.push_back(read_metrics_csv((dir / "runs" / job.id / "metrics.csv").string()));
  }
  fs::create_directories(dir);
  write_aggregate_csv((dir / "aggregate.csv").string(), aggregate(runs));
  manifest.files.push_back("aggregate.csv");
  if (manifest.failed_runs > 0) {
    std::ofstream os(dir / "failures.csv", std::ios::trunc);
    os << "run_id,error\n";
    for (const auto& job : jobs) {
      if (job.ok) continue;
      std::string msg = job.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      os << job.id << ',' << msg << '\n';
    }
    manifest.files.push_back("failures.csv");
  } else {
    fs::remove(dir / "failures.csv");
  }
  manifest.config_hash = config.hash();
  manifest.software_version = MLCS_VERSION;
  manifest.seed = config.seed;
  manifest.output_dir = config.output_dir;
  manifest.finished_utc = utc_now();
  manifest.write((dir / "manifest.json").string());
  return manifest;
}

void export_image(const RealGrid& magnitude, const std::string& path, ExportFormat format,
                  double dynamic_range_db) {
  if (format == ExportFormat::binary) {
    io::save_grid(path, magnitude);
    return;
  }
  if (!(dynamic_range_db > 0.0)) throw ConfigError("dynamic range must be > 0 dB");
  if (!all_finite(std::vector<cplx>(magnitude.values().begin(), magnitude.values().end()))) {
    throw ConfigError("image contains non-finite values");
  }
  double peak = 0.0;
  for (double v : magnitude.values()) peak = std::max(peak, std::abs(v));
  std::vector<unsigned char> pixels(magnitude.size(), 0);
  if (peak > 0.0) {
    for (std::size_t j = 0; j < pixels.size(); ++j) {
      const double v = std::abs(magnitude[j]);
      if (v == 0.0) continue;
      const double db = 20.0 * std::log10(v / peak);
      const double level = std::clamp((db + dynamic_range_db) / dynamic_range_db, 0.0, 1.0);
      pixels[j] = static_cast<unsigned char>(std::lround(255.0 * level));
    }
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "P5\n" << magnitude.n_range() << ' ' << magnitude.n_azimuth() << "\n255\n";
  os.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!os) throw IoError("failed writing graymap");
}

}  // namespace mlcs::experiment
