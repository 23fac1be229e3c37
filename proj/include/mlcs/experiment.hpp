#pragma once

// Config-driven pipelines: simulate -> subsample -> reconstruct -> evaluate,
// plus sweeps over sampling rate and look count.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlcs/grid.hpp"
#include "mlcs/metrics.hpp"
#include "mlcs/mlrda.hpp"
#include "mlcs/radar_params.hpp"
#include "mlcs/sim.hpp"
#include "mlcs/solver.hpp"

namespace mlcs::experiment {

enum class SceneKind { points, rayleigh, empty };

struct SceneConfig {
  SceneKind kind = SceneKind::points;
  Shape shape{64, 64};
  std::vector<sim::CellTarget> points;
  std::optional<std::string> targets_file;  // off-grid targets, physical units
  std::optional<sim::RegionCells> region;   // speckle region; default is centred
  sim::RayleighOptions rayleigh;
  bool full_scale = false;                 // 150 x 150 grid, 24 x 24 region
};

struct SamplingConfig {
  double rate = 1.0;
  sim::SamplingPattern pattern = sim::SamplingPattern::sample_wise;
  std::optional<std::uint64_t> seed;  // defaults to the experiment seed
};

struct SolverSettings {
  std::optional<double> lambda;  // default 0.02 L
  bool lambda_relative = true;   // scale by lambda_max of the data
  std::optional<double> mu;
  std::size_t max_iterations = 500;
  double rel_change_tol = 1e-6;
  std::size_t look_count = 1;
  bool warm_start = false;
};

struct EvaluationConfig {
  std::optional<metrics::RegionSpec> enl_region;  // full-resolution cells
  bool baseline = true;                           // full-sample multilook RDA
  std::optional<double> export_pgm_db;            // write image.pgm with this dynamic range
};

struct SweepConfig {
  std::vector<double> rates;
  std::vector<std::size_t> looks;
  std::size_t repetitions = 0;
  std::size_t workers = 1;
};

struct ExperimentConfig {
  RadarSettings radar;
  rda::FilterOptions rda;
  SceneConfig scene;
  std::optional<double> snr_db;
  SamplingConfig sampling;
  SolverSettings solver;
  EvaluationConfig evaluation;
  std::optional<SweepConfig> sweep;
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  /// Throws ConfigError describing the first inconsistency.
  void validate() const;
  /// Canonical JSON text; stable across runs.
  std::string canonical_json() const;
  /// FNV-1a of canonical_json(), hex.
  std::string hash() const;
};

/// Parses JSON; unknown keys are errors.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Effective scene grid (full scale overrides the configured shape).
Shape scene_shape(const ExperimentConfig& config);
/// Effective speckle region in scene cells.
sim::RegionCells speckle_region(const ExperimentConfig& config);
/// ENL region in look-image pixels: look rows lying wholly inside the region
/// with a one-cell margin, range columns inset by one.
metrics::RegionSpec look_region(const metrics::RegionSpec& cells, std::size_t look_count);

struct RunManifest {
  std::string config_hash;
  std::string software_version;
  std::uint64_t seed = 0;
  std::string started_utc;
  std::string finished_utc;
  std::string output_dir;
  std::vector<std::string> files;  // relative to output_dir
  std::string noise_reference = "per-sample raw SNR over the echo support";
  std::size_t failed_runs = 0;

  void write(const std::string& path) const;
};

/// Metrics of one reconstruction, one CSV row.
struct RunMetrics {
  std::string run_id;
  double rate = 0.0;
  std::size_t looks = 1;
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  bool converged = false;
  double lambda = 0.0;
  double mu = 0.0;
  double objective = 0.0;
  std::optional<double> enl_mlcs;
  std::optional<double> enl_rda;
  std::optional<double> error_vs_rda_db;  // LookStack vs look_form of full data
  std::size_t peak_azimuth = 0;
  std::size_t peak_range = 0;
  double islr_db = metrics::kDbFloor;
};

void write_metrics_csv(const std::string& path, const RunMetrics& m);
RunMetrics read_metrics_csv(const std::string& path);

struct SimulationProducts {
  sim::Scene scene;
  ComplexGrid raw;
  sim::CompressedData data;
};

/// Scene, raw echo and compressed data for a config; no files written.
SimulationProducts simulate(const ExperimentConfig& config);

/// Writes raw.mlcs, truth.mlcs, data.mask.u64, data.values.cf32 and the manifest.
RunManifest run_simulate(const ExperimentConfig& config);

struct RunInputs {
  std::optional<sim::CompressedData> data;  // skip simulation when given
  std::optional<ComplexGrid> raw;           // full-rate data for the baseline
  std::string run_id = "single";
  std::size_t repetition = 0;
};

struct RunProducts {
  LookStack looks;
  MultilookImage image;
  solver::SolverTrace trace;
  rda::LookPlan plan;
  std::optional<MultilookImage> baseline_image;
  RunMetrics metrics;
};

/// In-memory pipeline (no files). Errors carry the failing stage as a prefix.
RunProducts evaluate(const ExperimentConfig& config, const RunInputs& inputs = {});

/// Full pipeline for one configuration, written to config.output_dir. On
/// failure every file written by the run is removed and the error rethrown.
RunManifest run_single(const ExperimentConfig& config, const RunInputs& inputs = {});

struct AggregateRow {
  double rate = 0.0;
  std::size_t looks = 1;
  std::size_t runs = 0;
  double enl_mlcs_mean = 0.0, enl_mlcs_std = 0.0;
  double enl_rda_mean = 0.0, enl_rda_std = 0.0;
  double error_vs_rda_db_mean = 0.0;
};

/// Groups per-run metrics by (rate, looks) in first-seen order; sample std.
std::vector<AggregateRow> aggregate(const std::vector<RunMetrics>& runs);
void write_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& rows);

/// Cartesian sweep with derived seeds. Per-run outputs go to runs/<id>/,
/// failures to failures.csv, and aggregate.csv is recomputed from the per-run
/// metrics files. `failed_runs` in the manifest counts failures.
RunManifest run_sweep(const ExperimentConfig& config);

enum class ExportFormat { binary, pgm };

/// Binary grid, or 8-bit graymap of 20 log10(|v| / peak) clipped at
/// -dynamic_range_db (0 = black, peak = white).
void export_image(const RealGrid& magnitude, const std::string& path, ExportFormat format,
                  double dynamic_range_db = 40.0);

}  // namespace mlcs::experiment
