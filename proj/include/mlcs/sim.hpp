#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlcs/dense.hpp"
#include "mlcs/grid.hpp"
#include "mlcs/kernels.hpp"
#include "mlcs/radar_params.hpp"
#include "mlcs/random.hpp"

namespace mlcs::sim {

/// Point-target response h(eta, tau) for a scatterer whose closest approach
/// is at `closest_range_m`, azimuth time `eta` relative to closest approach and
/// absolute fast time `tau`. Zero outside the envelope supports.
cplx impulse_response(const RadarParams& params, double eta, double tau, double closest_range_m);

/// h(eta, tau) at the reference slant range R0.
cplx impulse_response(const RadarParams& params, double eta, double tau);

/// Maps grid cells to physical positions. Cell (i, k) sits at azimuth position
/// v * eta_i (zero at the centre pulse) and slant range R0 + (k - n_rg/2) * dr.
SampleLattice make_lattice(const RadarParams& params, Shape shape);

/// Off-grid target in scene coordinates.
struct Target {
  double azimuth_m = 0.0;  // along-track position, 0 at the centre pulse
  double range_m = 0.0;    // closest-approach slant range
  cplx amplitude{};
};

/// Reflectivity on the raw-data grid plus optional off-grid targets.
struct Scene {
  ComplexGrid reflectivity;
  double cell_spacing_azimuth_m = 0.0;
  double cell_spacing_range_m = 0.0;
  std::vector<Target> targets;

  Shape shape() const { return reflectivity.shape(); }
};

Scene empty_scene(const RadarParams& params, Shape shape);

/// On-grid point targets at the given cells.
struct CellTarget {
  std::size_t azimuth = 0;
  std::size_t range = 0;
  cplx amplitude{};
};
Scene point_scene(const RadarParams& params, Shape shape, std::span<const CellTarget> targets);

/// Rectangular speckle region [az_begin, az_end) x [rg_begin, rg_end) in cells.
struct RegionCells {
  std::size_t az_begin = 0, az_end = 0, rg_begin = 0, rg_end = 0;
  std::size_t pixel_count() const { return (az_end - az_begin) * (rg_end - rg_begin); }
};

struct RayleighOptions {
  /// Sum this many unit scatterers at random sub-cell positions per cell
  /// instead of drawing one circular Gaussian per cell.
  bool exact_scatterers = false;
  std::size_t scatterers_per_cell = 400;
};

/// Homogeneous speckle: unit mean intensity per cell inside the region.
Scene rayleigh_scene(const RadarParams& params, Shape shape, const RegionCells& region, Seed seed,
                     const RayleighOptions& options = {});

/// Throws if any target lies outside the illuminated swath of the grid.
void check_scene(const RadarParams& params, const Scene& scene);

/// Noiseless echo plus optional circular Gaussian noise at the given SNR
/// (signal power measured over the samples where the echo is nonzero).
ComplexGrid simulate_raw(const Scene& scene, const RadarParams& params, Seed seed,
                         std::optional<double> noise_snr_db);

/// Dense H with simulate_raw(scene) == H * vec(reflectivity) for on-grid scenes.
DenseMatrix observation_matrix(Shape scene_shape, const RadarParams& params,
                               std::size_t entry_cap = kDenseEntryCap);

enum class SamplingPattern { sample_wise, pulse_wise };
std::string to_string(SamplingPattern p);
SamplingPattern parse_sampling_pattern(const std::string& name);

struct SamplingMask {
  std::vector<std::uint64_t> retained;  // sorted flat indices
  std::uint64_t total_samples = 0;
  double rate = 1.0;

  std::size_t count() const { return retained.size(); }
};

SamplingMask generate_mask(Shape shape, double rate, Seed seed,
                           SamplingPattern pattern = SamplingPattern::sample_wise);

/// Checks sortedness, uniqueness and range of the indices.
void validate_mask(const SamplingMask& mask);

struct CompressedData {
  std::vector<cplx> values;
  SamplingMask mask;
  Shape full_shape;
};

CompressedData subsample(const ComplexGrid& raw, const SamplingMask& mask);

/// Zero-filled scatter of the retained values.
ComplexGrid subsample_adjoint(const CompressedData& data);

/// Persist as <stem>.mask.u64 (little-endian u64: n_azimuth, n_range, count,
/// indices...) and <stem>.values.cf32 (interleaved little-endian f32 pairs).
void save_compressed(const CompressedData& data, const std::string& stem);
CompressedData load_compressed(const std::string& stem);

/// Plain-text target list, one target per line: azimuth_m, range_m, amp_re, amp_im.
/// Commas or whitespace separate fields; '#' starts a comment.
std::vector<Target> read_target_list(const std::string& path);
void write_target_list(const std::string& path, std::span<const Target> targets);

}  // namespace mlcs::sim
