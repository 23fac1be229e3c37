#include "mlcs/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "detail/envelope.hpp"
#include "mlcs/error.hpp"

namespace mlcs::sim {

cplx impulse_response(const RadarParams& params, double eta, double tau, double closest_range_m) {
  const double wa = detail::envelope(params.azimuth_window(), eta, params.synthetic_aperture_time_s());
  if (wa == 0.0) return {};
  const double range = detail::range_history(params, closest_range_m, eta);
  const double u = tau - 2.0 * range / params.light_speed_mps();
  const double wr = detail::envelope(params.range_window(), u, params.pulse_duration_s());
  if (wr == 0.0) return {};
  return wa * wr * detail::carrier_phase(params, range) * detail::chirp_phase(params, u);
}

cplx impulse_response(const RadarParams& params, double eta, double tau) {
  return impulse_response(params, eta, tau, params.slant_range_m());
}

SampleLattice make_lattice(const RadarParams& params, Shape shape) {
  if (shape.size() == 0) throw ShapeError("empty sampling grid");
  return SampleLattice{shape, params.prf_hz(), params.range_sample_rate_hz(), params.slant_range_m(),
                       params.light_speed_mps()};
}

namespace {

double cell_azimuth_m(const RadarParams& params, const SampleLattice& lattice, std::size_t i) {
  return params.platform_velocity_mps() * lattice.eta(i);
}

double cell_range_m(const RadarParams& params, const SampleLattice& lattice, std::size_t k) {
  return params.slant_range_m() +
         (static_cast<double>(k) - static_cast<double>(lattice.shape.n_range / 2)) *
             params.range_cell_m();
}

std::vector<EchoSource> collect_sources(const RadarParams& params, const Scene& scene) {
  const auto lattice = make_lattice(params, scene.shape());
  std::vector<EchoSource> sources;
  for (std::size_t i = 0; i < scene.reflectivity.n_azimuth(); ++i) {
    for (std::size_t k = 0; k < scene.reflectivity.n_range(); ++k) {
      const cplx a = scene.reflectivity(i, k);
      if (a == cplx{}) continue;
      sources.push_back({lattice.eta(i), cell_range_m(params, lattice, k), a});
    }
  }
  for (const auto& t : scene.targets) {
    if (t.amplitude == cplx{}) continue;
    sources.push_back({t.azimuth_m / params.platform_velocity_mps(), t.range_m, t.amplitude});
  }
  return sources;
}

}  // namespace

Scene empty_scene(const RadarParams& params, Shape shape) {
  Scene s;
  s.reflectivity = ComplexGrid(shape);
  s.cell_spacing_azimuth_m = params.azimuth_cell_m();
  s.cell_spacing_range_m = params.range_cell_m();
  return s;
}

Scene point_scene(const RadarParams& params, Shape shape, std::span<const CellTarget> targets) {
  Scene s = empty_scene(params, shape);
  for (const auto& t : targets) {
    if (t.azimuth >= shape.n_azimuth || t.range >= shape.n_range) {
      throw ConfigError("point target cell (" + std::to_string(t.azimuth) + ", " +
                        std::to_string(t.range) + ") is outside the " + to_string(shape) + " scene");
    }
    s.reflectivity(t.azimuth, t.range) += t.amplitude;
  }
  return s;
}

Scene rayleigh_scene(const RadarParams& params, Shape shape, const RegionCells& region, Seed seed,
                     const RayleighOptions& options) {
  if (region.az_begin >= region.az_end || region.rg_begin >= region.rg_end ||
      region.az_end > shape.n_azimuth || region.rg_end > shape.n_range) {
    throw ConfigError("speckle region is empty or outside the scene");
  }
  Scene s = empty_scene(params, shape);
  const CounterRng rng(seed, streams::scene);
  const auto lattice = make_lattice(params, shape);

  if (!options.exact_scatterers) {
    for (std::size_t i = region.az_begin; i < region.az_end; ++i) {
      for (std::size_t k = region.rg_begin; k < region.rg_end; ++k) {
        const auto [g1, g2] = rng.normal_pair(i * shape.n_range + k);
        s.reflectivity(i, k) = cplx(g1, g2) * std::sqrt(0.5);
      }
    }
    return s;
  }

  const std::size_t per_cell = options.scatterers_per_cell;
  if (per_cell == 0) throw ConfigError("scatterers_per_cell must be >= 1");
  const double amp = 1.0 / std::sqrt(static_cast<double>(per_cell));
  s.targets.reserve(region.pixel_count() * per_cell);
  for (std::size_t i = region.az_begin; i < region.az_end; ++i) {
    for (std::size_t k = region.rg_begin; k < region.rg_end; ++k) {
      const std::uint64_t base = (i * shape.n_range + k) * per_cell * 3;
      for (std::size_t j = 0; j < per_cell; ++j) {
        const std::uint64_t c = base + 3 * j;
        const double da = rng.uniform(c) - 0.5;
        const double dr = rng.uniform(c + 1) - 0.5;
        const double phase = 2.0 * std::numbers::pi * rng.uniform(c + 2);
        s.targets.push_back({cell_azimuth_m(params, lattice, i) + da * params.azimuth_cell_m(),
                             cell_range_m(params, lattice, k) + dr * params.range_cell_m(),
                             std::polar(amp, phase)});
      }
    }
  }
  return s;
}

void check_scene(const RadarParams& params, const Scene& scene) {
  const Shape shape = scene.shape();
  if (shape.size() == 0) throw ConfigError("scene grid is empty");
  if (!all_finite(scene.reflectivity.values())) throw ConfigError("scene has non-finite reflectivity");
  const auto lattice = make_lattice(params, shape);
  const double az_lo = cell_azimuth_m(params, lattice, 0) - 0.5 * params.azimuth_cell_m();
  const double az_hi = cell_azimuth_m(params, lattice, shape.n_azimuth - 1) + 0.5 * params.azimuth_cell_m();
  const double rg_lo = cell_range_m(params, lattice, 0) - 0.5 * params.range_cell_m();
  const double rg_hi = cell_range_m(params, lattice, shape.n_range - 1) + 0.5 * params.range_cell_m();
  for (const auto& t : scene.targets) {
    if (!std::isfinite(t.amplitude.real()) || !std::isfinite(t.amplitude.imag())) {
      throw ConfigError("target amplitude is not finite");
    }
    if (!(t.azimuth_m >= az_lo && t.azimuth_m <= az_hi && t.range_m >= rg_lo && t.range_m <= rg_hi)) {
      std::ostringstream msg;
      msg << "target at (azimuth " << t.azimuth_m << " m, range " << t.range_m
          << " m) is outside the swath [" << az_lo << ", " << az_hi << "] x [" << rg_lo << ", "
          << rg_hi << "]";
      throw ConfigError(msg.str());
    }
  }
}

ComplexGrid simulate_raw(const Scene& scene, const RadarParams& params, Seed seed,
                         std::optional<double> noise_snr_db) {
  check_scene(params, scene);
  const auto lattice = make_lattice(params, scene.shape());
  const auto sources = collect_sources(params, scene);
  ComplexGrid raw(scene.shape());
  kernels::superpose_echoes(params, lattice, sources, raw);

  if (!noise_snr_db) return raw;
  if (!std::isfinite(*noise_snr_db)) throw ConfigError("noise SNR must be finite");

  double power = 0.0;
  std::size_t support = 0;
  for (const auto& z : raw.values()) {
    if (z != cplx{}) {
      power += std::norm(z);
      ++support;
    }
  }
  if (support == 0) return raw;
  power /= static_cast<double>(support);
  const double sigma = std::sqrt(power / std::pow(10.0, *noise_snr_db / 10.0) / 2.0);
  const CounterRng rng(seed, streams::noise);
  auto values = raw.values();
  const long n = static_cast<long>(values.size());
#pragma omp parallel for schedule(static)
  for (long m = 0; m < n; ++m) {
    const auto [g1, g2] = rng.normal_pair(static_cast<std::uint64_t>(m));
    values[m] += sigma * cplx(g1, g2);
  }
  return raw;
}

DenseMatrix observation_matrix(Shape scene_shape, const RadarParams& params, std::size_t entry_cap) {
  const std::size_t n = scene_shape.size();
  if (n == 0) throw ShapeError("observation_matrix: empty scene");
  if (n > entry_cap / n) {
    throw ConfigError("observation matrix of " + std::to_string(n) + " x " + std::to_string(n) +
                      " exceeds the entry cap of " + std::to_string(entry_cap));
  }
  const auto lattice = make_lattice(params, scene_shape);
  const double t_az = lattice.azimuth_period_s();
  const double t_rg = lattice.range_period_s();
  // Enough periodic images to cover every envelope support.
  const long q_max = static_cast<long>(std::ceil(params.synthetic_aperture_time_s() / t_az)) + 1;
  const long p_max = static_cast<long>(std::ceil(params.pulse_duration_s() / t_rg)) + 1;

  DenseMatrix h(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    const std::size_t cell_az = col / scene_shape.n_range;
    const std::size_t cell_rg = col % scene_shape.n_range;
    const double range_n = cell_range_m(params, lattice, cell_rg);
    for (std::size_t row = 0; row < n; ++row) {
      const std::size_t i = row / scene_shape.n_range;
      const std::size_t k = row % scene_shape.n_range;
      cplx acc{};
      for (long q = -q_max; q <= q_max; ++q) {
        const double eta = lattice.eta(i) - lattice.eta(cell_az) + static_cast<double>(q) * t_az;
        for (long p = -p_max; p <= p_max; ++p) {
          acc += impulse_response(params, eta, lattice.tau(k) + static_cast<double>(p) * t_rg, range_n);
        }
      }
      h(row, col) = acc;
    }
  }
  return h;
}

std::string to_string(SamplingPattern p) {
  return p == SamplingPattern::sample_wise ? "sample" : "pulse";
}

SamplingPattern parse_sampling_pattern(const std::string& name) {
  if (name == "sample" || name == "sample-wise" || name == "sample_wise") return SamplingPattern::sample_wise;
  if (name == "pulse" || name == "pulse-wise" || name == "pulse_wise") return SamplingPattern::pulse_wise;
  throw ConfigError("unknown sampling pattern '" + name + "' (expected sample or pulse)");
}

namespace {

// First `k` entries of a seeded Fisher-Yates shuffle of 0..n-1, sorted.
std::vector<std::uint64_t> choose_without_replacement(std::uint64_t n, std::uint64_t k, Seed seed) {
  std::vector<std::uint64_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const CounterRng rng(seed, streams::mask);
  for (std::uint64_t j = 0; j < k; ++j) {
    const std::uint64_t r = j + rng.bounded(j, n - j);
    std::swap(idx[j], idx[r]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

SamplingMask generate_mask(Shape shape, double rate, Seed seed, SamplingPattern pattern) {
  if (!(rate > 0.0 && rate <= 1.0)) {
    throw ConfigError("sampling rate must lie in (0, 1], got " + std::to_string(rate));
  }
  const std::uint64_t total = shape.size();
  if (total == 0) throw ShapeError("generate_mask: empty grid");
  SamplingMask mask;
  mask.total_samples = total;
  mask.rate = rate;

  if (pattern == SamplingPattern::sample_wise) {
    const auto k = static_cast<std::uint64_t>(std::llround(rate * static_cast<double>(total)));
    if (k == 0) throw ConfigError("sampling rate keeps no samples of a " + to_string(shape) + " grid");
    mask.retained = choose_without_replacement(total, k, seed);
    return mask;
  }

  const auto pulses = static_cast<std::uint64_t>(std::llround(rate * static_cast<double>(shape.n_azimuth)));
  if (pulses == 0) throw ConfigError("sampling rate keeps no pulses of a " + to_string(shape) + " grid");
  const auto chosen = choose_without_replacement(shape.n_azimuth, pulses, seed);
  mask.retained.reserve(pulses * shape.n_range);
  for (auto p : chosen)
    for (std::uint64_t k = 0; k < shape.n_range; ++k) mask.retained.push_back(p * shape.n_range + k);
  return mask;
}

void validate_mask(const SamplingMask& mask) {
  for (std::size_t j = 0; j < mask.retained.size(); ++j) {
    if (mask.retained[j] >= mask.total_samples) throw ShapeError("mask index out of range");
    if (j > 0 && mask.retained[j] <= mask.retained[j - 1]) {
      throw ShapeError("mask indices must be strictly increasing");
    }
  }
}

CompressedData subsample(const ComplexGrid& raw, const SamplingMask& mask) {
  if (mask.total_samples != raw.size()) {
    throw ShapeError("mask covers " + std::to_string(mask.total_samples) + " samples but grid has " +
                     std::to_string(raw.size()));
  }
  CompressedData d;
  d.mask = mask;
  d.full_shape = raw.shape();
  d.values.resize(mask.retained.size());
  for (std::size_t j = 0; j < mask.retained.size(); ++j) d.values[j] = raw[mask.retained[j]];
  return d;
}

ComplexGrid subsample_adjoint(const CompressedData& data) {
  if (data.values.size() != data.mask.retained.size()) {
    throw ShapeError("compressed data has " + std::to_string(data.values.size()) +
                     " values for " + std::to_string(data.mask.retained.size()) + " mask indices");
  }
  ComplexGrid grid(data.full_shape);
  for (std::size_t j = 0; j < data.values.size(); ++j) grid[data.mask.retained[j]] = data.values[j];
  return grid;
}

}  // namespace mlcs::sim
