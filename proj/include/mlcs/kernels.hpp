#pragma once

// Data-parallel inner loops. Everything here has an OpenMP implementation
// (namespace kernels) and a plain serial counterpart (namespace reference,
// see reference.hpp) that the tests and the benchmark compare against.
//
// Every kernel partitions work so that each output element is written by
// exactly one iteration with a fixed summation order; results do not depend
// on the thread count.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "mlcs/fft.hpp"
#include "mlcs/grid.hpp"
#include "mlcs/radar_params.hpp"

namespace mlcs {

enum class Axis { azimuth, range };

/// 8-tap fractional-shift stencil for one row:
/// out[k] = sum_t weights[t] * in[(k + offset + t) mod n].
struct ShiftStencil {
  static constexpr std::size_t taps = 8;
  long offset = 0;
  std::array<double, taps> weights{};
};

/// Point scatterer in sensor coordinates.
struct EchoSource {
  double azimuth_time_s = 0.0;  // time of closest approach relative to the grid origin
  double closest_range_m = 0.0;
  cplx amplitude{};
};

/// Sampling lattice of the raw-data grid (periodic in both axes).
struct SampleLattice {
  Shape shape;
  double prf_hz = 0.0;
  double range_sample_rate_hz = 0.0;
  double reference_range_m = 0.0;
  double light_speed_mps = 0.0;

  double eta(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(shape.n_azimuth / 2)) / prf_hz;
  }
  double tau(std::size_t k) const {
    return 2.0 * reference_range_m / light_speed_mps +
           (static_cast<double>(k) - static_cast<double>(shape.n_range / 2)) / range_sample_rate_hz;
  }
  double azimuth_period_s() const { return static_cast<double>(shape.n_azimuth) / prf_hz; }
  double range_period_s() const { return static_cast<double>(shape.n_range) / range_sample_rate_hz; }
};

namespace kernels {

/// In-place unitary batched DFT along one axis.
void fft_axis(std::span<cplx> data, Shape shape, Axis axis, Direction dir);

/// Row-wise fractional shift (one stencil per azimuth row), circular edges.
void shift_rows(const ComplexGrid& in, ComplexGrid& out, std::span<const ShiftStencil> stencils);

/// Exact transpose of shift_rows with the same stencils.
void shift_rows_transpose(const ComplexGrid& in, ComplexGrid& out,
                          std::span<const ShiftStencil> stencils);

/// grid[i, k] *= filter[k] (or conj(filter[k])).
void multiply_columns(ComplexGrid& grid, std::span<const cplx> filter, bool conjugate);

/// grid *= filter elementwise (or conj(filter)).
void multiply(ComplexGrid& grid, const ComplexGrid& filter, bool conjugate);

/// Per-pixel Euclidean norm across looks.
std::vector<double> pixel_norms(const LookStack& x);

/// Row-wise group soft threshold; returns the number of nonzero rows left.
std::size_t group_threshold(LookStack& x, double tau);

/// Superpose periodic echoes of the given sources onto `out` (accumulates).
void superpose_echoes(const RadarParams& params, const SampleLattice& lattice,
                      std::span<const EchoSource> sources, ComplexGrid& out);

}  // namespace kernels
}  // namespace mlcs
