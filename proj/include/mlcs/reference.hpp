#pragma once

// Serial reference versions of the kernels in kernels.hpp. Written for
// clarity rather than speed; used by tests and by the benchmark.

#include "mlcs/kernels.hpp"

namespace mlcs::reference {

/// Azimuth transforms go through an explicit transpose so each column is contiguous.
void fft_axis(std::span<cplx> data, Shape shape, Axis axis, Direction dir);

void shift_rows(const ComplexGrid& in, ComplexGrid& out, std::span<const ShiftStencil> stencils);
void shift_rows_transpose(const ComplexGrid& in, ComplexGrid& out,
                          std::span<const ShiftStencil> stencils);

void multiply_columns(ComplexGrid& grid, std::span<const cplx> filter, bool conjugate);
void multiply(ComplexGrid& grid, const ComplexGrid& filter, bool conjugate);

std::vector<double> pixel_norms(const LookStack& x);
std::size_t group_threshold(LookStack& x, double tau);

/// Source-major loop: one source at a time over the whole grid.
void superpose_echoes(const RadarParams& params, const SampleLattice& lattice,
                      std::span<const EchoSource> sources, ComplexGrid& out);

}  // namespace mlcs::reference
