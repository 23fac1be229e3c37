#include "mlcs/fft.hpp"

#include "mlcs/kernels.hpp"

namespace mlcs {

ComplexGrid fft_azimuth(const ComplexGrid& grid, Direction dir) {
  ComplexGrid out = grid;
  kernels::fft_axis(out.values(), out.shape(), Axis::azimuth, dir);
  return out;
}

ComplexGrid fft_range(const ComplexGrid& grid, Direction dir) {
  ComplexGrid out = grid;
  kernels::fft_axis(out.values(), out.shape(), Axis::range, dir);
  return out;
}

}  // namespace mlcs
