#pragma once

#include "mlcs/grid.hpp"

namespace mlcs {

enum class Direction { forward, inverse };

/// Unitary DFT (1/sqrt(N) both ways) along the azimuth axis of every range column.
ComplexGrid fft_azimuth(const ComplexGrid& grid, Direction dir);

/// Unitary DFT along the range axis of every azimuth row.
ComplexGrid fft_range(const ComplexGrid& grid, Direction dir);

/// Signed frequency index of natural-order DFT bin k: 0, 1, ..., ceil(N/2)-1, -floor(N/2), ..., -1.
inline long signed_bin(std::size_t k, std::size_t n) {
  return (2 * k < n) ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

}  // namespace mlcs
