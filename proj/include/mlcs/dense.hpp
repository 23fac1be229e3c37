#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mlcs/grid.hpp"

namespace mlcs {

/// Row-major dense complex matrix. Only used for small-size oracles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const cplx> values() const { return data_; }

  std::vector<cplx> apply(std::span<const cplx> x) const;
  DenseMatrix adjoint() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

/// Default cap on entries for oracle matrices (2^24).
inline constexpr std::size_t kDenseEntryCap = std::size_t{1} << 24;

}  // namespace mlcs
