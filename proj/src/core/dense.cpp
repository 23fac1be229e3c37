#include "mlcs/dense.hpp"

namespace mlcs {

std::vector<cplx> DenseMatrix::apply(std::span<const cplx> x) const {
  if (x.size() != cols_) throw ShapeError("DenseMatrix::apply: vector length mismatch");
  std::vector<cplx> y(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    cplx acc{};
    for (std::size_t c = 0; c < cols_; ++c) acc += data_[r * cols_ + c] * x[c];
    y[r] = acc;
  }
  return y;
}

DenseMatrix DenseMatrix::adjoint() const {
  DenseMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj(data_[r * cols_ + c]);
  return out;
}

}  // namespace mlcs
