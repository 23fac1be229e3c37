#pragma once

#include <cstddef>

#include "mlcs/fft.hpp"

namespace mlcs::detail {

/// Process-wide cache of in-place, unaligned FFTW plans. Planning uses
/// FFTW_ESTIMATE so the chosen algorithm (and hence every output bit) does not
/// depend on timing. Executing a cached plan is thread-safe.
class FftPlan {
 public:
  /// Unnormalized in-place transform of n contiguous samples.
  void execute(cplx* data) const;
  std::size_t size() const { return n_; }

 private:
  friend const FftPlan& fft_plan(std::size_t n, Direction dir);
  FftPlan(std::size_t n, Direction dir);
  void* plan_ = nullptr;
  std::size_t n_ = 0;
};

const FftPlan& fft_plan(std::size_t n, Direction dir);

}  // namespace mlcs::detail
