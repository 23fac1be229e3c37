#include "detail/fft_plan.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "mlcs/error.hpp"

namespace mlcs::detail {

FftPlan::FftPlan(std::size_t n, Direction dir) : n_(n) {
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (buf == nullptr) throw Error("fftw_malloc failed");
  const int sign = dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD;
  plan_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  if (plan_ == nullptr) throw Error("FFTW could not create a plan of length " + std::to_string(n));
}

void FftPlan::execute(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(plan_), p, p);
}

const FftPlan& fft_plan(std::size_t n, Direction dir) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, int>, std::unique_ptr<FftPlan>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n, static_cast<int>(dir)}];
  if (!slot) slot.reset(new FftPlan(n, dir));
  return *slot;
}

}  // namespace mlcs::detail
