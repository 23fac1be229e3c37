#include <cmath>
#include <vector>

#include "detail/envelope.hpp"
#include "detail/fft_plan.hpp"
#include "mlcs/kernels.hpp"

namespace mlcs::kernels {

namespace {

inline std::size_t wrap(long x, long n) {
  const long r = x % n;
  return static_cast<std::size_t>(r < 0 ? r + n : r);
}

inline long signed_count(std::size_t n) { return static_cast<long>(n); }

}  // namespace

void fft_axis(std::span<cplx> data, Shape shape, Axis axis, Direction dir) {
  if (data.size() != shape.size()) throw ShapeError("fft_axis: data length does not match shape");
  if (shape.size() == 0) return;
  const long n_az = signed_count(shape.n_azimuth);
  const long n_rg = signed_count(shape.n_range);

  if (axis == Axis::range) {
    const auto& plan = detail::fft_plan(shape.n_range, dir);
    const double scale = 1.0 / std::sqrt(static_cast<double>(shape.n_range));
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n_az; ++i) {
      cplx* row = data.data() + i * n_rg;
      plan.execute(row);
      for (long k = 0; k < n_rg; ++k) row[k] *= scale;
    }
    return;
  }

  const auto& plan = detail::fft_plan(shape.n_azimuth, dir);
  const double scale = 1.0 / std::sqrt(static_cast<double>(shape.n_azimuth));
#pragma omp parallel
  {
    std::vector<cplx> column(shape.n_azimuth);
#pragma omp for schedule(static)
    for (long k = 0; k < n_rg; ++k) {
      for (long i = 0; i < n_az; ++i) column[i] = data[i * n_rg + k];
      plan.execute(column.data());
      for (long i = 0; i < n_az; ++i) data[i * n_rg + k] = column[i] * scale;
    }
  }
}

void shift_rows(const ComplexGrid& in, ComplexGrid& out, std::span<const ShiftStencil> stencils) {
  require_same_shape(in, out, "shift_rows");
  if (stencils.size() != in.n_azimuth()) throw ShapeError("shift_rows: one stencil per row");
  const long n_az = signed_count(in.n_azimuth());
  const long n = signed_count(in.n_range());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n_az; ++i) {
    const auto& st = stencils[i];
    const auto src = in.row(i);
    auto dst = out.row(i);
    for (long k = 0; k < n; ++k) {
      const long base = k + st.offset;
      cplx acc{};
      if (base >= 0 && base + static_cast<long>(ShiftStencil::taps) <= n) {
        for (std::size_t t = 0; t < ShiftStencil::taps; ++t) acc += st.weights[t] * src[base + t];
      } else {
        for (std::size_t t = 0; t < ShiftStencil::taps; ++t)
          acc += st.weights[t] * src[wrap(base + static_cast<long>(t), n)];
      }
      dst[k] = acc;
    }
  }
}

void shift_rows_transpose(const ComplexGrid& in, ComplexGrid& out,
                          std::span<const ShiftStencil> stencils) {
  require_same_shape(in, out, "shift_rows_transpose");
  if (stencils.size() != in.n_azimuth()) throw ShapeError("shift_rows_transpose: one stencil per row");
  const long n_az = signed_count(in.n_azimuth());
  const long n = signed_count(in.n_range());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n_az; ++i) {
    const auto& st = stencils[i];
    const auto src = in.row(i);
    auto dst = out.row(i);
    for (auto& v : dst) v = cplx{};
    for (long k = 0; k < n; ++k) {
      const long base = k + st.offset;
      for (std::size_t t = 0; t < ShiftStencil::taps; ++t)
        dst[wrap(base + static_cast<long>(t), n)] += st.weights[t] * src[k];
    }
  }
}

void multiply_columns(ComplexGrid& grid, std::span<const cplx> filter, bool conjugate) {
  if (filter.size() != grid.n_range()) throw ShapeError("multiply_columns: filter length");
  const long n_az = signed_count(grid.n_azimuth());
  const long n_rg = signed_count(grid.n_range());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n_az; ++i) {
    auto row = grid.row(i);
    if (conjugate) {
      for (long k = 0; k < n_rg; ++k) row[k] *= std::conj(filter[k]);
    } else {
      for (long k = 0; k < n_rg; ++k) row[k] *= filter[k];
    }
  }
}

void multiply(ComplexGrid& grid, const ComplexGrid& filter, bool conjugate) {
  require_same_shape(grid, filter, "multiply");
  const long n = static_cast<long>(grid.size());
  auto g = grid.values();
  auto f = filter.values();
#pragma omp parallel for schedule(static)
  for (long j = 0; j < n; ++j) g[j] *= conjugate ? std::conj(f[j]) : f[j];
}

std::vector<double> pixel_norms(const LookStack& x) {
  const long n = static_cast<long>(x.pixel_count());
  const std::size_t looks = x.look_count();
  std::vector<double> norms(x.pixel_count());
#pragma omp parallel for schedule(static)
  for (long p = 0; p < n; ++p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < looks; ++i) acc += std::norm(x[i][p]);
    norms[p] = std::sqrt(acc);
  }
  return norms;
}

std::size_t group_threshold(LookStack& x, double tau) {
  const long n = static_cast<long>(x.pixel_count());
  const std::size_t looks = x.look_count();
  long active = 0;
#pragma omp parallel for schedule(static) reduction(+ : active)
  for (long p = 0; p < n; ++p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < looks; ++i) acc += std::norm(x[i][p]);
    const double row_norm = std::sqrt(acc);
    if (row_norm > tau) {
      const double scale = 1.0 - tau / row_norm;
      for (std::size_t i = 0; i < looks; ++i) x[i][p] *= scale;
      ++active;
    } else {
      for (std::size_t i = 0; i < looks; ++i) x[i][p] = cplx{};
    }
  }
  return static_cast<std::size_t>(active);
}

void superpose_echoes(const RadarParams& params, const SampleLattice& lattice,
                      std::span<const EchoSource> sources, ComplexGrid& out) {
  if (out.shape() != lattice.shape) throw ShapeError("superpose_echoes: output shape");
  const long n_az = signed_count(lattice.shape.n_azimuth);
  const std::size_t n_rg = lattice.shape.n_range;
  const double ta = params.synthetic_aperture_time_s();
  const double tr = params.pulse_duration_s();
  const double t_az = lattice.azimuth_period_s();
  const double t_rg = lattice.range_period_s();
  const double c = params.light_speed_mps();

  std::vector<double> tau(n_rg);
  for (std::size_t k = 0; k < n_rg; ++k) tau[k] = lattice.tau(k);

#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n_az; ++i) {
    auto row = out.row(static_cast<std::size_t>(i));
    const double eta_i = lattice.eta(static_cast<std::size_t>(i));
    for (const auto& src : sources) {
      const double eta0 = eta_i - src.azimuth_time_s;
      const long q_lo = static_cast<long>(std::ceil((-0.5 * ta - eta0) / t_az)) - 1;
      const long q_hi = static_cast<long>(std::floor((0.5 * ta - eta0) / t_az)) + 1;
      // Bounds are widened by one; the envelope test decides support.
      for (long q = q_lo; q <= q_hi; ++q) {
        const double eta = eta0 + static_cast<double>(q) * t_az;
        const double wa = detail::envelope(params.azimuth_window(), eta, ta);
        if (wa == 0.0) continue;
        const double range = detail::range_history(params, src.closest_range_m, eta);
        const cplx gain = src.amplitude * wa * detail::carrier_phase(params, range);
        const double delay = 2.0 * range / c;
        for (std::size_t k = 0; k < n_rg; ++k) {
          const double u0 = tau[k] - delay;
          const long p_lo = static_cast<long>(std::ceil((-0.5 * tr - u0) / t_rg)) - 1;
          const long p_hi = static_cast<long>(std::floor((0.5 * tr - u0) / t_rg)) + 1;
          cplx acc{};
          for (long p = p_lo; p <= p_hi; ++p) {
            const double u = u0 + static_cast<double>(p) * t_rg;
            const double wr = detail::envelope(params.range_window(), u, tr);
            if (wr != 0.0) acc += wr * detail::chirp_phase(params, u);
          }
          row[k] += gain * acc;
        }
      }
    }
  }
}

}  // namespace mlcs::kernels
