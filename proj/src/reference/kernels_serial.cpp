#include <algorithm>
#include <cmath>
#include <vector>

#include "detail/envelope.hpp"
#include "detail/fft_plan.hpp"
#include "mlcs/reference.hpp"

namespace mlcs::reference {

namespace {

std::size_t wrap(long x, std::size_t n) {
  const long m = static_cast<long>(n);
  return static_cast<std::size_t>(((x % m) + m) % m);
}

void fft_rows(std::vector<cplx>& data, std::size_t rows, std::size_t cols, Direction dir) {
  const auto& plan = detail::fft_plan(cols, dir);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    plan.execute(data.data() + r * cols);
    for (std::size_t c = 0; c < cols; ++c) data[r * cols + c] *= scale;
  }
}

}  // namespace

void fft_axis(std::span<cplx> data, Shape shape, Axis axis, Direction dir) {
  if (data.size() != shape.size()) throw ShapeError("fft_axis: data length does not match shape");
  if (shape.size() == 0) return;
  const std::size_t n_az = shape.n_azimuth;
  const std::size_t n_rg = shape.n_range;
  if (axis == Axis::range) {
    std::vector<cplx> buf(data.begin(), data.end());
    fft_rows(buf, n_az, n_rg, dir);
    std::copy(buf.begin(), buf.end(), data.begin());
    return;
  }
  std::vector<cplx> transposed(shape.size());
  for (std::size_t i = 0; i < n_az; ++i)
    for (std::size_t k = 0; k < n_rg; ++k) transposed[k * n_az + i] = data[i * n_rg + k];
  fft_rows(transposed, n_rg, n_az, dir);
  for (std::size_t i = 0; i < n_az; ++i)
    for (std::size_t k = 0; k < n_rg; ++k) data[i * n_rg + k] = transposed[k * n_az + i];
}

void shift_rows(const ComplexGrid& in, ComplexGrid& out, std::span<const ShiftStencil> stencils) {
  require_same_shape(in, out, "shift_rows");
  const std::size_t n = in.n_range();
  for (std::size_t i = 0; i < in.n_azimuth(); ++i) {
    const auto& st = stencils[i];
    for (std::size_t k = 0; k < n; ++k) {
      cplx acc{};
      for (std::size_t t = 0; t < ShiftStencil::taps; ++t)
        acc += st.weights[t] * in(i, wrap(static_cast<long>(k) + st.offset + static_cast<long>(t), n));
      out(i, k) = acc;
    }
  }
}

void shift_rows_transpose(const ComplexGrid& in, ComplexGrid& out,
                          std::span<const ShiftStencil> stencils) {
  require_same_shape(in, out, "shift_rows_transpose");
  const std::size_t n = in.n_range();
  for (auto& v : out.values()) v = cplx{};
  for (std::size_t i = 0; i < in.n_azimuth(); ++i) {
    const auto& st = stencils[i];
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t t = 0; t < ShiftStencil::taps; ++t)
        out(i, wrap(static_cast<long>(k) + st.offset + static_cast<long>(t), n)) +=
            st.weights[t] * in(i, k);
    }
  }
}

void multiply_columns(ComplexGrid& grid, std::span<const cplx> filter, bool conjugate) {
  for (std::size_t i = 0; i < grid.n_azimuth(); ++i)
    for (std::size_t k = 0; k < grid.n_range(); ++k)
      grid(i, k) *= conjugate ? std::conj(filter[k]) : filter[k];
}

void multiply(ComplexGrid& grid, const ComplexGrid& filter, bool conjugate) {
  for (std::size_t j = 0; j < grid.size(); ++j)
    grid[j] *= conjugate ? std::conj(filter[j]) : filter[j];
}

std::vector<double> pixel_norms(const LookStack& x) {
  std::vector<double> norms(x.pixel_count());
  for (std::size_t p = 0; p < norms.size(); ++p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.look_count(); ++i) acc += std::norm(x[i][p]);
    norms[p] = std::sqrt(acc);
  }
  return norms;
}

std::size_t group_threshold(LookStack& x, double tau) {
  const auto norms = pixel_norms(x);
  std::size_t active = 0;
  for (std::size_t p = 0; p < norms.size(); ++p) {
    const double scale = norms[p] > tau ? 1.0 - tau / norms[p] : 0.0;
    if (scale > 0.0) ++active;
    for (std::size_t i = 0; i < x.look_count(); ++i) x[i][p] = scale > 0.0 ? x[i][p] * scale : cplx{};
  }
  return active;
}

void superpose_echoes(const RadarParams& params, const SampleLattice& lattice,
                      std::span<const EchoSource> sources, ComplexGrid& out) {
  const double ta = params.synthetic_aperture_time_s();
  const double tr = params.pulse_duration_s();
  const double t_az = lattice.azimuth_period_s();
  const double t_rg = lattice.range_period_s();
  for (const auto& src : sources) {
    for (std::size_t i = 0; i < lattice.shape.n_azimuth; ++i) {
      const double eta0 = lattice.eta(i) - src.azimuth_time_s;
      const long q_lo = static_cast<long>(std::ceil((-0.5 * ta - eta0) / t_az)) - 1;
      const long q_hi = static_cast<long>(std::floor((0.5 * ta - eta0) / t_az)) + 1;
      for (long q = q_lo; q <= q_hi; ++q) {
        const double eta = eta0 + static_cast<double>(q) * t_az;
        const double wa = detail::envelope(params.azimuth_window(), eta, ta);
        if (wa == 0.0) continue;
        const double range = detail::range_history(params, src.closest_range_m, eta);
        for (std::size_t k = 0; k < lattice.shape.n_range; ++k) {
          const double u0 = lattice.tau(k) - 2.0 * range / params.light_speed_mps();
          const long p_lo = static_cast<long>(std::ceil((-0.5 * tr - u0) / t_rg)) - 1;
          const long p_hi = static_cast<long>(std::floor((0.5 * tr - u0) / t_rg)) + 1;
          for (long p = p_lo; p <= p_hi; ++p) {
            const double u = u0 + static_cast<double>(p) * t_rg;
            const double wr = detail::envelope(params.range_window(), u, tr);
            if (wr == 0.0) continue;
            out(i, k) += src.amplitude * wa * detail::carrier_phase(params, range) * wr *
                         detail::chirp_phase(params, u);
          }
        }
      }
    }
  }
}

}  // namespace mlcs::reference
