#include "mlcs/mlrda.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mlcs/error.hpp"
#include "mlcs/fft.hpp"

namespace mlcs::rda {

namespace {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Migration factor D(f) = sqrt(1 - (lambda f / 2v)^2).
double migration_factor(const RadarParams& params, double doppler_hz) {
  const double s = params.wavelength_m() * doppler_hz / (2.0 * params.platform_velocity_mps());
  return std::sqrt(1.0 - s * s);
}

std::size_t wrap_mod(long x, std::size_t m) {
  const long n = static_cast<long>(m);
  return static_cast<std::size_t>(((x % n) + n) % n);
}

}  // namespace

ShiftStencil make_shift_stencil(double shift) {
  if (!std::isfinite(shift)) throw ConfigError("RCMC shift is not finite");
  ShiftStencil st;
  const double base = std::floor(shift);
  st.offset = static_cast<long>(base) - static_cast<long>(ShiftStencil::taps / 2 - 1);
  const double frac = shift - base;
  if (frac == 0.0) {
    st.weights.fill(0.0);
    st.weights[ShiftStencil::taps / 2 - 1] = 1.0;
    return st;
  }
  double total = 0.0;
  for (std::size_t t = 0; t < ShiftStencil::taps; ++t) {
    // Tap position relative to the interpolation point.
    const double d = static_cast<double>(st.offset + static_cast<long>(t)) - shift;
    const double w = 0.54 + 0.46 * std::cos(std::numbers::pi * d / (ShiftStencil::taps / 2));
    st.weights[t] = sinc(d) * w;
    total += st.weights[t];
  }
  for (auto& w : st.weights) w /= total;
  return st;
}

RdaFilters build_filters(const RadarParams& params, Shape shape, const FilterOptions& options) {
  if (shape.size() == 0) throw ShapeError("build_filters: empty grid");
  if (params.doppler_bandwidth_hz() > params.prf_hz()) {
    throw ConfigError("Doppler bandwidth " + std::to_string(params.doppler_bandwidth_hz()) +
                      " Hz exceeds the PRF " + std::to_string(params.prf_hz()) + " Hz");
  }
  const std::size_t n_az = shape.n_azimuth;
  const std::size_t n_rg = shape.n_range;
  const double lambda = params.wavelength_m();

  RdaFilters f;
  f.shape = shape;
  f.inverse = options.inverse;

  f.range_matched_filter.resize(n_rg);
  for (std::size_t k = 0; k < n_rg; ++k) {
    const double freq = static_cast<double>(signed_bin(k, n_rg)) * params.range_sample_rate_hz() /
                        static_cast<double>(n_rg);
    f.range_matched_filter[k] =
        std::polar(1.0, std::numbers::pi * freq * freq / params.range_fm_rate_hzps());
  }

  f.azimuth_matched_filter = ComplexGrid(shape);
  f.rcmc_shift.assign(n_az, 0.0);
  for (std::size_t j = 0; j < n_az; ++j) {
    const double doppler = static_cast<double>(signed_bin(j, n_az)) * params.prf_hz() /
                           static_cast<double>(n_az);
    const double d = migration_factor(params, doppler);
    if (options.range_migration) {
      f.rcmc_shift[j] = params.slant_range_m() * (1.0 / d - 1.0) / params.range_cell_m();
    }
    for (std::size_t k = 0; k < n_rg; ++k) {
      const double range = params.slant_range_m() +
                           (static_cast<double>(k) - static_cast<double>(n_rg / 2)) * params.range_cell_m();
      f.azimuth_matched_filter(j, k) = std::polar(1.0, 4.0 * std::numbers::pi * range * d / lambda);
    }
  }

  f.rcmc_stencils.reserve(n_az);
  f.reverse_stencils.reserve(n_az);
  for (double s : f.rcmc_shift) {
    f.rcmc_stencils.push_back(make_shift_stencil(s));
    f.reverse_stencils.push_back(make_shift_stencil(-s));
  }
  return f;
}

double migration_gain(const RdaFilters& filters) {
  // Each Doppler row of C is a circulant over range; its singular values are
  // the magnitudes of the stencil's DFT on the range grid.
  const auto& stencils =
      filters.inverse == MigrationInverse::exact_transpose ? filters.rcmc_stencils : filters.reverse_stencils;
  const std::size_t n = filters.shape.n_range;
  double gain = 0.0;
  for (const auto& st : stencils) {
    for (std::size_t m = 0; m < n; ++m) {
      cplx h{};
      for (std::size_t t = 0; t < ShiftStencil::taps; ++t) {
        const double phase = -2.0 * std::numbers::pi * double(m) * double(st.offset + long(t)) / double(n);
        h += st.weights[t] * std::polar(1.0, phase);
      }
      gain = std::max(gain, std::abs(h));
    }
  }
  return gain;
}

LookPlan make_look_plan(std::size_t n_azimuth, std::size_t look_count) {
  if (n_azimuth == 0) throw ConfigError("look plan needs at least one azimuth sample");
  if (look_count == 0 || n_azimuth % look_count != 0) {
    throw ConfigError("look count " + std::to_string(look_count) + " does not divide the azimuth length " +
                      std::to_string(n_azimuth));
  }
  LookPlan plan;
  plan.look_count = look_count;
  plan.n_azimuth = n_azimuth;
  const std::size_t m = n_azimuth / look_count;
  const long half = static_cast<long>(n_azimuth / 2);
  plan.bands.resize(look_count);
  for (std::size_t i = 0; i < look_count; ++i) {
    plan.bands[i].reserve(m);
    for (std::size_t c = i * m; c < (i + 1) * m; ++c)
      plan.bands[i].push_back(wrap_mod(static_cast<long>(c) - half, n_azimuth));
  }
  return plan;
}

namespace {

void check_plan(const LookPlan& plan, Shape shape) {
  if (plan.n_azimuth != shape.n_azimuth) {
    throw ShapeError("look plan built for " + std::to_string(plan.n_azimuth) +
                     " azimuth samples applied to grid " + to_string(shape));
  }
}

void check_filters(const RdaFilters& filters, Shape shape) {
  if (!(filters.shape == shape)) {
    throw ShapeError("filters built for " + to_string(filters.shape) + " applied to grid " +
                     to_string(shape));
  }
}

// Position of a natural-order bin inside its look's length-m spectrum, chosen
// so that a target at azimuth sample p lands on look pixel p / L.
std::size_t look_slot(std::size_t natural_bin, std::size_t n, std::size_t m) {
  return wrap_mod(signed_bin(natural_bin, n), m);
}

}  // namespace

ComplexGrid range_compress(const ComplexGrid& raw, const RdaFilters& filters) {
  check_filters(filters, raw.shape());
  ComplexGrid out = raw;
  kernels::fft_axis(out.values(), out.shape(), Axis::range, Direction::forward);
  kernels::multiply_columns(out, filters.range_matched_filter, false);
  kernels::fft_axis(out.values(), out.shape(), Axis::range, Direction::inverse);
  return out;
}

ComplexGrid range_decompress(const ComplexGrid& compressed, const RdaFilters& filters) {
  check_filters(filters, compressed.shape());
  ComplexGrid out = compressed;
  kernels::fft_axis(out.values(), out.shape(), Axis::range, Direction::forward);
  kernels::multiply_columns(out, filters.range_matched_filter, true);
  kernels::fft_axis(out.values(), out.shape(), Axis::range, Direction::inverse);
  return out;
}

LookStack extract_looks(const ComplexGrid& spectrum, const LookPlan& plan) {
  check_plan(plan, spectrum.shape());
  const std::size_t n = plan.n_azimuth;
  const std::size_t m = plan.look_length();
  LookStack looks(plan.look_count, Shape{m, spectrum.n_range()});
  for (std::size_t i = 0; i < plan.look_count; ++i) {
    auto& look = looks[i];
    for (std::size_t bin : plan.bands[i]) {
      const auto src = spectrum.row(bin);
      auto dst = look.row(look_slot(bin, n, m));
      std::copy(src.begin(), src.end(), dst.begin());
    }
    kernels::fft_axis(look.values(), look.shape(), Axis::azimuth, Direction::inverse);
  }
  return looks;
}

ComplexGrid spectrum_stack(const LookStack& looks, const LookPlan& plan) {
  const std::size_t n = plan.n_azimuth;
  const std::size_t m = plan.look_length();
  if (looks.look_count() != plan.look_count || looks.look_shape().n_azimuth != m) {
    throw ShapeError("look stack of " + std::to_string(looks.look_count()) + " x " +
                     to_string(looks.look_shape()) + " does not match the look plan (" +
                     std::to_string(plan.look_count) + " looks of " + std::to_string(m) + " rows)");
  }
  const std::size_t n_rg = looks.look_shape().n_range;
  ComplexGrid spectrum(Shape{n, n_rg});
  for (std::size_t i = 0; i < plan.look_count; ++i) {
    ComplexGrid look = looks[i];
    kernels::fft_axis(look.values(), look.shape(), Axis::azimuth, Direction::forward);
    for (std::size_t bin : plan.bands[i]) {
      const auto src = look.row(look_slot(bin, n, m));
      auto dst = spectrum.row(bin);
      std::copy(src.begin(), src.end(), dst.begin());
    }
  }
  return spectrum;
}

LookStack look_form(const ComplexGrid& raw, const RdaFilters& filters, const LookPlan& plan) {
  check_plan(plan, raw.shape());
  ComplexGrid data = range_compress(raw, filters);
  kernels::fft_axis(data.values(), data.shape(), Axis::azimuth, Direction::forward);
  ComplexGrid aligned(data.shape());
  kernels::shift_rows(data, aligned, filters.rcmc_stencils);
  kernels::multiply(aligned, filters.azimuth_matched_filter, false);
  return extract_looks(aligned, plan);
}

ComplexGrid look_inverse(const LookStack& looks, const RdaFilters& filters, const LookPlan& plan) {
  ComplexGrid spectrum = spectrum_stack(looks, plan);
  check_filters(filters, spectrum.shape());
  kernels::multiply(spectrum, filters.azimuth_matched_filter, true);
  ComplexGrid migrated(spectrum.shape());
  if (filters.inverse == MigrationInverse::exact_transpose) {
    kernels::shift_rows_transpose(spectrum, migrated, filters.rcmc_stencils);
  } else {
    kernels::shift_rows(spectrum, migrated, filters.reverse_stencils);
  }
  kernels::fft_axis(migrated.values(), migrated.shape(), Axis::azimuth, Direction::inverse);
  return range_decompress(migrated, filters);
}

LookStack adjoint_of_sensing(const sim::CompressedData& residual, const RdaFilters& filters,
                             const LookPlan& plan) {
  return look_form(sim::subsample_adjoint(residual), filters, plan);
}

SensingOperator::SensingOperator(const RdaFilters& filters, const LookPlan& plan,
                                 const sim::SamplingMask& mask)
    : filters_(&filters), plan_(&plan), mask_(&mask) {
  check_plan(plan, filters.shape);
  if (mask.total_samples != filters.shape.size()) {
    throw ShapeError("sampling mask covers " + std::to_string(mask.total_samples) +
                     " samples but the grid " + to_string(filters.shape) + " has " +
                     std::to_string(filters.shape.size()));
  }
  sim::validate_mask(mask);
}

std::vector<cplx> SensingOperator::forward(const LookStack& x) const {
  const ComplexGrid full = look_inverse(x, *filters_, *plan_);
  std::vector<cplx> out(mask_->count());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = full[mask_->retained[j]];
  return out;
}

LookStack SensingOperator::adjoint(std::span<const cplx> d) const {
  if (d.size() != mask_->count()) {
    throw ShapeError("measurement vector has " + std::to_string(d.size()) + " entries, mask keeps " +
                     std::to_string(mask_->count()));
  }
  ComplexGrid full(filters_->shape);
  for (std::size_t j = 0; j < d.size(); ++j) full[mask_->retained[j]] = d[j];
  return look_form(full, *filters_, *plan_);
}

namespace {

void check_materialize(const RdaFilters& filters, const LookPlan& plan) {
  check_plan(plan, filters.shape);
  if (filters.shape.n_azimuth > kMaterializeMaxAzimuth || filters.shape.n_range > kMaterializeMaxRange ||
      plan.look_count > kMaterializeMaxLooks) {
    throw ConfigError("dense materialization is limited to " + std::to_string(kMaterializeMaxAzimuth) +
                      " x " + std::to_string(kMaterializeMaxRange) + " grids and " +
                      std::to_string(kMaterializeMaxLooks) + " looks; got " + to_string(filters.shape) +
                      " with " + std::to_string(plan.look_count) + " looks");
  }
}

}  // namespace

DenseMatrix materialize_operator(const RdaFilters& filters, const LookPlan& plan) {
  check_materialize(filters, plan);
  const Shape look_shape{plan.look_length(), filters.shape.n_range};
  const std::size_t n = filters.shape.size();
  DenseMatrix g(n, n);
  std::vector<cplx> unit(n);
  for (std::size_t c = 0; c < n; ++c) {
    unit[c] = 1.0;
    const auto col = look_inverse(LookStack::unflatten(unit, plan.look_count, look_shape), filters, plan);
    unit[c] = 0.0;
    for (std::size_t r = 0; r < n; ++r) g(r, c) = col[r];
  }
  return g;
}

DenseMatrix materialize_look_form(const RdaFilters& filters, const LookPlan& plan) {
  check_materialize(filters, plan);
  const std::size_t n = filters.shape.size();
  DenseMatrix m(n, n);
  ComplexGrid unit(filters.shape);
  for (std::size_t c = 0; c < n; ++c) {
    unit[c] = 1.0;
    const auto col = look_form(unit, filters, plan).flatten();
    unit[c] = 0.0;
    for (std::size_t r = 0; r < n; ++r) m(r, c) = col[r];
  }
  return m;
}

}  // namespace mlcs::rda
