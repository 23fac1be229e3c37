#pragma once

// Multilook range-Doppler operators.
//
//   look_form    (M): y -> { F'^H R_i Q D F_a P y }_i
//   look_inverse (G): X -> P^H F_a^H C Q^H S(X)
//
// All FFTs are unitary and all filters are phase-only, so with C = D^T the
// pair is an exact adjoint: <G(X), y> = <X, M(y)>.

#include <cstddef>
#include <span>
#include <vector>

#include "mlcs/dense.hpp"
#include "mlcs/grid.hpp"
#include "mlcs/kernels.hpp"
#include "mlcs/radar_params.hpp"
#include "mlcs/sim.hpp"

namespace mlcs::rda {

/// How the range-migration stage of G is realized.
enum class MigrationInverse {
  exact_transpose,        // C = D^T (default; exact adjoint pair)
  reverse_interpolation,  // C = interpolation with negated shifts
};

struct FilterOptions {
  /// When false the shift table is all zero and every stage is unitary.
  bool range_migration = true;
  MigrationInverse inverse = MigrationInverse::exact_transpose;
};

struct RdaFilters {
  Shape shape;
  std::vector<cplx> range_matched_filter;  // per range-frequency bin, natural order
  ComplexGrid azimuth_matched_filter;      // per (Doppler bin, range bin), natural order
  std::vector<double> rcmc_shift;          // per Doppler bin, in range samples
  std::vector<ShiftStencil> rcmc_stencils;     // realizes D
  std::vector<ShiftStencil> reverse_stencils;  // negated shifts, for reverse_interpolation
  MigrationInverse inverse = MigrationInverse::exact_transpose;
};

/// Throws ConfigError when the Doppler bandwidth exceeds the PRF.
RdaFilters build_filters(const RadarParams& params, Shape shape, const FilterOptions& options = {});

/// Truncated-sinc stencil (8 taps, Hamming-weighted, unit DC gain) evaluating
/// in[k + shift]. Integer shifts give an exact single-tap copy.
ShiftStencil make_shift_stencil(double shift);

/// Largest singular value of the migration inverse C. Every other stage of G
/// is unitary, so this bounds ||G|| and hence ||Theta G||.
double migration_gain(const RdaFilters& filters);

/// Nonoverlapping Doppler subbands. Bands are contiguous in increasing Doppler
/// starting from the most negative frequency; each holds natural-order bins.
struct LookPlan {
  std::size_t look_count = 1;
  std::size_t n_azimuth = 0;
  std::vector<std::vector<std::size_t>> bands;

  std::size_t look_length() const { return n_azimuth / look_count; }
};

/// Throws ConfigError unless look_count >= 1 divides n_azimuth.
LookPlan make_look_plan(std::size_t n_azimuth, std::size_t look_count);

/// Range compression P: per-row multiply by the range matched filter in the range-frequency domain.
ComplexGrid range_compress(const ComplexGrid& raw, const RdaFilters& filters);
/// P^H.
ComplexGrid range_decompress(const ComplexGrid& compressed, const RdaFilters& filters);

/// R_i followed by length-N/L inverse FFTs; `spectrum` is a full range-Doppler grid.
LookStack extract_looks(const ComplexGrid& spectrum, const LookPlan& plan);

/// S: per-look forward FFT placed back into each look's band.
ComplexGrid spectrum_stack(const LookStack& looks, const LookPlan& plan);

/// M.
LookStack look_form(const ComplexGrid& raw, const RdaFilters& filters, const LookPlan& plan);

/// G.
ComplexGrid look_inverse(const LookStack& looks, const RdaFilters& filters, const LookPlan& plan);

/// M(Theta^T d): the adjoint of the compressed forward model Theta G.
LookStack adjoint_of_sensing(const sim::CompressedData& residual, const RdaFilters& filters,
                             const LookPlan& plan);

/// Theta G wrapped as a linear operator for the solver.
class SensingOperator {
 public:
  SensingOperator(const RdaFilters& filters, const LookPlan& plan, const sim::SamplingMask& mask);
  // Holds references; temporaries would dangle.
  SensingOperator(RdaFilters&&, const LookPlan&, const sim::SamplingMask&) = delete;
  SensingOperator(const RdaFilters&, LookPlan&&, const sim::SamplingMask&) = delete;
  SensingOperator(const RdaFilters&, const LookPlan&, sim::SamplingMask&&) = delete;

  /// Theta G(X), in mask order.
  std::vector<cplx> forward(const LookStack& x) const;
  /// (Theta G)^H d.
  LookStack adjoint(std::span<const cplx> d) const;

  std::size_t look_count() const { return plan_->look_count; }
  Shape look_shape() const { return {plan_->look_length(), filters_->shape.n_range}; }
  std::size_t measurement_count() const { return mask_->count(); }
  const sim::SamplingMask& mask() const { return *mask_; }
  const RdaFilters& filters() const { return *filters_; }

 private:
  const RdaFilters* filters_;
  const LookPlan* plan_;
  const sim::SamplingMask* mask_;
};

/// Hard limits for dense materialization.
inline constexpr std::size_t kMaterializeMaxAzimuth = 16;
inline constexpr std::size_t kMaterializeMaxRange = 16;
inline constexpr std::size_t kMaterializeMaxLooks = 4;

/// Dense G: columns are G applied to unit-impulse look stacks (look-major order).
DenseMatrix materialize_operator(const RdaFilters& filters, const LookPlan& plan);
/// Dense M: columns are M applied to unit-impulse raw grids.
DenseMatrix materialize_look_form(const RdaFilters& filters, const LookPlan& plan);

}  // namespace mlcs::rda
