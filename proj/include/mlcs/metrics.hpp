#pragma once

#include <cstddef>

#include "mlcs/grid.hpp"

namespace mlcs::metrics {

/// Floor substituted for -infinity in every dB output.
inline constexpr double kDbFloor = -300.0;

/// Half-open pixel rectangle [az_begin, az_end) x [rg_begin, rg_end).
struct RegionSpec {
  std::size_t az_begin = 0, az_end = 0, rg_begin = 0, rg_end = 0;

  std::size_t pixel_count() const { return (az_end - az_begin) * (rg_end - rg_begin); }
  void validate(Shape image_shape) const;
};

enum class EnlMode { intensity, amplitude };

/// (mean / std)^2 of z^2 (intensity mode) or z (amplitude mode) over the region.
/// Requires at least 16 pixels; throws on zero variance.
double enl(const MultilookImage& image, const RegionSpec& region,
           EnlMode mode = EnlMode::intensity);

/// 20 log10(||estimate - truth|| / ||truth||), floored at kDbFloor.
double relative_error_db(const LookStack& estimate, const LookStack& truth);
double relative_error_db(const RealGrid& estimate, const RealGrid& truth);
double relative_error_db(const ComplexGrid& estimate, const ComplexGrid& truth);

struct PeakReport {
  std::size_t azimuth = 0;
  std::size_t range = 0;
  double value = 0.0;
  double islr_db = kDbFloor;  // 10 log10(E_outside / E_inside)
};

/// Peak of |image| and the integrated sidelobe ratio with a
/// (2 half_width + 1)^2 mainlobe window centred on it (circular wrap).
PeakReport peak_report(const RealGrid& magnitude, std::size_t half_width = 2);
PeakReport peak_report(const ComplexGrid& image, std::size_t half_width = 2);

RealGrid magnitude(const ComplexGrid& image);

}  // namespace mlcs::metrics
