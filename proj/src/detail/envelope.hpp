#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "mlcs/radar_params.hpp"

namespace mlcs::detail {

/// Envelope of total support `span` centred on zero; closed interval. The
/// relative 1e-9 allowance keeps samples landing exactly on an edge inside
/// regardless of how the offset was rounded.
inline double envelope(Window w, double x, double span) {
  if (std::abs(x) > 0.5 * span * (1.0 + 1e-9)) return 0.0;
  switch (w) {
    case Window::rectangular: return 1.0;
    case Window::hamming: return 0.54 + 0.46 * std::cos(2.0 * std::numbers::pi * x / span);
  }
  return 0.0;
}

/// exp(-j 4 pi f0 R / c)
inline std::complex<double> carrier_phase(const RadarParams& p, double range_m) {
  return std::polar(1.0, -4.0 * std::numbers::pi * p.carrier_freq_hz() * range_m /
                             p.light_speed_mps());
}

/// exp(j pi Kr u^2)
inline std::complex<double> chirp_phase(const RadarParams& p, double u) {
  return std::polar(1.0, std::numbers::pi * p.range_fm_rate_hzps() * u * u);
}

/// R(eta) = sqrt(R^2 + (v eta)^2)
inline double range_history(const RadarParams& p, double closest_range_m, double eta) {
  const double along = p.platform_velocity_mps() * eta;
  return std::sqrt(closest_range_m * closest_range_m + along * along);
}

}  // namespace mlcs::detail
