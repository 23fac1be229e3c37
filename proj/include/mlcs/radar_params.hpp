#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace mlcs {

/// Envelope selector for the azimuth and range weighting functions.
enum class Window { rectangular, hamming };

std::string to_string(Window w);
Window parse_window(const std::string& name);

/// User-facing inputs. Sampling rates may be given explicitly or derived from
/// oversampling factors over the range and Doppler bandwidths.
struct RadarSettings {
  double carrier_freq_hz = 5.0e9;
  double slant_range_m = 20.0e3;
  double platform_velocity_mps = 350.0;
  double range_bandwidth_hz = 75.0e6;
  double pulse_duration_s = 2.0e-6;
  std::optional<double> range_fm_rate_hzps;  // must equal Br / Tr when given
  std::optional<double> prf_hz;
  std::optional<double> range_sample_rate_hz;
  double range_oversampling = 1.2;
  double azimuth_oversampling = 1.2;
  double synthetic_aperture_time_s = 0.4;
  double light_speed_mps = 299792458.0;
  Window azimuth_window = Window::rectangular;
  Window range_window = Window::rectangular;
};

/// Validated, immutable SAR geometry (zero squint).
class RadarParams {
 public:
  /// Throws ConfigError when any invariant fails.
  explicit RadarParams(const RadarSettings& settings = {});

  double carrier_freq_hz() const { return f0_; }
  double slant_range_m() const { return r0_; }
  double platform_velocity_mps() const { return v_; }
  double range_bandwidth_hz() const { return br_; }
  double pulse_duration_s() const { return tr_; }
  double range_fm_rate_hzps() const { return kr_; }
  double prf_hz() const { return prf_; }
  double range_sample_rate_hz() const { return fs_; }
  double synthetic_aperture_time_s() const { return ta_; }
  double light_speed_mps() const { return c_; }
  Window azimuth_window() const { return az_window_; }
  Window range_window() const { return rg_window_; }

  double wavelength_m() const { return c_ / f0_; }
  /// Ka = 2 v^2 / (lambda R0)
  double azimuth_fm_rate_hzps() const;
  double doppler_bandwidth_hz() const;
  /// Slant-range spacing of one range sample.
  double range_cell_m() const { return c_ / (2.0 * fs_); }
  /// Along-track spacing of one pulse.
  double azimuth_cell_m() const { return v_ / prf_; }

  const RadarSettings& settings() const { return settings_; }

  /// Stable 64-bit digest of all parameters (used in manifests).
  std::uint64_t digest() const;

 private:
  RadarSettings settings_;
  double f0_, r0_, v_, br_, tr_, kr_, prf_, fs_, ta_, c_;
  Window az_window_, rg_window_;
};

}  // namespace mlcs
