#include "mlcs/radar_params.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include "mlcs/error.hpp"
#include "mlcs/random.hpp"

namespace mlcs {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << "radar parameter " << name << " must be finite and > 0 (got " << value << ")";
    throw ConfigError(msg.str());
  }
}

// Minimum oversampling of the range and Doppler bandwidths.
constexpr double kMinOversampling = 1.1;

}  // namespace

std::string to_string(Window w) {
  switch (w) {
    case Window::rectangular: return "rectangular";
    case Window::hamming: return "hamming";
  }
  return "?";
}

Window parse_window(const std::string& name) {
  if (name == "rectangular" || name == "rect") return Window::rectangular;
  if (name == "hamming") return Window::hamming;
  throw ConfigError("unknown window '" + name + "' (expected rectangular or hamming)");
}

RadarParams::RadarParams(const RadarSettings& s)
    : settings_(s),
      f0_(s.carrier_freq_hz),
      r0_(s.slant_range_m),
      v_(s.platform_velocity_mps),
      br_(s.range_bandwidth_hz),
      tr_(s.pulse_duration_s),
      kr_(0.0),
      prf_(0.0),
      fs_(0.0),
      ta_(s.synthetic_aperture_time_s),
      c_(s.light_speed_mps),
      az_window_(s.azimuth_window),
      rg_window_(s.range_window) {
  require_positive(f0_, "carrier_freq_hz");
  require_positive(r0_, "slant_range_m");
  require_positive(v_, "platform_velocity_mps");
  require_positive(br_, "range_bandwidth_hz");
  require_positive(tr_, "pulse_duration_s");
  require_positive(ta_, "synthetic_aperture_time_s");
  require_positive(c_, "light_speed_mps");

  kr_ = br_ / tr_;
  if (s.range_fm_rate_hzps) {
    require_positive(*s.range_fm_rate_hzps, "range_fm_rate_hzps");
    if (std::abs(*s.range_fm_rate_hzps - kr_) > 1e-9 * kr_) {
      std::ostringstream msg;
      msg << "range_fm_rate_hzps " << *s.range_fm_rate_hzps
          << " is inconsistent with range_bandwidth_hz / pulse_duration_s = " << kr_;
      throw ConfigError(msg.str());
    }
  }

  if (s.range_sample_rate_hz) {
    fs_ = *s.range_sample_rate_hz;
  } else {
    require_positive(s.range_oversampling, "range_oversampling");
    fs_ = s.range_oversampling * br_;
  }
  require_positive(fs_, "range_sample_rate_hz");

  const double doppler_bw = doppler_bandwidth_hz();
  if (s.prf_hz) {
    prf_ = *s.prf_hz;
  } else {
    require_positive(s.azimuth_oversampling, "azimuth_oversampling");
    prf_ = s.azimuth_oversampling * doppler_bw;
  }
  require_positive(prf_, "prf_hz");

  // Small relative slack so that exactly 1.1x oversampling is accepted.
  constexpr double slack = 1.0 - 1e-12;
  if (fs_ < kMinOversampling * br_ * slack) {
    std::ostringstream msg;
    msg << "range_sample_rate_hz " << fs_ << " is below " << kMinOversampling
        << " x range bandwidth " << br_;
    throw ConfigError(msg.str());
  }
  if (prf_ < kMinOversampling * doppler_bw * slack) {
    std::ostringstream msg;
    msg << "prf_hz " << prf_ << " is below " << kMinOversampling << " x Doppler bandwidth "
        << doppler_bw;
    throw ConfigError(msg.str());
  }
  // The hyperbolic range history needs |lambda f / 2v| < 1 over the whole PRF.
  if (wavelength_m() * prf_ / (4.0 * v_) >= 1.0) {
    throw ConfigError("prf_hz too high for the carrier wavelength and velocity");
  }
}

double RadarParams::azimuth_fm_rate_hzps() const {
  return 2.0 * v_ * v_ / (wavelength_m() * r0_);
}

double RadarParams::doppler_bandwidth_hz() const { return azimuth_fm_rate_hzps() * ta_; }

std::uint64_t RadarParams::digest() const {
  const double fields[] = {f0_, r0_, v_, br_, tr_, kr_, prf_, fs_, ta_, c_};
  std::uint64_t h = 0x6d6c6373ULL;
  for (double f : fields) h = splitmix64(h ^ std::bit_cast<std::uint64_t>(f));
  h = splitmix64(h ^ static_cast<std::uint64_t>(az_window_));
  h = splitmix64(h ^ static_cast<std::uint64_t>(rg_window_));
  return h;
}

}  // namespace mlcs
