#include "mlcs/metrics.hpp"

#include <cmath>
#include <vector>

#include "mlcs/error.hpp"

namespace mlcs::metrics {

void RegionSpec::validate(Shape image_shape) const {
  if (az_begin >= az_end || rg_begin >= rg_end) throw ConfigError("region is empty");
  if (az_end > image_shape.n_azimuth || rg_end > image_shape.n_range) {
    throw ConfigError("region [" + std::to_string(az_begin) + ", " + std::to_string(az_end) + ") x [" +
                      std::to_string(rg_begin) + ", " + std::to_string(rg_end) +
                      ") exceeds image " + to_string(image_shape));
  }
}

double enl(const MultilookImage& image, const RegionSpec& region, EnlMode mode) {
  region.validate(image.shape());
  const std::size_t n = region.pixel_count();
  if (n < 16) throw ConfigError("ENL region needs at least 16 pixels, got " + std::to_string(n));
  std::vector<double> v;
  v.reserve(n);
  for (std::size_t i = region.az_begin; i < region.az_end; ++i) {
    for (std::size_t k = region.rg_begin; k < region.rg_end; ++k) {
      const double z = image(i, k);
      v.push_back(mode == EnlMode::intensity ? z * z : z);
    }
  }
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(n - 1);
  if (!(var > 0.0)) throw Error("degenerate region: zero variance, ENL undefined");
  return mean * mean / var;
}

namespace {

double ratio_db(double err_sq, double truth_sq) {
  if (!(truth_sq > 0.0)) throw Error("relative error undefined for a zero reference");
  if (err_sq == 0.0) return kDbFloor;
  return std::max(kDbFloor, 10.0 * std::log10(err_sq / truth_sq));
}

template <typename A, typename B>
double diff_db(std::span<const A> est, std::span<const B> truth) {
  if (est.size() != truth.size()) throw ShapeError("relative_error: shape mismatch");
  double e = 0.0, t = 0.0;
  for (std::size_t j = 0; j < est.size(); ++j) {
    e += std::norm(est[j] - truth[j]);
    t += std::norm(truth[j]);
  }
  return ratio_db(e, t);
}

}  // namespace

double relative_error_db(const LookStack& estimate, const LookStack& truth) {
  require_same_shape(estimate, truth, "relative_error");
  const auto a = estimate.flatten();
  const auto b = truth.flatten();
  return diff_db<cplx, cplx>(a, b);
}

double relative_error_db(const RealGrid& estimate, const RealGrid& truth) {
  if (!(estimate.shape() == truth.shape())) throw ShapeError("relative_error: shape mismatch");
  return diff_db<double, double>(estimate.values(), truth.values());
}

double relative_error_db(const ComplexGrid& estimate, const ComplexGrid& truth) {
  require_same_shape(estimate, truth, "relative_error");
  return diff_db<cplx, cplx>(estimate.values(), truth.values());
}

RealGrid magnitude(const ComplexGrid& image) {
  RealGrid out(image.shape());
  for (std::size_t j = 0; j < image.size(); ++j) out[j] = std::abs(image[j]);
  return out;
}

PeakReport peak_report(const RealGrid& mag, std::size_t half_width) {
  if (mag.size() == 0) throw ShapeError("peak_report: empty image");
  PeakReport rep;
  std::size_t best = 0;
  for (std::size_t j = 1; j < mag.size(); ++j)
    if (std::abs(mag[j]) > std::abs(mag[best])) best = j;
  if (mag[best] == 0.0) throw Error("peak_report: image is identically zero");
  const Shape s = mag.shape();
  rep.azimuth = best / s.n_range;
  rep.range = best % s.n_range;
  rep.value = std::abs(mag[best]);

  std::vector<char> inside(mag.size(), 0);
  const long h = static_cast<long>(half_width);
  for (long da = -h; da <= h; ++da) {
    for (long dr = -h; dr <= h; ++dr) {
      const long a = static_cast<long>(rep.azimuth) + da;
      const long r = static_cast<long>(rep.range) + dr;
      const long na = static_cast<long>(s.n_azimuth);
      const long nr = static_cast<long>(s.n_range);
      inside[static_cast<std::size_t>(((a % na) + na) % na) * s.n_range +
             static_cast<std::size_t>(((r % nr) + nr) % nr)] = 1;
    }
  }
  double e_in = 0.0, e_out = 0.0;
  for (std::size_t j = 0; j < mag.size(); ++j) (inside[j] ? e_in : e_out) += mag[j] * mag[j];
  rep.islr_db = e_out == 0.0 ? kDbFloor : std::max(kDbFloor, 10.0 * std::log10(e_out / e_in));
  return rep;
}

PeakReport peak_report(const ComplexGrid& image, std::size_t half_width) {
  return peak_report(magnitude(image), half_width);
}

}  // namespace mlcs::metrics
