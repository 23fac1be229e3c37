#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mlcs/error.hpp"
#include "mlcs/grid_io.hpp"
#include "mlcs/sim.hpp"

namespace mlcs::sim {

void save_compressed(const CompressedData& data, const std::string& stem) {
  if (data.values.size() != data.mask.retained.size()) {
    throw ShapeError("compressed data and mask disagree in length");
  }
  {
    std::ofstream os(stem + ".mask.u64", std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + stem + ".mask.u64' for writing");
    io::write_u64(os, data.full_shape.n_azimuth);
    io::write_u64(os, data.full_shape.n_range);
    io::write_u64(os, data.mask.retained.size());
    for (auto idx : data.mask.retained) io::write_u64(os, idx);
    if (!os) throw IoError("failed writing mask");
  }
  std::ofstream os(stem + ".values.cf32", std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + stem + ".values.cf32' for writing");
  for (const auto& z : data.values) {
    io::write_f32(os, static_cast<float>(z.real()));
    io::write_f32(os, static_cast<float>(z.imag()));
  }
  if (!os) throw IoError("failed writing compressed values");
}

CompressedData load_compressed(const std::string& stem) {
  CompressedData d;
  std::ifstream ms(stem + ".mask.u64", std::ios::binary);
  if (!ms) throw IoError("cannot open '" + stem + ".mask.u64'");
  d.full_shape.n_azimuth = io::read_u64(ms);
  d.full_shape.n_range = io::read_u64(ms);
  const std::uint64_t count = io::read_u64(ms);
  d.mask.total_samples = d.full_shape.size();
  if (count > d.mask.total_samples) throw IoError("mask holds more indices than the grid has samples");
  d.mask.retained.resize(count);
  for (auto& idx : d.mask.retained) idx = io::read_u64(ms);
  d.mask.rate = d.mask.total_samples ? static_cast<double>(count) / d.mask.total_samples : 0.0;
  try {
    validate_mask(d.mask);
  } catch (const ShapeError& e) {
    throw IoError(std::string("corrupt mask file: ") + e.what());
  }

  std::ifstream vs(stem + ".values.cf32", std::ios::binary);
  if (!vs) throw IoError("cannot open '" + stem + ".values.cf32'");
  d.values.resize(count);
  for (auto& z : d.values) {
    const float re = io::read_f32(vs);
    const float im = io::read_f32(vs);
    if (!std::isfinite(re) || !std::isfinite(im)) throw IoError("compressed values contain non-finite data");
    z = {re, im};
  }
  if (vs.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes in compressed values file");
  return d;
}

std::vector<Target> read_target_list(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open target list '" + path + "'");
  std::vector<Target> targets;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (auto& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream fields(line);
    std::vector<double> v;
    double x;
    while (fields >> x) v.push_back(x);
    if (!fields.eof()) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": unparsable field");
    }
    if (v.empty()) continue;
    if (v.size() != 3 && v.size() != 4) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected azimuth_m, range_m, amp_re[, amp_im]");
    }
    targets.push_back({v[0], v[1], cplx(v[2], v.size() == 4 ? v[3] : 0.0)});
  }
  return targets;
}

void write_target_list(const std::string& path, std::span<const Target> targets) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "# azimuth_m, range_m, amp_re, amp_im\n" << std::setprecision(17);
  for (const auto& t : targets)
    os << t.azimuth_m << ", " << t.range_m << ", " << t.amplitude.real() << ", " << t.amplitude.imag()
       << '\n';
  if (!os) throw IoError("failed writing target list");
}

}  // namespace mlcs::sim
