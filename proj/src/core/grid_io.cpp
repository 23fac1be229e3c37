#include "mlcs/grid_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "mlcs/error.hpp"

namespace mlcs::io {

namespace {

constexpr std::array<char, 4> kMagic = {'M', 'L', 'C', 'S'};

template <typename U>
void write_le(std::ostream& os, U v) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(bytes.data(), bytes.size());
}

template <typename U>
U read_le(std::istream& is) {
  std::array<unsigned char, sizeof(U)> bytes{};
  is.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!is) throw IoError("unexpected end of file");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
  return v;
}

struct Header {
  Shape shape;
  DType dtype;
};

void write_header(std::ostream& os, Shape shape, DType dtype) {
  os.write(kMagic.data(), kMagic.size());
  write_u32(os, kGridVersion);
  write_u32(os, static_cast<std::uint32_t>(shape.n_azimuth));
  write_u32(os, static_cast<std::uint32_t>(shape.n_range));
  write_u32(os, static_cast<std::uint32_t>(dtype));
}

Header read_header(std::istream& is) {
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw IoError("not an MLCS grid file (bad magic)");
  const auto version = read_u32(is);
  if (version != kGridVersion) throw IoError("unsupported grid version " + std::to_string(version));
  Header h;
  h.shape.n_azimuth = read_u32(is);
  h.shape.n_range = read_u32(is);
  const auto tag = read_u32(is);
  if (tag != static_cast<std::uint32_t>(DType::complex64) &&
      tag != static_cast<std::uint32_t>(DType::float32)) {
    throw IoError("unknown grid dtype tag " + std::to_string(tag));
  }
  h.dtype = static_cast<DType>(tag);
  return h;
}

void check_finite(float v) {
  if (!std::isfinite(v)) throw IoError("grid file contains a non-finite value");
}

}  // namespace

void write_u32(std::ostream& os, std::uint32_t v) { write_le(os, v); }
void write_u64(std::ostream& os, std::uint64_t v) { write_le(os, v); }
void write_f32(std::ostream& os, float v) { write_le(os, std::bit_cast<std::uint32_t>(v)); }
std::uint32_t read_u32(std::istream& is) { return read_le<std::uint32_t>(is); }
std::uint64_t read_u64(std::istream& is) { return read_le<std::uint64_t>(is); }
float read_f32(std::istream& is) { return std::bit_cast<float>(read_le<std::uint32_t>(is)); }

void write_grid(std::ostream& os, const ComplexGrid& grid) {
  write_header(os, grid.shape(), DType::complex64);
  for (const auto& z : grid.values()) {
    write_f32(os, static_cast<float>(z.real()));
    write_f32(os, static_cast<float>(z.imag()));
  }
  if (!os) throw IoError("failed writing grid");
}

void write_grid(std::ostream& os, const RealGrid& grid) {
  write_header(os, grid.shape(), DType::float32);
  for (double v : grid.values()) write_f32(os, static_cast<float>(v));
  if (!os) throw IoError("failed writing grid");
}

ComplexGrid read_complex_grid(std::istream& is) {
  const auto h = read_header(is);
  if (h.dtype != DType::complex64) throw IoError("expected a complex grid, found real");
  ComplexGrid grid(h.shape);
  for (auto& z : grid.values()) {
    const float re = read_f32(is);
    const float im = read_f32(is);
    check_finite(re);
    check_finite(im);
    z = {re, im};
  }
  return grid;
}

RealGrid read_real_grid(std::istream& is) {
  const auto h = read_header(is);
  if (h.dtype != DType::float32) throw IoError("expected a real grid, found complex");
  RealGrid grid(h.shape);
  for (auto& v : grid.values()) {
    const float f = read_f32(is);
    check_finite(f);
    v = f;
  }
  return grid;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  return is;
}

}  // namespace

void save_grid(const std::string& path, const ComplexGrid& grid) {
  auto os = open_out(path);
  write_grid(os, grid);
}

void save_grid(const std::string& path, const RealGrid& grid) {
  auto os = open_out(path);
  write_grid(os, grid);
}

ComplexGrid load_complex_grid(const std::string& path) {
  auto is = open_in(path);
  return read_complex_grid(is);
}

RealGrid load_real_grid(const std::string& path) {
  auto is = open_in(path);
  return read_real_grid(is);
}

DType grid_dtype(const std::string& path) {
  auto is = open_in(path);
  return read_header(is).dtype;
}

}  // namespace mlcs::io
