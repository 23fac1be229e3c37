#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "mlcs/grid.hpp"

namespace mlcs::io {

// Binary grid layout (all little-endian):
//   "MLCS" | version u32 | n_azimuth u32 | n_range u32 | dtype u32 | payload
// dtype 1: interleaved (re, im) f32 complex samples
// dtype 2: f32 real samples
inline constexpr std::uint32_t kGridVersion = 1;
enum class DType : std::uint32_t { complex64 = 1, float32 = 2 };

void write_grid(std::ostream& os, const ComplexGrid& grid);
void write_grid(std::ostream& os, const RealGrid& grid);
ComplexGrid read_complex_grid(std::istream& is);
RealGrid read_real_grid(std::istream& is);

void save_grid(const std::string& path, const ComplexGrid& grid);
void save_grid(const std::string& path, const RealGrid& grid);
ComplexGrid load_complex_grid(const std::string& path);
RealGrid load_real_grid(const std::string& path);

/// Peeks at a file's dtype tag.
DType grid_dtype(const std::string& path);

// Little-endian primitives shared with other file formats.
void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_f32(std::ostream& os, float v);
std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
float read_f32(std::istream& is);

}  // namespace mlcs::io
