#pragma once

#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mlcs/grid.hpp"
#include "mlcs/random.hpp"

namespace mlcs::test {

inline ComplexGrid random_grid(Shape shape, std::uint64_t seed) {
  ComplexGrid g(shape);
  const CounterRng rng(Seed{seed}, 99);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const auto [a, b] = rng.normal_pair(j);
    g[j] = {a, b};
  }
  return g;
}

inline LookStack random_stack(std::size_t looks, Shape shape, std::uint64_t seed) {
  LookStack x(looks, shape);
  for (std::size_t i = 0; i < looks; ++i) x[i] = random_grid(shape, seed * 131 + i);
  return x;
}

inline std::vector<cplx> random_vector(std::size_t n, std::uint64_t seed) {
  std::vector<cplx> v(n);
  const CounterRng rng(Seed{seed}, 98);
  for (std::size_t j = 0; j < n; ++j) {
    const auto [a, b] = rng.normal_pair(j);
    v[j] = {a, b};
  }
  return v;
}

inline double rel_diff(std::span<const cplx> a, std::span<const cplx> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    num += std::norm(a[j] - b[j]);
    den += std::norm(b[j]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double rel_diff(const ComplexGrid& a, const ComplexGrid& b) { return rel_diff(a.values(), b.values()); }

inline double rel_diff(const LookStack& a, const LookStack& b) {
  const auto fa = a.flatten();
  const auto fb = b.flatten();
  return rel_diff(fa, fb);
}

inline double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

/// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::current_path() / "scratch" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace mlcs::test
