#include "mlcs/grid.hpp"

#include <cmath>

namespace mlcs {

std::string to_string(Shape shape) {
  return std::to_string(shape.n_azimuth) + "x" + std::to_string(shape.n_range);
}

LookStack::LookStack(std::size_t look_count, Shape look_shape) {
  if (look_count == 0) throw ShapeError("look stack needs at least one look");
  looks_.assign(look_count, ComplexGrid(look_shape));
}

LookStack::LookStack(std::vector<ComplexGrid> looks) : looks_(std::move(looks)) {
  if (looks_.empty()) throw ShapeError("look stack needs at least one look");
  for (const auto& g : looks_) {
    if (g.shape() != looks_.front().shape()) {
      throw ShapeError("looks differ in shape: " + to_string(g.shape()) + " vs " +
                       to_string(looks_.front().shape()));
    }
  }
}

std::vector<cplx> LookStack::flatten() const {
  std::vector<cplx> flat;
  flat.reserve(size());
  for (const auto& g : looks_) flat.insert(flat.end(), g.storage().begin(), g.storage().end());
  return flat;
}

LookStack LookStack::unflatten(std::span<const cplx> flat, std::size_t look_count,
                               Shape look_shape) {
  if (flat.size() != look_count * look_shape.size()) {
    throw ShapeError("flat look vector has length " + std::to_string(flat.size()) +
                     ", expected " + std::to_string(look_count * look_shape.size()));
  }
  std::vector<ComplexGrid> looks;
  looks.reserve(look_count);
  for (std::size_t i = 0; i < look_count; ++i) {
    auto first = flat.begin() + static_cast<std::ptrdiff_t>(i * look_shape.size());
    looks.emplace_back(look_shape,
                       std::vector<cplx>(first, first + static_cast<std::ptrdiff_t>(look_shape.size())));
  }
  return LookStack(std::move(looks));
}

cplx inner_product(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) {
    throw ShapeError("inner product of vectors with lengths " + std::to_string(a.size()) +
                     " and " + std::to_string(b.size()));
  }
  cplx acc{};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

cplx inner_product(const ComplexGrid& a, const ComplexGrid& b) {
  require_same_shape(a, b, "inner_product");
  return inner_product(a.values(), b.values());
}

cplx inner_product(const LookStack& a, const LookStack& b) {
  require_same_shape(a, b, "inner_product");
  cplx acc{};
  for (std::size_t i = 0; i < a.look_count(); ++i) acc += inner_product(a[i], b[i]);
  return acc;
}

double squared_norm(std::span<const cplx> v) {
  double acc = 0.0;
  for (const auto& z : v) acc += std::norm(z);
  return acc;
}

double squared_norm(const ComplexGrid& g) { return squared_norm(g.values()); }

double squared_norm(const LookStack& x) {
  double acc = 0.0;
  for (const auto& g : x.looks()) acc += squared_norm(g);
  return acc;
}

double norm(const ComplexGrid& g) { return std::sqrt(squared_norm(g)); }
double norm(const LookStack& x) { return std::sqrt(squared_norm(x)); }

bool all_finite(std::span<const cplx> v) {
  for (const auto& z : v) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

void require_same_shape(const ComplexGrid& a, const ComplexGrid& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
}

void require_same_shape(const LookStack& a, const LookStack& b, const char* what) {
  if (a.look_count() != b.look_count() || a.look_shape() != b.look_shape()) {
    throw ShapeError(std::string(what) + ": look stacks differ (" +
                     std::to_string(a.look_count()) + " x " + to_string(a.look_shape()) + " vs " +
                     std::to_string(b.look_count()) + " x " + to_string(b.look_shape()) + ")");
  }
}

}  // namespace mlcs
