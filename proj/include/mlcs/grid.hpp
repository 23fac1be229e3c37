#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mlcs/error.hpp"

namespace mlcs {

using cplx = std::complex<double>;

/// Grid extent. Every 2D array in the library is (azimuth, range), azimuth-major.
struct Shape {
  std::size_t n_azimuth = 0;
  std::size_t n_range = 0;

  std::size_t size() const { return n_azimuth * n_range; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(Shape shape);

/// Dense row-major 2D array with azimuth rows and range columns.
template <typename T>
class Grid {
 public:
  Grid() = default;
  explicit Grid(Shape shape) : shape_(shape), data_(shape.size()) {}
  Grid(Shape shape, T fill) : shape_(shape), data_(shape.size(), fill) {}
  Grid(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.size()) {
      throw ShapeError("grid data length " + std::to_string(data_.size()) +
                       " does not match shape " + to_string(shape_));
    }
  }

  Shape shape() const { return shape_; }
  std::size_t n_azimuth() const { return shape_.n_azimuth; }
  std::size_t n_range() const { return shape_.n_range; }
  std::size_t size() const { return data_.size(); }

  T& operator()(std::size_t az, std::size_t rg) { return data_[az * shape_.n_range + rg]; }
  const T& operator()(std::size_t az, std::size_t rg) const {
    return data_[az * shape_.n_range + rg];
  }
  T& operator[](std::size_t flat) { return data_[flat]; }
  const T& operator[](std::size_t flat) const { return data_[flat]; }

  std::span<T> row(std::size_t az) { return {data_.data() + az * shape_.n_range, shape_.n_range}; }
  std::span<const T> row(std::size_t az) const {
    return {data_.data() + az * shape_.n_range, shape_.n_range};
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

 private:
  Shape shape_{};
  std::vector<T> data_;
};

using ComplexGrid = Grid<cplx>;
using RealGrid = Grid<double>;

/// Root-sum-square multilook intensity image (nonnegative).
using MultilookImage = RealGrid;

/// L complex subimages of identical shape, one per nonoverlapping Doppler subband.
class LookStack {
 public:
  LookStack() = default;
  LookStack(std::size_t look_count, Shape look_shape);
  explicit LookStack(std::vector<ComplexGrid> looks);

  std::size_t look_count() const { return looks_.size(); }
  Shape look_shape() const { return looks_.empty() ? Shape{} : looks_.front().shape(); }
  std::size_t pixel_count() const { return look_shape().size(); }
  std::size_t size() const { return look_count() * pixel_count(); }

  ComplexGrid& operator[](std::size_t i) { return looks_[i]; }
  const ComplexGrid& operator[](std::size_t i) const { return looks_[i]; }
  std::vector<ComplexGrid>& looks() { return looks_; }
  const std::vector<ComplexGrid>& looks() const { return looks_; }

  /// Look-major flattening: look 0 pixels, then look 1, ...
  std::vector<cplx> flatten() const;
  static LookStack unflatten(std::span<const cplx> flat, std::size_t look_count, Shape look_shape);

 private:
  std::vector<ComplexGrid> looks_;
};

/// Sum of conj(a_i) * b_i.
cplx inner_product(const ComplexGrid& a, const ComplexGrid& b);
cplx inner_product(const LookStack& a, const LookStack& b);
cplx inner_product(std::span<const cplx> a, std::span<const cplx> b);

double squared_norm(std::span<const cplx> v);
double squared_norm(const ComplexGrid& g);
double squared_norm(const LookStack& x);
double norm(const ComplexGrid& g);
double norm(const LookStack& x);

bool all_finite(std::span<const cplx> v);

void require_same_shape(const ComplexGrid& a, const ComplexGrid& b, const char* what);
void require_same_shape(const LookStack& a, const LookStack& b, const char* what);

}  // namespace mlcs
