#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lfp/core/error.hpp"

namespace lfp {

// (batch, channels, height, width)
struct Shape {
  int n = 1;
  int c = 1;
  int h = 1;
  int w = 1;

  std::size_t numel() const {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(c) * static_cast<std::size_t>(h) *
           static_cast<std::size_t>(w);
  }
  bool operator==(const Shape&) const = default;
  std::string str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," + std::to_string(w) + ")";
  }
};

// Dense 4-D array in NCHW row-major order.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() : shape_{0, 0, 0, 0} {}
  explicit Tensor(Shape shape, T fill = T(0)) : shape_(shape), values_(checked_numel(shape), fill) {}
  Tensor(Shape shape, std::vector<T> values) : shape_(shape), values_(std::move(values)) {
    if (values_.size() != checked_numel(shape)) {
      throw DimensionError("tensor of shape " + shape.str() + " given " + std::to_string(values_.size()) +
                           " values");
    }
  }

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  T* data() { return values_.data(); }
  const T* data() const { return values_.data(); }
  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  std::size_t offset(int n, int c, int h, int w) const {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }
  T& at(int n, int c, int h, int w) { return values_[offset(n, c, h, w)]; }
  const T& at(int n, int c, int h, int w) const { return values_[offset(n, c, h, w)]; }

  void fill(T v) { std::fill(values_.begin(), values_.end(), v); }

  // Same values under a new shape with equal element count.
  Tensor reshaped(Shape shape) const { return Tensor(shape, values_); }

  bool operator==(const Tensor&) const = default;

 private:
  static std::size_t checked_numel(const Shape& s) {
    if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0) throw DimensionError("negative extent in shape " + s.str());
    return s.numel();
  }

  Shape shape_;
  std::vector<T> values_;
};

// Weights (out, in, k, k), bias (out, 1, 1, 1).
template <typename T>
struct ConvParams {
  Tensor<T> weights;
  Tensor<T> bias;
  int stride = 1;
  int padding = 0;

  int out_channels() const { return weights.shape().n; }
  int in_channels() const { return weights.shape().c; }
  int kernel() const { return weights.shape().h; }
};

// Weights (m, n, 1, 1), bias (m, 1, 1, 1); y = Wx + b.
template <typename T>
struct LinearParams {
  Tensor<T> weights;
  Tensor<T> bias;

  int outputs() const { return weights.shape().n; }
  int inputs() const { return weights.shape().c; }
};

}  // namespace lfp
