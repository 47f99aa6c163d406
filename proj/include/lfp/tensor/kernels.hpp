#pragma once

#include <span>
#include <vector>

#include "lfp/tensor/tensor.hpp"

namespace lfp {

enum class ActivationKind { relu, leaky_relu, tanh, sigmoid };

struct Activation {
  ActivationKind kind = ActivationKind::relu;
  double slope = 0.0;  // leaky_relu only

  static Activation relu() { return {ActivationKind::relu, 0.0}; }
  static Activation leaky_relu(double slope) { return {ActivationKind::leaky_relu, slope}; }
  static Activation tanh() { return {ActivationKind::tanh, 0.0}; }
  static Activation sigmoid() { return {ActivationKind::sigmoid, 0.0}; }
};

// Clamp applied to predictions before taking logarithms in the BCE loss.
inline constexpr double kBceEpsilon = 1e-7;

// Forward and backward kernels. Backward kernels accumulate (+=) into the
// gradient buffers they are given and skip null outputs. Reductions run in a
// fixed order, so repeated calls are bit-identical.
namespace kernels {

Shape conv2d_output_shape(const Shape& input, const Shape& weights, int stride, int padding);

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride, int padding);

template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, int stride, int padding,
                     Tensor<T>* dx, Tensor<T>* dw, Tensor<T>* db);

// x is (B, ...) with n = c*h*w features per batch item; output (B, m, 1, 1).
template <typename T>
Tensor<T> linear_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);

template <typename T>
void linear_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>* dx, Tensor<T>* dw,
                     Tensor<T>* db);

template <typename T>
Tensor<T> activation_forward(const Tensor<T>& x, Activation act);

template <typename T>
void activation_backward(const Tensor<T>& x, const Tensor<T>& y, const Tensor<T>& dy, Activation act, Tensor<T>& dx);

Shape avg_pool2d_output_shape(const Shape& input, int k, int stride);

template <typename T>
Tensor<T> avg_pool2d_forward(const Tensor<T>& x, int k, int stride);

template <typename T>
void avg_pool2d_backward(const Tensor<T>& dy, int k, int stride, Tensor<T>& dx);

template <typename T>
double mse_value(const Tensor<T>& pred, const Tensor<T>& target);

// d/dpred and d/dtarget of upstream * mse(pred, target).
template <typename T>
void mse_backward(const Tensor<T>& pred, const Tensor<T>& target, double upstream, Tensor<T>* dpred,
                  Tensor<T>* dtarget);

// Mean BCE of every element of pred against one label.
template <typename T>
double bce_value(const Tensor<T>& pred, double label);

template <typename T>
void bce_backward(const Tensor<T>& pred, double label, double upstream, Tensor<T>& dpred);

}  // namespace kernels

// Pure operations on plain tensors.

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const ConvParams<T>& params) {
  return kernels::conv2d_forward(input, params.weights, params.bias, params.stride, params.padding);
}

template <typename T>
std::vector<T> linear(std::span<const T> input, const LinearParams<T>& params);

template <typename T>
Tensor<T> activation(const Tensor<T>& input, Activation act) {
  return kernels::activation_forward(input, act);
}

template <typename T>
Tensor<T> avg_pool2d(const Tensor<T>& input, int k = 2, int stride = 2) {
  return kernels::avg_pool2d_forward(input, k, stride);
}

template <typename T>
double mse_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  return kernels::mse_value(pred, target);
}

// -y log x - (1 - y) log(1 - x) with x clamped to [eps, 1 - eps].
double bce_loss(double pred, double label);

}  // namespace lfp
