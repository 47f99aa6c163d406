#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lfp/core/rng.hpp"
#include "lfp/tensor/autograd.hpp"

namespace lfp {

// Parameters of one network attached to a graph, in declaration order.
struct BoundParams {
  std::vector<Var<float>> vars;

  const Var<float>& operator[](std::size_t i) const { return vars[i]; }
  // Gradient per parameter after backward; zeros where none arrived.
  std::vector<Tensor<float>> gradients() const;
};

BoundParams bind_parameters(std::span<const Tensor<float>* const> params, bool trainable);

// Kaiming-style uniform weights in +-sqrt(6 / fan_in), zero bias.
ConvParams<float> init_conv(int in_channels, int out_channels, int kernel, int padding, Rng& rng);

// Graph convolution reading weights/bias at params[index], params[index + 1].
Var<float> conv_at(const BoundParams& params, std::size_t index, const Var<float>& x, int stride, int padding);

}  // namespace lfp
