#include "lfp/nets/params.hpp"

#include <cmath>

namespace lfp {

std::vector<Tensor<float>> BoundParams::gradients() const {
  std::vector<Tensor<float>> out;
  out.reserve(vars.size());
  for (const auto& v : vars) out.push_back(v.grad_or_zeros());
  return out;
}

BoundParams bind_parameters(std::span<const Tensor<float>* const> params, bool trainable) {
  BoundParams bound;
  bound.vars.reserve(params.size());
  for (const auto* p : params) {
    bound.vars.push_back(trainable ? Var<float>::parameter_view(*p) : Var<float>::constant_view(*p));
  }
  return bound;
}

ConvParams<float> init_conv(int in_channels, int out_channels, int kernel, int padding, Rng& rng) {
  ConvParams<float> conv;
  conv.weights = Tensor<float>({out_channels, in_channels, kernel, kernel});
  conv.bias = Tensor<float>({out_channels, 1, 1, 1});
  conv.stride = 1;
  conv.padding = padding;
  const double bound = std::sqrt(6.0 / (static_cast<double>(in_channels) * kernel * kernel));
  for (auto& w : conv.weights.values()) w = static_cast<float>(rng.uniform(-bound, bound));
  return conv;
}

Var<float> conv_at(const BoundParams& params, std::size_t index, const Var<float>& x, int stride, int padding) {
  return ag::conv2d(x, params[index], params[index + 1], stride, padding);
}

}  // namespace lfp
