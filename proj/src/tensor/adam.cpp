#include "lfp/tensor/adam.hpp"

#include <cmath>

namespace lfp {

template <typename T>
void adam_step(std::span<Tensor<T>* const> params, std::span<const Tensor<T>> grads, double lr, AdamState<T>& state) {
  if (params.size() != grads.size()) {
    throw DimensionError("adam_step: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!(params[p]->shape() == grads[p].shape())) {
      throw DimensionError("adam_step: gradient " + std::to_string(p) + " has shape " + grads[p].shape().str() +
                           ", parameter has " + params[p]->shape().str());
    }
    for (const T g : grads[p].values()) {
      if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient in parameter " + std::to_string(p));
    }
  }
  if (state.first_moment.empty()) {
    for (auto* param : params) {
      state.first_moment.emplace_back(param->size(), T(0));
      state.second_moment.emplace_back(param->size(), T(0));
    }
  } else if (state.first_moment.size() != params.size()) {
    throw DimensionError("adam_step: optimizer state tracks a different parameter set");
  }

  ++state.step;
  const double correction1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(state.beta1);
  const T b2 = static_cast<T>(state.beta2);
  const T step_size = static_cast<T>(lr / correction1);
  const T inv_sqrt_c2 = static_cast<T>(1.0 / std::sqrt(correction2));
  const T eps = static_cast<T>(state.epsilon);

  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& m = state.first_moment[p];
    auto& v = state.second_moment[p];
    if (m.size() != params[p]->size()) throw DimensionError("adam_step: moment size mismatch");
    T* theta = params[p]->data();
    const T* g = grads[p].data();
    for (std::size_t i = 0; i < m.size(); ++i) {
      m[i] = b1 * m[i] + (T(1) - b1) * g[i];
      v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
      theta[i] -= step_size * m[i] / (std::sqrt(v[i]) * inv_sqrt_c2 + eps);
    }
  }
}

template void adam_step(std::span<Tensor<float>* const>, std::span<const Tensor<float>>, double, AdamState<float>&);
template void adam_step(std::span<Tensor<double>* const>, std::span<const Tensor<double>>, double,
                        AdamState<double>&);

}  // namespace lfp
