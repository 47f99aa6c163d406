#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lfp/tensor/tensor.hpp"

namespace lfp {

template <typename T>
struct AdamState {
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;
};

// One bias-corrected Adam update of `params` in place. Moments are created on
// the first call. A non-finite gradient rejects the whole step with
// NumericError and leaves params and state untouched.
template <typename T>
void adam_step(std::span<Tensor<T>* const> params, std::span<const Tensor<T>> grads, double lr, AdamState<T>& state);

}  // namespace lfp
