#include "lfp/tensor/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace lfp {

namespace {

template <typename T>
using NodePtr = std::shared_ptr<typename Var<T>::Node>;

template <typename T>
Tensor<T>* grad_if_needed(typename Var<T>::Node& node) {
  return node.requires_grad ? &node.grad_buffer() : nullptr;
}

}  // namespace

template <typename T>
void backward(const Var<T>& root) {
  if (!root.valid()) throw UsageError("backward on an empty variable");
  if (root.value().size() != 1) {
    throw UsageError("backward needs a scalar root, got shape " + root.shape().str());
  }
  if (!root.requires_grad()) return;

  // Iterative post-order DFS gives a topological order (inputs before users).
  using Node = typename Var<T>::Node;
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{&root.node(), 0}};
  visited.insert(&root.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root.node().grad_buffer()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward && node->grad) node->backward(*node);
  }
}

namespace ag {

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, int stride, int padding) {
  Tensor<T> y = kernels::conv2d_forward(x.value(), w.value(), b.value(), stride, padding);
  return Var<T>::from_op(std::move(y), {x, w, b}, [stride, padding](typename Var<T>::Node& self) {
    auto& in = *self.inputs[0];
    auto& wn = *self.inputs[1];
    auto& bn = *self.inputs[2];
    kernels::conv2d_backward(in.value(), wn.value(), *self.grad, stride, padding, grad_if_needed<T>(in),
                             grad_if_needed<T>(wn), grad_if_needed<T>(bn));
  });
}

template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
  Tensor<T> y = kernels::linear_forward(x.value(), w.value(), b.value());
  return Var<T>::from_op(std::move(y), {x, w, b}, [](typename Var<T>::Node& self) {
    auto& in = *self.inputs[0];
    auto& wn = *self.inputs[1];
    auto& bn = *self.inputs[2];
    kernels::linear_backward(in.value(), wn.value(), *self.grad, grad_if_needed<T>(in), grad_if_needed<T>(wn),
                             grad_if_needed<T>(bn));
  });
}

template <typename T>
Var<T> activation(const Var<T>& x, Activation act) {
  Tensor<T> y = kernels::activation_forward(x.value(), act);
  return Var<T>::from_op(std::move(y), {x}, [act](typename Var<T>::Node& self) {
    auto& in = *self.inputs[0];
    kernels::activation_backward(in.value(), self.value(), *self.grad, act, in.grad_buffer());
  });
}

template <typename T>
Var<T> avg_pool2d(const Var<T>& x, int k, int stride) {
  Tensor<T> y = kernels::avg_pool2d_forward(x.value(), k, stride);
  return Var<T>::from_op(std::move(y), {x}, [k, stride](typename Var<T>::Node& self) {
    kernels::avg_pool2d_backward(*self.grad, k, stride, self.inputs[0]->grad_buffer());
  });
}

template <typename T>
Var<T> mse_loss(const Var<T>& pred, const Var<T>& target) {
  Tensor<T> loss({1, 1, 1, 1}, static_cast<T>(kernels::mse_value(pred.value(), target.value())));
  return Var<T>::from_op(std::move(loss), {pred, target}, [](typename Var<T>::Node& self) {
    auto& p = *self.inputs[0];
    auto& t = *self.inputs[1];
    kernels::mse_backward(p.value(), t.value(), static_cast<double>((*self.grad)[0]), grad_if_needed<T>(p),
                          grad_if_needed<T>(t));
  });
}

template <typename T>
Var<T> bce_loss(const Var<T>& pred, double label) {
  Tensor<T> loss({1, 1, 1, 1}, static_cast<T>(kernels::bce_value(pred.value(), label)));
  return Var<T>::from_op(std::move(loss), {pred}, [label](typename Var<T>::Node& self) {
    auto& p = *self.inputs[0];
    kernels::bce_backward(p.value(), label, static_cast<double>((*self.grad)[0]), p.grad_buffer());
  });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  if (!(a.shape() == b.shape())) throw DimensionError("add: shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  Tensor<T> y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b.value()[i];
  return Var<T>::from_op(std::move(y), {a, b}, [](typename Var<T>::Node& self) {
    for (auto& in : self.inputs) {
      if (!in->requires_grad) continue;
      auto& g = in->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += (*self.grad)[i];
    }
  });
}

template <typename T>
Var<T> scale(const Var<T>& a, double factor) {
  const T f = static_cast<T>(factor);
  Tensor<T> y = a.value();
  for (auto& v : y.values()) v *= f;
  return Var<T>::from_op(std::move(y), {a}, [f](typename Var<T>::Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += f * (*self.grad)[i];
  });
}

template <typename T>
Var<T> concat_channels(std::span<const Var<T>> parts) {
  if (parts.empty()) throw DimensionError("concat_channels of nothing");
  Shape out = parts.front().shape();
  out.c = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (s.n != out.n || s.h != out.h || s.w != out.w) {
      throw DimensionError("concat_channels: incompatible shape " + s.str());
    }
    out.c += s.c;
  }
  Tensor<T> y(out);
  std::vector<int> channel_offset;
  int c0 = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    for (int n = 0; n < s.n; ++n) {
      const T* src = p.value().data() + p.value().offset(n, 0, 0, 0);
      std::copy(src, src + static_cast<std::size_t>(s.c) * s.h * s.w, y.data() + y.offset(n, c0, 0, 0));
    }
    channel_offset.push_back(c0);
    c0 += s.c;
  }
  return Var<T>::from_op(std::move(y), parts, [channel_offset](typename Var<T>::Node& self) {
    const Tensor<T>& g = *self.grad;
    for (std::size_t k = 0; k < self.inputs.size(); ++k) {
      auto& in = *self.inputs[k];
      if (!in.requires_grad) continue;
      auto& dst = in.grad_buffer();
      const Shape& s = dst.shape();
      const std::size_t plane = static_cast<std::size_t>(s.c) * s.h * s.w;
      for (int n = 0; n < s.n; ++n) {
        const T* src = g.data() + g.offset(n, channel_offset[k], 0, 0);
        T* out = dst.data() + dst.offset(n, 0, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) out[i] += src[i];
      }
    }
  });
}

template <typename T>
Var<T> combined_loss(const Var<T>& mse, const Var<T>& disc, double lambda_ms, double lambda_adv) {
  if (mse.value().size() != 1) throw DimensionError("combined_loss expects a scalar mse");
  const double adv = kernels::bce_value(disc.value(), 1.0);
  Tensor<T> loss({1, 1, 1, 1}, static_cast<T>(lambda_ms * static_cast<double>(mse.value()[0]) + lambda_adv * adv));
  return Var<T>::from_op(std::move(loss), {mse, disc}, [lambda_ms, lambda_adv](typename Var<T>::Node& self) {
    const double g = static_cast<double>((*self.grad)[0]);
    auto& m = *self.inputs[0];
    auto& d = *self.inputs[1];
    if (m.requires_grad) m.grad_buffer()[0] += static_cast<T>(lambda_ms * g);
    if (d.requires_grad) kernels::bce_backward(d.value(), 1.0, lambda_adv * g, d.grad_buffer());
  });
}

#define LFP_INSTANTIATE_AG(T)                                                                \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, const Var<T>&, int, int);             \
  template Var<T> linear(const Var<T>&, const Var<T>&, const Var<T>&);                       \
  template Var<T> activation(const Var<T>&, Activation);                                     \
  template Var<T> avg_pool2d(const Var<T>&, int, int);                                       \
  template Var<T> mse_loss(const Var<T>&, const Var<T>&);                                    \
  template Var<T> bce_loss(const Var<T>&, double);                                           \
  template Var<T> add(const Var<T>&, const Var<T>&);                                         \
  template Var<T> scale(const Var<T>&, double);                                              \
  template Var<T> concat_channels(std::span<const Var<T>>);                                  \
  template Var<T> combined_loss(const Var<T>&, const Var<T>&, double, double);

LFP_INSTANTIATE_AG(float)
LFP_INSTANTIATE_AG(double)

#undef LFP_INSTANTIATE_AG

}  // namespace ag

template void backward(const Var<float>&);
template void backward(const Var<double>&);

}  // namespace lfp
