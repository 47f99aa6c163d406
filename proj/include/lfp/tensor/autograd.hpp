#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "lfp/tensor/kernels.hpp"

namespace lfp {

// Reverse-mode differentiation over the op set in kernels.hpp.
//
// A Var is a handle to a graph node. Nodes built only from non-trainable
// inputs keep no history, so inference through the same code path frees
// intermediate activations as soon as they go out of scope. A graph is owned
// by one thread; parameter views let many graphs share read-only weights.
template <typename T>
class Var {
 public:
  struct Node {
    Tensor<T> owned;
    const Tensor<T>* view = nullptr;
    std::optional<Tensor<T>> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> inputs;
    std::function<void(Node&)> backward;

    const Tensor<T>& value() const { return view ? *view : owned; }
    Tensor<T>& grad_buffer() {
      if (!grad) grad.emplace(value().shape());
      return *grad;
    }
  };

  Var() = default;

  static Var constant(Tensor<T> value) { return make_leaf(std::move(value), nullptr, false); }
  static Var parameter(Tensor<T> value) { return make_leaf(std::move(value), nullptr, true); }
  // Views reference external storage that must outlive the graph.
  static Var constant_view(const Tensor<T>& value) { return make_leaf({}, &value, false); }
  static Var parameter_view(const Tensor<T>& value) { return make_leaf({}, &value, true); }

  static Var from_op(Tensor<T> value, std::initializer_list<Var> inputs, std::function<void(Node&)> backward) {
    return from_op(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward));
  }
  static Var from_op(Tensor<T> value, std::span<const Var> inputs, std::function<void(Node&)> backward) {
    Var out;
    out.node_ = std::make_shared<Node>();
    out.node_->owned = std::move(value);
    for (const auto& in : inputs) out.node_->requires_grad = out.node_->requires_grad || in.requires_grad();
    if (out.node_->requires_grad) {
      for (const auto& in : inputs) out.node_->inputs.push_back(in.node_);
      out.node_->backward = std::move(backward);
    }
    return out;
  }

  bool valid() const { return static_cast<bool>(node_); }
  const Tensor<T>& value() const { return node_->value(); }
  const Shape& shape() const { return node_->value().shape(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  // Null until a backward pass reaches this node.
  const Tensor<T>* grad() const { return node_->grad ? &*node_->grad : nullptr; }
  Tensor<T> grad_or_zeros() const { return node_->grad ? *node_->grad : Tensor<T>(value().shape()); }

  Node& node() const { return *node_; }

 private:
  static Var make_leaf(Tensor<T> value, const Tensor<T>* view, bool trainable) {
    Var v;
    v.node_ = std::make_shared<Node>();
    v.node_->owned = std::move(value);
    v.node_->view = view;
    v.node_->requires_grad = trainable;
    return v;
  }

  std::shared_ptr<Node> node_;
};

// Populates grad buffers of every trainable node reachable from `root`.
// The root must hold exactly one element.
template <typename T>
void backward(const Var<T>& root);

namespace ag {

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, int stride, int padding);
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& b);
template <typename T>
Var<T> activation(const Var<T>& x, Activation act);
template <typename T>
Var<T> avg_pool2d(const Var<T>& x, int k, int stride);
template <typename T>
Var<T> mse_loss(const Var<T>& pred, const Var<T>& target);
template <typename T>
Var<T> bce_loss(const Var<T>& pred, double label);
template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> scale(const Var<T>& a, double factor);
// Stacks inputs along the channel axis; all other extents must agree.
template <typename T>
Var<T> concat_channels(std::span<const Var<T>> parts);
// lambda_ms * mse - lambda_adv * log(disc), disc clamped like the BCE loss.
template <typename T>
Var<T> combined_loss(const Var<T>& mse, const Var<T>& disc, double lambda_ms, double lambda_adv);
template <typename T>
Var<T> detach(const Var<T>& x) {
  return Var<T>::constant(x.value());
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  return activation(x, Activation::relu());
}
template <typename T>
Var<T> leaky_relu(const Var<T>& x, double slope) {
  return activation(x, Activation::leaky_relu(slope));
}
template <typename T>
Var<T> tanh(const Var<T>& x) {
  return activation(x, Activation::tanh());
}
template <typename T>
Var<T> sigmoid(const Var<T>& x) {
  return activation(x, Activation::sigmoid());
}

}  // namespace ag

}  // namespace lfp
