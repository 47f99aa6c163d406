#pragma once

#include <cstdint>
#include <vector>

#include "lfp/nets/params.hpp"

namespace lfp {

// Three unpadded k x k convs with 2x2 average pooling after the first two;
// leaky ReLU between layers and a sigmoid at the end. There are no fully
// connected layers, so only one input size reduces to a single output.
struct DiscriminatorConfig {
  int input_frames = 9;
  int patch_size = 48;
  int kernel = 7;
  int hidden1 = 64;
  int hidden2 = 128;
  double leaky_slope = 0.2;

  static DiscriminatorConfig full() { return {}; }
  static DiscriminatorConfig desk() { return {9, 48, 7, 8, 16, 0.2}; }

  // Spatial extent after each stage: input, conv, pool, conv, pool, conv.
  // Non-positive entries mean the plan does not fit.
  std::vector<int> spatial_trace() const;
  // Throws ConfigError unless the trace ends at exactly 1.
  void validate() const;
  bool operator==(const DiscriminatorConfig&) const = default;
};

struct Discriminator {
  DiscriminatorConfig config;
  ConvParams<float> conv1;
  ConvParams<float> conv2;
  ConvParams<float> conv3;

  std::vector<Tensor<float>*> parameters();
  std::vector<const Tensor<float>*> parameters() const;
  std::size_t parameter_count() const;
};

Discriminator build_discriminator(const DiscriminatorConfig& config, std::uint64_t seed);

// sequence: (B, 9, 48, 48) in [-1, 1]; result (B, 1, 1, 1) in (0, 1).
Var<float> discriminator_graph(const Discriminator& d, const BoundParams& params, const Var<float>& sequence);
// Single-sequence convenience; returns the probability of "real".
float discriminator_forward(const Discriminator& d, const Tensor<float>& sequence);

}  // namespace lfp
