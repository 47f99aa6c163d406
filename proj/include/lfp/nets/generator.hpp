#pragma once

#include <cstdint>
#include <vector>

#include "lfp/data/frame.hpp"
#include "lfp/nets/params.hpp"

namespace lfp {

struct GeneratorConfig {
  int input_frames = 8;
  int channels = 256;
  int residual_blocks = 32;
  int kernel = 3;
  double residual_scale = 0.1;

  // Full-size network: 8 input frames, 32 blocks of 256 channels.
  static GeneratorConfig full() { return {}; }
  // Small instance of the same plan for CPU-scale runs.
  static GeneratorConfig desk() { return {4, 16, 4, 3, 0.1}; }

  // Throws ConfigError.
  void validate() const;
  bool operator==(const GeneratorConfig&) const = default;
};

struct ResidualBlock {
  ConvParams<float> first;
  ConvParams<float> second;
};

// Modified EDSR: head conv (N -> C), residual blocks (conv, ReLU, conv, scale,
// add), a global skip from the head output, then a tail conv (C -> 1) and tanh.
// Every conv has stride 1 and padding (k - 1) / 2, so H and W are preserved.
struct Generator {
  GeneratorConfig config;
  ConvParams<float> head;
  std::vector<ResidualBlock> blocks;
  ConvParams<float> tail;

  // Declaration order: head w/b, per block first w/b then second w/b, tail w/b.
  std::vector<Tensor<float>*> parameters();
  std::vector<const Tensor<float>*> parameters() const;
  std::size_t parameter_count() const;
};

// Closed-form scalar parameter count of the layer plan.
std::size_t generator_parameter_count(const GeneratorConfig& config);

Generator build_generator(const GeneratorConfig& config, std::uint64_t seed);

// frames: (B, N, H, W) in [-1, 1]; result (B, 1, H, W) in [-1, 1].
Var<float> generator_graph(const Generator& g, const BoundParams& params, const Var<float>& frames);
Tensor<float> generator_forward(const Generator& g, const Tensor<float>& frames);

// round((x + 1) * 127.5) half away from zero, clamped to [0, 255].
std::uint8_t to_uint8_pixel(float x);
// x: (1, 1, H, W)
Frame to_uint8_frame(const Tensor<float>& x);

}  // namespace lfp
