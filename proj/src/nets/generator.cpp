#include "lfp/nets/generator.hpp"

#include <algorithm>
#include <cmath>

namespace lfp {

void GeneratorConfig::validate() const {
  if (input_frames < 1) throw ConfigError("generator input_frames must be positive");
  if (channels < 1) throw ConfigError("generator channels must be positive");
  if (residual_blocks < 0) throw ConfigError("generator residual_blocks must be non-negative");
  if (kernel < 1 || kernel % 2 == 0) throw ConfigError("generator kernel must be odd and positive");
  // Scale 0 is allowed so that blocks can be switched off in tests.
  if (!(residual_scale >= 0.0 && residual_scale <= 1.0)) throw ConfigError("generator residual_scale must be in [0, 1]");
}

std::vector<Tensor<float>*> Generator::parameters() {
  std::vector<Tensor<float>*> out{&head.weights, &head.bias};
  for (auto& b : blocks) {
    out.insert(out.end(), {&b.first.weights, &b.first.bias, &b.second.weights, &b.second.bias});
  }
  out.insert(out.end(), {&tail.weights, &tail.bias});
  return out;
}

std::vector<const Tensor<float>*> Generator::parameters() const {
  auto mut = const_cast<Generator*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

std::size_t Generator::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->size();
  return n;
}

std::size_t generator_parameter_count(const GeneratorConfig& c) {
  const std::size_t k2 = static_cast<std::size_t>(c.kernel) * c.kernel;
  const std::size_t ch = static_cast<std::size_t>(c.channels);
  const std::size_t head = static_cast<std::size_t>(c.input_frames) * ch * k2 + ch;
  const std::size_t block = 2 * (ch * ch * k2 + ch);
  const std::size_t tail = ch * k2 + 1;
  return head + static_cast<std::size_t>(c.residual_blocks) * block + tail;
}

Generator build_generator(const GeneratorConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const int pad = (config.kernel - 1) / 2;
  Generator g;
  g.config = config;
  g.head = init_conv(config.input_frames, config.channels, config.kernel, pad, rng);
  for (int i = 0; i < config.residual_blocks; ++i) {
    ResidualBlock block;
    block.first = init_conv(config.channels, config.channels, config.kernel, pad, rng);
    block.second = init_conv(config.channels, config.channels, config.kernel, pad, rng);
    g.blocks.push_back(std::move(block));
  }
  g.tail = init_conv(config.channels, 1, config.kernel, pad, rng);
  return g;
}

Var<float> generator_graph(const Generator& g, const BoundParams& params, const Var<float>& frames) {
  if (frames.shape().c != g.config.input_frames) {
    throw DimensionError("generator expects " + std::to_string(g.config.input_frames) + " input frames, got " +
                         std::to_string(frames.shape().c));
  }
  const int pad = (g.config.kernel - 1) / 2;
  const Var<float> head = conv_at(params, 0, frames, 1, pad);
  Var<float> x = head;
  std::size_t index = 2;
  for (std::size_t b = 0; b < g.blocks.size(); ++b, index += 4) {
    Var<float> r = ag::relu(conv_at(params, index, x, 1, pad));
    r = conv_at(params, index + 2, r, 1, pad);
    x = ag::add(x, ag::scale(r, g.config.residual_scale));
  }
  x = ag::add(x, head);
  return ag::tanh(conv_at(params, index, x, 1, pad));
}

Tensor<float> generator_forward(const Generator& g, const Tensor<float>& frames) {
  const auto params = g.parameters();
  const BoundParams bound = bind_parameters(params, false);
  return generator_graph(g, bound, Var<float>::constant_view(frames)).value();
}

std::uint8_t to_uint8_pixel(float x) {
  const double scaled = std::round((std::clamp(static_cast<double>(x), -1.0, 1.0) + 1.0) * 127.5);
  return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

Frame to_uint8_frame(const Tensor<float>& x) {
  if (x.shape().n != 1 || x.shape().c != 1) throw DimensionError("to_uint8_frame expects (1,1,H,W), got " + x.shape().str());
  Frame f(x.shape().w, x.shape().h);
  for (std::size_t i = 0; i < x.size(); ++i) f.pixels[i] = to_uint8_pixel(x[i]);
  return f;
}

}  // namespace lfp
