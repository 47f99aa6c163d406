#include "lfp/nets/discriminator.hpp"

namespace lfp {

std::vector<int> DiscriminatorConfig::spatial_trace() const {
  std::vector<int> trace{patch_size};
  int s = patch_size;
  for (int layer = 0; layer < 3; ++layer) {
    s = s - kernel + 1;
    trace.push_back(s);
    if (layer < 2) {
      s = s >= 2 ? (s - 2) / 2 + 1 : 0;
      trace.push_back(s);
    }
  }
  return trace;
}

void DiscriminatorConfig::validate() const {
  if (input_frames < 1 || hidden1 < 1 || hidden2 < 1 || kernel < 1) {
    throw ConfigError("discriminator channel counts and kernel must be positive");
  }
  const auto trace = spatial_trace();
  for (int s : trace) {
    if (s < 1) throw ConfigError("discriminator layer plan does not fit a " + std::to_string(patch_size) + " px input");
  }
  if (trace.back() != 1) {
    throw ConfigError("discriminator layer plan ends at " + std::to_string(trace.back()) + " px, not a single value");
  }
}

std::vector<Tensor<float>*> Discriminator::parameters() {
  return {&conv1.weights, &conv1.bias, &conv2.weights, &conv2.bias, &conv3.weights, &conv3.bias};
}

std::vector<const Tensor<float>*> Discriminator::parameters() const {
  auto mut = const_cast<Discriminator*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

std::size_t Discriminator::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->size();
  return n;
}

Discriminator build_discriminator(const DiscriminatorConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  Discriminator d;
  d.config = config;
  d.conv1 = init_conv(config.input_frames, config.hidden1, config.kernel, 0, rng);
  d.conv2 = init_conv(config.hidden1, config.hidden2, config.kernel, 0, rng);
  d.conv3 = init_conv(config.hidden2, 1, config.kernel, 0, rng);
  return d;
}

Var<float> discriminator_graph(const Discriminator& d, const BoundParams& params, const Var<float>& sequence) {
  const Shape& s = sequence.shape();
  if (s.c != d.config.input_frames || s.h != d.config.patch_size || s.w != d.config.patch_size) {
    throw DimensionError("discriminator expects (B," + std::to_string(d.config.input_frames) + "," +
                         std::to_string(d.config.patch_size) + "," + std::to_string(d.config.patch_size) +
                         ") input, got " + s.str());
  }
  const double slope = d.config.leaky_slope;
  Var<float> x = ag::leaky_relu(conv_at(params, 0, sequence, 1, 0), slope);
  x = ag::avg_pool2d(x, 2, 2);
  x = ag::leaky_relu(conv_at(params, 2, x, 1, 0), slope);
  x = ag::avg_pool2d(x, 2, 2);
  return ag::sigmoid(conv_at(params, 4, x, 1, 0));
}

float discriminator_forward(const Discriminator& d, const Tensor<float>& sequence) {
  const auto params = d.parameters();
  const BoundParams bound = bind_parameters(params, false);
  const Var<float> out = discriminator_graph(d, bound, Var<float>::constant_view(sequence));
  if (out.value().size() != 1) throw DimensionError("discriminator_forward takes a single sequence");
  return out.value()[0];
}

}  // namespace lfp
