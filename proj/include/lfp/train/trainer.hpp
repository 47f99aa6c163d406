#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "lfp/data/patches.hpp"
#include "lfp/nets/discriminator.hpp"
#include "lfp/nets/generator.hpp"

namespace lfp {

struct TrainConfigMSE {
  double lr0 = 1e-4;
  int batch = 32;
  std::int64_t steps = 0;
  std::int64_t plateau_window = 6000;
  double lr_factor = 0.5;
  int smoothing = 100;
  unsigned threads = 0;
  std::optional<std::filesystem::path> checkpoint_path;
  std::int64_t checkpoint_every = 0;  // 0: only at the end

  void validate() const;
};

struct TrainConfigGAN {
  double lambda_ms = 0.95;
  double lambda_adv = 0.05;
  int gen_batch = 16;
  int disc_batch = 32;  // half real, half generated
  double gen_lr = 1e-6;
  double disc_lr = 1e-5;
  std::int64_t steps = 0;
  unsigned threads = 0;
  std::optional<std::filesystem::path> checkpoint_path;  // generator; discriminator gets a ".disc" suffix
  std::int64_t checkpoint_every = 0;

  void validate() const;
};

struct TrainRecord {
  std::int64_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
  double wall_ms = 0.0;
};

struct LrEvent {
  std::int64_t step = 0;
  double from = 0.0;
  double to = 0.0;
};

struct TrainLog {
  std::vector<TrainRecord> records;
  std::vector<LrEvent> lr_events;
  std::vector<std::filesystem::path> checkpoints;

  // Mean loss over the `window` records ending at index `last` (inclusive).
  double smoothed(std::size_t last, std::size_t window = 100) const;
  void write_csv(const std::filesystem::path& path) const;
};

struct DiscBatchComposition {
  int real = 0;
  int generated = 0;
};

struct GanLog {
  TrainLog generator;
  TrainLog discriminator;
  std::vector<DiscBatchComposition> compositions;
};

// Generator input for one sample: the N patches right before the 9th.
Tensor<float> sample_context(const PatchSample& sample, int input_frames);
Tensor<float> sample_target(const PatchSample& sample);

// Trains on mean-square error against the 9th patch. Minibatches are drawn with
// replacement from `seed`; the learning rate is multiplied by lr_factor whenever
// the moving average over `smoothing` steps sets no new minimum for
// plateau_window steps. A non-finite loss or gradient saves the current (last
// good) parameters to checkpoint_path, if any, and throws NumericError.
TrainLog train_mse(Generator& g, std::span<const PatchSample> dataset, const TrainConfigMSE& config,
                   std::uint64_t seed);

// Alternates one discriminator step and one generator step per iteration at
// constant learning rates. The generator's minibatch stream is the one
// train_mse uses for the same seed.
GanLog train_adversarial(Generator& g, Discriminator& d, std::span<const PatchSample> dataset,
                         const TrainConfigGAN& config, std::uint64_t seed);

// Mean generator MSE on 9th patches.
double evaluate_generator_mse(const Generator& g, std::span<const PatchSample> samples, unsigned threads = 0);
// Mean BCE of the discriminator on real samples (label 1) and their generated
// counterparts (label 0).
double evaluate_discriminator_bce(const Generator& g, const Discriminator& d, std::span<const PatchSample> samples,
                                  unsigned threads = 0);

}  // namespace lfp
