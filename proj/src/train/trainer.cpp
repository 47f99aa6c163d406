#include "lfp/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "lfp/core/parallel.hpp"
#include "lfp/core/rng.hpp"
#include "lfp/nets/checkpoint.hpp"
#include "lfp/tensor/adam.hpp"

namespace lfp {

namespace {

constexpr std::uint64_t kGeneratorStream = 1;
constexpr std::uint64_t kDiscriminatorStream = 2;

class Stopwatch {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::vector<std::size_t> draw_indices(Rng& rng, std::size_t dataset_size, int count) {
  std::vector<std::size_t> out(static_cast<std::size_t>(count));
  for (auto& i : out) i = static_cast<std::size_t>(rng.below(dataset_size));
  return out;
}

struct SampleResult {
  double loss = 0.0;
  std::vector<Tensor<float>> grads;
};

// Sums per-sample gradients in sample order and divides by the count, so the
// result does not depend on how samples were spread over threads.
std::vector<Tensor<float>> mean_gradients(std::vector<SampleResult>& results) {
  std::vector<Tensor<float>> total = std::move(results.front().grads);
  for (std::size_t s = 1; s < results.size(); ++s) {
    for (std::size_t p = 0; p < total.size(); ++p) {
      auto dst = total[p].values();
      const auto src = results[s].grads[p].values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
  }
  const float inv = 1.0f / static_cast<float>(results.size());
  for (auto& t : total) {
    for (auto& v : t.values()) v *= inv;
  }
  return total;
}

double mean_loss(const std::vector<SampleResult>& results) {
  double sum = 0.0;
  for (const auto& r : results) sum += r.loss;
  return sum / static_cast<double>(results.size());
}

// The 8 patches preceding the target, as the leading channels of a
// discriminator input.
Tensor<float> context_planes(const PatchSample& sample) {
  std::vector<std::span<const std::uint8_t>> planes;
  for (int t = 0; t < kSampleFrames - 1; ++t) planes.emplace_back(sample.patch(t));
  return normalize_planes(planes, kPatchSide, kPatchSide);
}

Tensor<float> real_sequence(const PatchSample& sample) {
  std::vector<std::span<const std::uint8_t>> planes;
  for (int t = 0; t < kSampleFrames; ++t) planes.emplace_back(sample.patch(t));
  return normalize_planes(planes, kPatchSide, kPatchSide);
}

Tensor<float> generated_sequence(const Generator& g, const PatchSample& sample) {
  const Tensor<float> predicted = generator_forward(g, sample_context(sample, g.config.input_frames));
  Tensor<float> seq({1, kSampleFrames, kPatchSide, kPatchSide});
  const Tensor<float> context = context_planes(sample);
  std::copy(context.values().begin(), context.values().end(), seq.values().begin());
  std::copy(predicted.values().begin(), predicted.values().end(),
            seq.values().begin() + static_cast<std::ptrdiff_t>(context.size()));
  return seq;
}

void check_dataset(std::span<const PatchSample> dataset) {
  if (dataset.empty()) throw InputError("training dataset is empty");
}

void check_generator(const Generator& g) {
  if (g.config.input_frames > kSampleFrames - 1) {
    throw ConfigError("generator takes " + std::to_string(g.config.input_frames) + " frames but samples hold " +
                      std::to_string(kSampleFrames - 1) + " context patches");
  }
}

std::filesystem::path disc_checkpoint_path(const std::filesystem::path& gen_path) {
  return std::filesystem::path(gen_path.string() + ".disc");
}

[[noreturn]] void abort_non_finite(std::int64_t step, const std::string& what, const Generator& g,
                                   const Discriminator* d, const std::optional<std::filesystem::path>& path) {
  std::string message = "non-finite " + what + " at step " + std::to_string(step);
  if (path) {
    save_checkpoint(g, *path);
    if (d) save_checkpoint(*d, disc_checkpoint_path(*path));
    message += "; last good parameters saved to " + path->string();
  }
  throw NumericError(message);
}

class PlateauSchedule {
 public:
  explicit PlateauSchedule(const TrainConfigMSE& c) : config_(c), lr_(c.lr0) {}

  double lr() const { return lr_; }

  void observe(TrainLog& log) {
    const std::size_t n = log.records.size();
    if (n < static_cast<std::size_t>(config_.smoothing)) return;
    const double avg = log.smoothed(n - 1, static_cast<std::size_t>(config_.smoothing));
    if (avg < best_) {
      best_ = avg;
      since_best_ = 0;
      return;
    }
    if (++since_best_ >= config_.plateau_window) {
      const double next = lr_ * config_.lr_factor;
      log.lr_events.push_back({log.records.back().step, lr_, next});
      lr_ = next;
      since_best_ = 0;
    }
  }

 private:
  const TrainConfigMSE& config_;
  double lr_;
  double best_ = INFINITY;
  std::int64_t since_best_ = 0;
};

}  // namespace

void TrainConfigMSE::validate() const {
  if (!(lr0 > 0.0) || batch < 1 || steps < 0 || plateau_window < 1 || !(lr_factor > 0.0 && lr_factor <= 1.0) ||
      smoothing < 1 || checkpoint_every < 0) {
    throw ConfigError("MSE training config needs positive lr, batch, plateau window, smoothing and factor in (0, 1]");
  }
}

void TrainConfigGAN::validate() const {
  if (!(lambda_ms >= 0.0) || !(lambda_adv >= 0.0) || lambda_ms + lambda_adv <= 0.0) {
    throw ConfigError("loss weights must be non-negative and not both zero");
  }
  if (gen_batch < 1 || disc_batch < 2 || disc_batch % 2 != 0) {
    throw ConfigError("generator batch must be positive and discriminator batch even");
  }
  if (!(gen_lr > 0.0) || !(disc_lr > 0.0) || steps < 0 || checkpoint_every < 0) {
    throw ConfigError("learning rates must be positive and step counts non-negative");
  }
}

double TrainLog::smoothed(std::size_t last, std::size_t window) const {
  if (records.empty() || last >= records.size()) throw UsageError("smoothed: index out of range");
  const std::size_t first = last + 1 >= window ? last + 1 - window : 0;
  double sum = 0.0;
  for (std::size_t i = first; i <= last; ++i) sum += records[i].loss;
  return sum / static_cast<double>(last + 1 - first);
}

void TrainLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "step,loss,lr,wall_ms\n";
  char line[128];
  for (const auto& r : records) {
    std::snprintf(line, sizeof line, "%lld,%.6f,%.6g,%.3f\n", static_cast<long long>(r.step), r.loss, r.lr, r.wall_ms);
    out << line;
  }
  if (!out) throw InputError("write failed for " + path.string());
}

Tensor<float> sample_context(const PatchSample& sample, int input_frames) {
  if (input_frames < 1 || input_frames > kSampleFrames - 1) {
    throw DimensionError("context length " + std::to_string(input_frames) + " outside 1.." +
                         std::to_string(kSampleFrames - 1));
  }
  std::vector<std::span<const std::uint8_t>> planes;
  for (int t = kSampleFrames - 1 - input_frames; t < kSampleFrames - 1; ++t) planes.emplace_back(sample.patch(t));
  return normalize_planes(planes, kPatchSide, kPatchSide);
}

Tensor<float> sample_target(const PatchSample& sample) {
  const std::span<const std::uint8_t> plane = sample.patch(kSampleFrames - 1);
  return normalize_planes(std::span(&plane, 1), kPatchSide, kPatchSide);
}

TrainLog train_mse(Generator& g, std::span<const PatchSample> dataset, const TrainConfigMSE& config,
                   std::uint64_t seed) {
  config.validate();
  check_dataset(dataset);
  check_generator(g);
  Rng rng = Rng::stream(seed, kGeneratorStream);
  const std::vector<Tensor<float>*> params = g.parameters();
  const std::vector<const Tensor<float>*> cparams(params.begin(), params.end());
  AdamState<float> adam;
  PlateauSchedule schedule(config);
  TrainLog log;
  Stopwatch clock;

  for (std::int64_t step = 1; step <= config.steps; ++step) {
    const auto indices = draw_indices(rng, dataset.size(), config.batch);
    std::vector<SampleResult> results(indices.size());
    parallel_for(indices.size(), config.threads, [&](std::size_t i) {
      const PatchSample& s = dataset[indices[i]];
      const Tensor<float> context = sample_context(s, g.config.input_frames);
      const Tensor<float> target = sample_target(s);
      const BoundParams bound = bind_parameters(cparams, true);
      const Var<float> loss =
          ag::mse_loss(generator_graph(g, bound, Var<float>::constant_view(context)), Var<float>::constant_view(target));
      backward(loss);
      results[i] = {loss.value()[0], bound.gradients()};
    });
    const double loss = mean_loss(results);
    if (!std::isfinite(loss)) abort_non_finite(step, "loss", g, nullptr, config.checkpoint_path);
    const auto grads = mean_gradients(results);
    try {
      adam_step<float>(params, grads, schedule.lr(), adam);
    } catch (const NumericError&) {
      abort_non_finite(step, "gradient", g, nullptr, config.checkpoint_path);
    }
    log.records.push_back({step, loss, schedule.lr(), clock.elapsed_ms()});
    schedule.observe(log);
    if (config.checkpoint_path && config.checkpoint_every > 0 && step % config.checkpoint_every == 0) {
      save_checkpoint(g, *config.checkpoint_path);
      log.checkpoints.push_back(*config.checkpoint_path);
    }
  }
  if (config.checkpoint_path) {
    save_checkpoint(g, *config.checkpoint_path);
    log.checkpoints.push_back(*config.checkpoint_path);
  }
  return log;
}

GanLog train_adversarial(Generator& g, Discriminator& d, std::span<const PatchSample> dataset,
                         const TrainConfigGAN& config, std::uint64_t seed) {
  config.validate();
  check_dataset(dataset);
  check_generator(g);
  if (d.config.input_frames != kSampleFrames || d.config.patch_size != kPatchSide) {
    throw ConfigError("discriminator must take " + std::to_string(kSampleFrames) + " patches of " +
                      std::to_string(kPatchSide) + " px");
  }
  Rng gen_rng = Rng::stream(seed, kGeneratorStream);
  Rng disc_rng = Rng::stream(seed, kDiscriminatorStream);
  const std::vector<Tensor<float>*> gparams = g.parameters();
  const std::vector<const Tensor<float>*> gcparams(gparams.begin(), gparams.end());
  const std::vector<Tensor<float>*> dparams = d.parameters();
  const std::vector<const Tensor<float>*> dcparams(dparams.begin(), dparams.end());
  AdamState<float> gen_adam;
  AdamState<float> disc_adam;
  GanLog log;
  Stopwatch clock;
  const int half = config.disc_batch / 2;

  for (std::int64_t step = 1; step <= config.steps; ++step) {
    // Discriminator: real sequences labelled 1, generated ones labelled 0.
    const auto real_idx = draw_indices(disc_rng, dataset.size(), half);
    const auto fake_idx = draw_indices(disc_rng, dataset.size(), half);
    DiscBatchComposition composition;
    std::vector<SampleResult> disc_results(static_cast<std::size_t>(config.disc_batch));
    std::vector<char> is_real(disc_results.size());
    for (std::size_t i = 0; i < disc_results.size(); ++i) {
      is_real[i] = i < real_idx.size();
      (is_real[i] ? composition.real : composition.generated) += 1;
    }
    if (composition.real != half || composition.generated != half) {
      throw UsageError("discriminator batch is not half real, half generated");
    }
    log.compositions.push_back(composition);
    parallel_for(disc_results.size(), config.threads, [&](std::size_t i) {
      const Tensor<float> input = is_real[i] ? real_sequence(dataset[real_idx[i]])
                                             : generated_sequence(g, dataset[fake_idx[i - real_idx.size()]]);
      const BoundParams bound = bind_parameters(dcparams, true);
      const Var<float> loss =
          ag::bce_loss(discriminator_graph(d, bound, Var<float>::constant_view(input)), is_real[i] ? 1.0 : 0.0);
      backward(loss);
      disc_results[i] = {loss.value()[0], bound.gradients()};
    });
    const double disc_loss = mean_loss(disc_results);
    if (!std::isfinite(disc_loss)) abort_non_finite(step, "discriminator loss", g, &d, config.checkpoint_path);
    try {
      adam_step<float>(dparams, mean_gradients(disc_results), config.disc_lr, disc_adam);
    } catch (const NumericError&) {
      abort_non_finite(step, "discriminator gradient", g, &d, config.checkpoint_path);
    }
    log.discriminator.records.push_back({step, disc_loss, config.disc_lr, clock.elapsed_ms()});

    // Generator: MSE on the 9th patch plus the adversarial term, with the
    // discriminator's weights held fixed.
    const auto gen_idx = draw_indices(gen_rng, dataset.size(), config.gen_batch);
    std::vector<SampleResult> gen_results(gen_idx.size());
    parallel_for(gen_idx.size(), config.threads, [&](std::size_t i) {
      const PatchSample& s = dataset[gen_idx[i]];
      const Tensor<float> context = sample_context(s, g.config.input_frames);
      const Tensor<float> target = sample_target(s);
      const Tensor<float> given = context_planes(s);
      const BoundParams gbound = bind_parameters(gcparams, true);
      const BoundParams dbound = bind_parameters(dcparams, false);
      const Var<float> predicted = generator_graph(g, gbound, Var<float>::constant_view(context));
      const Var<float> mse = ag::mse_loss(predicted, Var<float>::constant_view(target));
      const std::vector<Var<float>> parts{Var<float>::constant_view(given), predicted};
      const Var<float> judged = discriminator_graph(d, dbound, ag::concat_channels<float>(parts));
      const Var<float> loss = ag::combined_loss(mse, judged, config.lambda_ms, config.lambda_adv);
      backward(loss);
      gen_results[i] = {loss.value()[0], gbound.gradients()};
    });
    const double gen_loss = mean_loss(gen_results);
    if (!std::isfinite(gen_loss)) abort_non_finite(step, "generator loss", g, &d, config.checkpoint_path);
    try {
      adam_step<float>(gparams, mean_gradients(gen_results), config.gen_lr, gen_adam);
    } catch (const NumericError&) {
      abort_non_finite(step, "generator gradient", g, &d, config.checkpoint_path);
    }
    log.generator.records.push_back({step, gen_loss, config.gen_lr, clock.elapsed_ms()});

    const bool periodic = config.checkpoint_every > 0 && step % config.checkpoint_every == 0;
    if (config.checkpoint_path && (periodic || step == config.steps)) {
      save_checkpoint(g, *config.checkpoint_path);
      save_checkpoint(d, disc_checkpoint_path(*config.checkpoint_path));
      log.generator.checkpoints.push_back(*config.checkpoint_path);
      log.discriminator.checkpoints.push_back(disc_checkpoint_path(*config.checkpoint_path));
    }
  }
  return log;
}

double evaluate_generator_mse(const Generator& g, std::span<const PatchSample> samples, unsigned threads) {
  check_dataset(samples);
  check_generator(g);
  std::vector<double> losses(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    losses[i] = mse_loss(generator_forward(g, sample_context(samples[i], g.config.input_frames)),
                         sample_target(samples[i]));
  });
  double sum = 0.0;
  for (double l : losses) sum += l;
  return sum / static_cast<double>(losses.size());
}

double evaluate_discriminator_bce(const Generator& g, const Discriminator& d, std::span<const PatchSample> samples,
                                  unsigned threads) {
  check_dataset(samples);
  check_generator(g);
  std::vector<double> losses(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    losses[i] = bce_loss(discriminator_forward(d, real_sequence(samples[i])), 1.0) +
                bce_loss(discriminator_forward(d, generated_sequence(g, samples[i])), 0.0);
  });
  double sum = 0.0;
  for (double l : losses) sum += l;
  return sum / (2.0 * static_cast<double>(losses.size()));
}

}  // namespace lfp
