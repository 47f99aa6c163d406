#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "lfp/nets/generator.hpp"
#include "lfp/predict/motion.hpp"

namespace lfp {

enum class PredictorKind : std::uint8_t { fd = 0, mc = 1, lfp = 2 };

std::string predictor_name(PredictorKind kind);
// "fd", "mc" or "lfp"; anything else is a UsageError.
PredictorKind parse_predictor(const std::string& name);

struct Prediction {
  Frame frame;
  std::optional<MotionField> motion;  // MC only
};

// Predicts the next frame from the most recent history_length() frames,
// oldest first. The encoder may also consult the target (MC does); the
// decoder rebuilds the same frame from history plus the transmitted motion.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual PredictorKind kind() const = 0;
  virtual int history_length() const = 0;
  virtual Prediction predict(std::span<const Frame> history, const Frame& target) const = 0;
  virtual Frame reconstruct(std::span<const Frame> history, const MotionField* motion) const = 0;

 protected:
  void check_history(std::span<const Frame> history) const;
};

class FdPredictor final : public Predictor {
 public:
  PredictorKind kind() const override { return PredictorKind::fd; }
  int history_length() const override { return 1; }
  Prediction predict(std::span<const Frame> history, const Frame& target) const override;
  Frame reconstruct(std::span<const Frame> history, const MotionField* motion) const override;
};

class McPredictor final : public Predictor {
 public:
  explicit McPredictor(unsigned threads = 1) : threads_(threads) {}
  PredictorKind kind() const override { return PredictorKind::mc; }
  int history_length() const override { return 1; }
  Prediction predict(std::span<const Frame> history, const Frame& target) const override;
  Frame reconstruct(std::span<const Frame> history, const MotionField* motion) const override;

 private:
  unsigned threads_;
};

class LfpPredictor final : public Predictor {
 public:
  explicit LfpPredictor(std::shared_ptr<const Generator> generator);
  PredictorKind kind() const override { return PredictorKind::lfp; }
  int history_length() const override { return generator_->config.input_frames; }
  Prediction predict(std::span<const Frame> history, const Frame& target) const override;
  Frame reconstruct(std::span<const Frame> history, const MotionField* motion) const override;
  const Generator& generator() const { return *generator_; }
  const std::shared_ptr<const Generator>& shared_generator() const { return generator_; }

 private:
  std::shared_ptr<const Generator> generator_;
};

Frame fd_predict(const Frame& previous);
// Normalize, run the generator, quantize to 8 bits. Needs exactly N frames.
Frame lfp_predict(const Generator& generator, std::span<const Frame> history);

}  // namespace lfp
