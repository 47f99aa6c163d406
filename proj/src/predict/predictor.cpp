#include "lfp/predict/predictor.hpp"

#include "lfp/data/patches.hpp"

namespace lfp {

std::string predictor_name(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::fd: return "fd";
    case PredictorKind::mc: return "mc";
    case PredictorKind::lfp: return "lfp";
  }
  return "unknown";
}

PredictorKind parse_predictor(const std::string& name) {
  if (name == "fd") return PredictorKind::fd;
  if (name == "mc") return PredictorKind::mc;
  if (name == "lfp") return PredictorKind::lfp;
  throw UsageError("unknown predictor '" + name + "' (expected fd, mc or lfp)");
}

void Predictor::check_history(std::span<const Frame> history) const {
  if (history.size() != static_cast<std::size_t>(history_length())) {
    throw UsageError(predictor_name(kind()) + " predictor needs " + std::to_string(history_length()) +
                     " history frames, got " + std::to_string(history.size()));
  }
  for (const auto& f : history) {
    if (!f.same_size(history.front())) throw InputError("history frames differ in size");
  }
}

Frame fd_predict(const Frame& previous) { return previous; }

Prediction FdPredictor::predict(std::span<const Frame> history, const Frame&) const {
  check_history(history);
  return {fd_predict(history.back()), std::nullopt};
}

Frame FdPredictor::reconstruct(std::span<const Frame> history, const MotionField*) const {
  check_history(history);
  return fd_predict(history.back());
}

Prediction McPredictor::predict(std::span<const Frame> history, const Frame& target) const {
  check_history(history);
  MotionEstimate est = mc_estimate(history.back(), target, threads_);
  return {std::move(est.predicted), std::move(est.field)};
}

Frame McPredictor::reconstruct(std::span<const Frame> history, const MotionField* motion) const {
  check_history(history);
  if (!motion) throw DecodeError("motion-compensated frame without motion vectors");
  return mc_apply(history.back(), *motion, threads_);
}

LfpPredictor::LfpPredictor(std::shared_ptr<const Generator> generator) : generator_(std::move(generator)) {
  if (!generator_) throw ModelError("learned predictor needs a generator");
}

Prediction LfpPredictor::predict(std::span<const Frame> history, const Frame&) const {
  check_history(history);
  return {lfp_predict(*generator_, history), std::nullopt};
}

Frame LfpPredictor::reconstruct(std::span<const Frame> history, const MotionField*) const {
  check_history(history);
  return lfp_predict(*generator_, history);
}

Frame lfp_predict(const Generator& generator, std::span<const Frame> history) {
  if (history.size() != static_cast<std::size_t>(generator.config.input_frames)) {
    throw UsageError("learned predictor needs " + std::to_string(generator.config.input_frames) +
                     " history frames, got " + std::to_string(history.size()));
  }
  return to_uint8_frame(generator_forward(generator, normalize_frames(history)));
}

}  // namespace lfp
