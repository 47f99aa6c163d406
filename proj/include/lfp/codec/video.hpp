#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "lfp/codec/residual.hpp"
#include "lfp/predict/predictor.hpp"

namespace lfp {

inline constexpr int kDefaultIntraFrames = 8;

// Stream header: "LFPV", u16 version, u16 width, u16 height, u32 frame count,
// u32 fps numerator, u32 fps denominator, u8 K, u8 predictor, u8 qp,
// u8 backend; learned-predictor streams add u64 config hash, u64 digest.
struct VideoHeader {
  int width = 0;
  int height = 0;
  std::uint32_t frame_count = 0;
  std::uint32_t fps_num = 25;
  std::uint32_t fps_den = 1;
  int intra_frames = kDefaultIntraFrames;
  PredictorKind predictor = PredictorKind::fd;
  int qp = 30;
  BackendKind backend = BackendKind::internal;
  std::uint64_t config_hash = 0;
  std::uint64_t model_digest = 0;

  double fps() const { return static_cast<double>(fps_num) / fps_den; }
  std::size_t byte_size() const;
};

// Each frame is one chunk: u8 type (0 intra, 1 residual); residual chunks of
// motion-compensated streams carry u32 length + motion payload; then u32
// length + codec payload.
enum class ChunkType : std::uint8_t { intra = 0, residual = 1 };

struct FrameBits {
  std::uint32_t index = 0;
  ChunkType type = ChunkType::intra;
  std::uint64_t mv_bits = 0;
  std::uint64_t residual_bits = 0;  // codec payload (intra or residual)
  std::uint64_t framing_bits = 0;   // type byte and length fields

  std::uint64_t total_bits() const { return mv_bits + residual_bits + framing_bits; }
};

struct RateReport {
  std::uint64_t header_bits = 0;
  std::vector<FrameBits> frames;

  std::uint64_t total_bits() const;
  std::uint64_t mv_bits() const;
};

struct EncodeOptions {
  int qp = 30;
  int intra_frames = kDefaultIntraFrames;
  std::uint32_t fps_num = 25;
  std::uint32_t fps_den = 1;
};

struct EncodeResult {
  std::vector<std::uint8_t> stream;
  std::vector<Frame> reconstructions;  // what the decoder will output
  RateReport report;
};

// Closed loop: the first K frames are intra coded, then each frame is
// predicted from reconstructions only and its residual coded.
EncodeResult encode_video(std::span<const Frame> frames, const Predictor& predictor, const ResidualBackend& backend,
                          const EncodeOptions& options);

struct DecodeSources {
  std::shared_ptr<const Generator> generator;  // learned-predictor streams
  const ResidualBackend* external = nullptr;   // external-backend streams
  unsigned threads = 1;
};

VideoHeader parse_video_header(std::span<const std::uint8_t> stream);
std::vector<Frame> decode_video(std::span<const std::uint8_t> stream, const DecodeSources& sources);
RateReport stream_rate_report(std::span<const std::uint8_t> stream);

// Differential signed Exp-Golomb coding of a motion field in raster order.
std::vector<std::uint8_t> encode_motion_field(const MotionField& field);
MotionField decode_motion_field(std::span<const std::uint8_t> bytes, int width, int height);

}  // namespace lfp
