#include "lfp/codec/video.hpp"

#include "lfp/core/bitio.hpp"
#include "lfp/core/bytes.hpp"
#include "lfp/nets/checkpoint.hpp"

namespace lfp {

namespace {

constexpr std::uint16_t kVideoVersion = 1;
constexpr std::size_t kBaseHeaderBytes = 4 + 2 + 2 + 2 + 4 + 4 + 4 + 1 + 1 + 1 + 1;

void write_header(ByteWriter& w, const VideoHeader& h) {
  w.put_magic("LFPV");
  w.put_u16(kVideoVersion);
  w.put_u16(static_cast<std::uint16_t>(h.width));
  w.put_u16(static_cast<std::uint16_t>(h.height));
  w.put_u32(h.frame_count);
  w.put_u32(h.fps_num);
  w.put_u32(h.fps_den);
  w.put_u8(static_cast<std::uint8_t>(h.intra_frames));
  w.put_u8(static_cast<std::uint8_t>(h.predictor));
  w.put_u8(static_cast<std::uint8_t>(h.qp));
  w.put_u8(static_cast<std::uint8_t>(h.backend));
  if (h.predictor == PredictorKind::lfp) {
    w.put_u64(h.config_hash);
    w.put_u64(h.model_digest);
  }
}

VideoHeader read_header(ByteReader& r) {
  r.expect_magic("LFPV");
  const std::uint16_t version = r.get_u16();
  if (version != kVideoVersion) throw DecodeError("unsupported video stream version " + std::to_string(version));
  VideoHeader h;
  h.width = r.get_u16();
  h.height = r.get_u16();
  h.frame_count = r.get_u32();
  h.fps_num = r.get_u32();
  h.fps_den = r.get_u32();
  h.intra_frames = r.get_u8();
  const std::uint8_t predictor = r.get_u8();
  if (predictor > static_cast<std::uint8_t>(PredictorKind::lfp)) {
    throw DecodeError("unknown predictor id " + std::to_string(predictor));
  }
  h.predictor = static_cast<PredictorKind>(predictor);
  h.qp = r.get_u8();
  const std::uint8_t backend = r.get_u8();
  if (backend > static_cast<std::uint8_t>(BackendKind::external)) {
    throw DecodeError("unknown residual backend id " + std::to_string(backend));
  }
  h.backend = static_cast<BackendKind>(backend);
  if (h.predictor == PredictorKind::lfp) {
    h.config_hash = r.get_u64();
    h.model_digest = r.get_u64();
  }
  if (h.width < 1 || h.height < 1 || h.fps_num == 0 || h.fps_den == 0 || h.intra_frames < 1 ||
      h.frame_count < static_cast<std::uint32_t>(h.intra_frames)) {
    throw DecodeError("inconsistent video header");
  }
  return h;
}

struct Chunk {
  ChunkType type = ChunkType::intra;
  std::span<const std::uint8_t> motion;
  std::span<const std::uint8_t> payload;
  FrameBits bits;
};

Chunk read_chunk(ByteReader& r, const VideoHeader& h, std::uint32_t index) {
  try {
    Chunk c;
    c.bits.index = index;
    const std::uint8_t type = r.get_u8();
    if (type > static_cast<std::uint8_t>(ChunkType::residual)) throw DecodeError("unknown chunk type");
    c.type = static_cast<ChunkType>(type);
    c.bits.type = c.type;
    c.bits.framing_bits = 8 + 32;
    const bool expect_intra = index < static_cast<std::uint32_t>(h.intra_frames);
    if (expect_intra != (c.type == ChunkType::intra)) throw DecodeError("chunk type out of sequence");
    if (c.type == ChunkType::residual && h.predictor == PredictorKind::mc) {
      c.motion = r.get_bytes(r.get_u32());
      c.bits.framing_bits += 32;
      c.bits.mv_bits = 8 * c.motion.size();
    }
    c.payload = r.get_bytes(r.get_u32());
    c.bits.residual_bits = 8 * c.payload.size();
    return c;
  } catch (const Error& e) {
    throw DecodeError("frame " + std::to_string(index) + ": " + e.what());
  }
}

void check_frames(std::span<const Frame> frames) {
  if (frames.empty()) throw InputError("no frames to encode");
  const Frame& first = frames.front();
  if (first.width > 0xffff || first.height > 0xffff) throw InputError("frame dimensions exceed 65535");
  for (std::size_t t = 1; t < frames.size(); ++t) {
    if (!frames[t].same_size(first)) {
      throw InputError("frame " + std::to_string(t) + " is " + std::to_string(frames[t].width) + "x" +
                       std::to_string(frames[t].height) + ", sequence is " + std::to_string(first.width) + "x" +
                       std::to_string(first.height));
    }
  }
}

std::unique_ptr<Predictor> decoder_predictor(const VideoHeader& h, const DecodeSources& sources) {
  switch (h.predictor) {
    case PredictorKind::fd: return std::make_unique<FdPredictor>();
    case PredictorKind::mc: return std::make_unique<McPredictor>(sources.threads);
    case PredictorKind::lfp:
      if (!sources.generator) throw ModelError("stream needs a generator checkpoint");
      if (config_hash(sources.generator->config) != h.config_hash || checkpoint_digest(*sources.generator) != h.model_digest) {
        throw ModelError("digest mismatch");
      }
      return std::make_unique<LfpPredictor>(sources.generator);
  }
  throw DecodeError("unknown predictor");
}

}  // namespace

std::size_t VideoHeader::byte_size() const { return kBaseHeaderBytes + (predictor == PredictorKind::lfp ? 16 : 0); }

std::uint64_t RateReport::total_bits() const {
  std::uint64_t total = header_bits;
  for (const auto& f : frames) total += f.total_bits();
  return total;
}

std::uint64_t RateReport::mv_bits() const {
  std::uint64_t total = 0;
  for (const auto& f : frames) total += f.mv_bits;
  return total;
}

std::vector<std::uint8_t> encode_motion_field(const MotionField& field) {
  BitWriter bits;
  MotionVector prev;
  for (const auto& mv : field.vectors) {
    bits.put_se(mv.dx - prev.dx);
    bits.put_se(mv.dy - prev.dy);
    prev = mv;
  }
  return bits.finish();
}

MotionField decode_motion_field(std::span<const std::uint8_t> bytes, int width, int height) {
  MotionField field(width, height);
  BitReader bits(bytes);
  MotionVector prev;
  for (auto& mv : field.vectors) {
    mv.dx = prev.dx + bits.get_se();
    mv.dy = prev.dy + bits.get_se();
    if (std::abs(mv.dx) > kMotionLimit || std::abs(mv.dy) > kMotionLimit) {
      throw DecodeError("motion vector out of range");
    }
    prev = mv;
  }
  if ((bits.position() + 7) / 8 != bytes.size()) throw DecodeError("trailing bytes after motion field");
  return field;
}

EncodeResult encode_video(std::span<const Frame> frames, const Predictor& predictor, const ResidualBackend& backend,
                          const EncodeOptions& options) {
  check_frames(frames);
  check_qp(options.qp);
  const int history = predictor.history_length();
  if (options.intra_frames < std::max(1, history) || options.intra_frames > 255) {
    throw UsageError("K = " + std::to_string(options.intra_frames) + " must be in " +
                     std::to_string(std::max(1, history)) + "..255 for the " + predictor_name(predictor.kind()) +
                     " predictor");
  }
  if (frames.size() < static_cast<std::size_t>(options.intra_frames)) {
    throw InputError("sequence has " + std::to_string(frames.size()) + " frames, fewer than K = " +
                     std::to_string(options.intra_frames));
  }
  if (options.fps_num == 0 || options.fps_den == 0) throw UsageError("frame rate must be positive");

  VideoHeader h;
  h.width = frames.front().width;
  h.height = frames.front().height;
  h.frame_count = static_cast<std::uint32_t>(frames.size());
  h.fps_num = options.fps_num;
  h.fps_den = options.fps_den;
  h.intra_frames = options.intra_frames;
  h.predictor = predictor.kind();
  h.qp = options.qp;
  h.backend = backend.kind();
  if (const auto* lfp = dynamic_cast<const LfpPredictor*>(&predictor)) {
    h.config_hash = config_hash(lfp->generator().config);
    h.model_digest = checkpoint_digest(lfp->generator());
  }

  ByteWriter w;
  write_header(w, h);
  EncodeResult result;
  result.report.header_bits = 8 * w.size();
  for (std::size_t t = 0; t < frames.size(); ++t) {
    FrameBits bits;
    bits.index = static_cast<std::uint32_t>(t);
    bits.framing_bits = 8 + 32;
    Frame reconstructed;
    if (t < static_cast<std::size_t>(options.intra_frames)) {
      const auto payload = backend.encode_intra(frames[t], options.qp);
      reconstructed = backend.decode_intra(payload);
      w.put_u8(static_cast<std::uint8_t>(ChunkType::intra));
      w.put_u32(static_cast<std::uint32_t>(payload.size()));
      w.put_bytes(payload);
      bits.type = ChunkType::intra;
      bits.residual_bits = 8 * payload.size();
    } else {
      const auto past = std::span<const Frame>(result.reconstructions).last(static_cast<std::size_t>(history));
      const Prediction prediction = predictor.predict(past, frames[t]);
      const auto payload = backend.encode_residual(frame_difference(frames[t], prediction.frame), options.qp);
      const ResidualImage decoded = backend.decode_residual(payload);
      if (decoded.width != h.width || decoded.height != h.height) throw BackendError("decoded residual size changed");
      reconstructed = add_residual(prediction.frame, decoded);
      w.put_u8(static_cast<std::uint8_t>(ChunkType::residual));
      bits.type = ChunkType::residual;
      if (h.predictor == PredictorKind::mc) {
        const auto motion = encode_motion_field(prediction.motion.value());
        w.put_u32(static_cast<std::uint32_t>(motion.size()));
        w.put_bytes(motion);
        bits.framing_bits += 32;
        bits.mv_bits = 8 * motion.size();
      }
      w.put_u32(static_cast<std::uint32_t>(payload.size()));
      w.put_bytes(payload);
      bits.residual_bits = 8 * payload.size();
    }
    if (!reconstructed.same_size(frames[t])) throw BackendError("decoded frame size changed");
    result.reconstructions.push_back(std::move(reconstructed));
    result.report.frames.push_back(bits);
  }
  result.stream = w.release();
  return result;
}

VideoHeader parse_video_header(std::span<const std::uint8_t> stream) {
  ByteReader r(stream, ErrorCategory::decode);
  return read_header(r);
}

std::vector<Frame> decode_video(std::span<const std::uint8_t> stream, const DecodeSources& sources) {
  ByteReader r(stream, ErrorCategory::decode);
  const VideoHeader h = read_header(r);
  check_qp(h.qp);
  const InternalBackend internal;
  const ResidualBackend* backend = &internal;
  if (h.backend == BackendKind::external) {
    if (!sources.external) throw BackendError("stream was coded with an external codec; none is configured");
    backend = sources.external;
  }
  std::unique_ptr<Predictor> predictor;
  if (h.frame_count > static_cast<std::uint32_t>(h.intra_frames)) {
    predictor = decoder_predictor(h, sources);
    if (predictor->history_length() > h.intra_frames) throw DecodeError("K is shorter than the predictor history");
  }
  std::vector<Frame> out;
  out.reserve(h.frame_count);
  for (std::uint32_t t = 0; t < h.frame_count; ++t) {
    const Chunk c = read_chunk(r, h, t);
    try {
      Frame frame;
      if (c.type == ChunkType::intra) {
        frame = backend->decode_intra(c.payload);
      } else {
        const auto past = std::span<const Frame>(out).last(static_cast<std::size_t>(predictor->history_length()));
        std::optional<MotionField> motion;
        if (h.predictor == PredictorKind::mc) motion = decode_motion_field(c.motion, h.width, h.height);
        const Frame prediction = predictor->reconstruct(past, motion ? &*motion : nullptr);
        const ResidualImage residual = backend->decode_residual(c.payload);
        if (residual.width != h.width || residual.height != h.height) throw DecodeError("residual size mismatch");
        frame = add_residual(prediction, residual);
      }
      if (frame.width != h.width || frame.height != h.height) throw DecodeError("frame size mismatch");
      out.push_back(std::move(frame));
    } catch (const DecodeError& e) {
      throw DecodeError("frame " + std::to_string(t) + ": " + e.what());
    }
  }
  if (!r.at_end()) throw DecodeError("trailing bytes after frame " + std::to_string(h.frame_count - 1));
  return out;
}

RateReport stream_rate_report(std::span<const std::uint8_t> stream) {
  ByteReader r(stream, ErrorCategory::decode);
  const VideoHeader h = read_header(r);
  RateReport report;
  report.header_bits = 8 * r.position();
  for (std::uint32_t t = 0; t < h.frame_count; ++t) report.frames.push_back(read_chunk(r, h, t).bits);
  if (!r.at_end()) throw DecodeError("trailing bytes after frame " + std::to_string(h.frame_count - 1));
  return report;
}

}  // namespace lfp
