#include "lfp/codec/residual.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lfp/core/bitio.hpp"
#include "lfp/core/bytes.hpp"

namespace lfp {

namespace {

constexpr std::uint16_t kResidualVersion = 1;
constexpr std::uint8_t kIntraFlag = 1;
constexpr int kBlock = 8;

using Matrix8 = std::array<std::array<double, 8>, 8>;

const Matrix8& dct_matrix() {
  static const Matrix8 m = [] {
    Matrix8 c{};
    for (int k = 0; k < 8; ++k) {
      const double alpha = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int n = 0; n < 8; ++n) c[k][n] = alpha * std::cos((2 * n + 1) * k * std::numbers::pi / 16.0);
    }
    return c;
  }();
  return m;
}

std::uint32_t level_code(std::int32_t level) {
  return level > 0 ? 2u * static_cast<std::uint32_t>(level - 1) : 2u * static_cast<std::uint32_t>(-level - 1) + 1u;
}

std::int32_t level_from_code(std::uint32_t code) {
  const auto magnitude = static_cast<std::int64_t>(code / 2) + 1;
  if (magnitude > (1 << 20)) throw DecodeError("coefficient level out of range");
  return static_cast<std::int32_t>(code % 2 == 0 ? magnitude : -magnitude);
}

// Edge-replicated read of the residual at any coordinate.
int padded_value(const ResidualImage& r, int x, int y) {
  return r.at(std::min(x, r.width - 1), std::min(y, r.height - 1));
}

void encode_block(const ResidualImage& r, int bx, int by, int qp, BitWriter& bits) {
  Block8 block;
  for (int y = 0; y < kBlock; ++y)
    for (int x = 0; x < kBlock; ++x) block[y * kBlock + x] = padded_value(r, bx * kBlock + x, by * kBlock + y);
  const Block8 coeffs = dct8x8(block);
  int run = 0;
  for (int idx : zigzag_order()) {
    const std::int32_t level = quantize(coeffs[static_cast<std::size_t>(idx)], qp);
    if (level == 0) {
      ++run;
      continue;
    }
    bits.put_ue(static_cast<std::uint32_t>(run + 1));
    bits.put_ue(level_code(level));
    run = 0;
  }
  bits.put_ue(0);
}

void decode_block(BitReader& bits, int bx, int by, int qp, ResidualImage& out) {
  Block8 coeffs{};
  std::size_t pos = 0;
  for (;;) {
    const std::uint32_t symbol = bits.get_ue();
    if (symbol == 0) break;
    pos += symbol - 1;
    if (pos >= 64) throw DecodeError("coefficient run past the end of a block");
    coeffs[static_cast<std::size_t>(zigzag_order()[pos])] = dequantize(level_from_code(bits.get_ue()), qp);
    ++pos;
  }
  const Block8 block = idct8x8(coeffs);
  for (int y = 0; y < kBlock; ++y) {
    const int py = by * kBlock + y;
    if (py >= out.height) break;
    for (int x = 0; x < kBlock; ++x) {
      const int px = bx * kBlock + x;
      if (px >= out.width) break;
      const double v = std::clamp(std::round(block[y * kBlock + x]), double(-kResidualLimit), double(kResidualLimit));
      out.at(px, py) = static_cast<std::int16_t>(v);
    }
  }
}

std::vector<std::uint8_t> encode_stream(const ResidualImage& r, int qp, std::uint8_t flags) {
  check_qp(qp);
  if (r.width < 1 || r.height < 1 || r.width > 0xffff || r.height > 0xffff) {
    throw InputError("residual dimensions out of range");
  }
  for (auto v : r.values) {
    if (v < -kResidualLimit || v > kResidualLimit) throw InputError("residual value " + std::to_string(v) + " outside [-255, 255]");
  }
  ByteWriter w;
  w.put_magic("LFPR");
  w.put_u16(kResidualVersion);
  w.put_u16(static_cast<std::uint16_t>(r.width));
  w.put_u16(static_cast<std::uint16_t>(r.height));
  w.put_u8(static_cast<std::uint8_t>(qp));
  w.put_u8(flags);
  BitWriter bits;
  const int cols = (r.width + kBlock - 1) / kBlock;
  const int rows = (r.height + kBlock - 1) / kBlock;
  for (int by = 0; by < rows; ++by)
    for (int bx = 0; bx < cols; ++bx) encode_block(r, bx, by, qp, bits);
  w.put_bytes(bits.finish());
  return w.release();
}

ResidualImage decode_stream(std::span<const std::uint8_t> stream, std::uint8_t expected_flags) {
  ByteReader r(stream, ErrorCategory::decode);
  r.expect_magic("LFPR");
  const std::uint16_t version = r.get_u16();
  if (version != kResidualVersion) throw DecodeError("unsupported residual stream version " + std::to_string(version));
  const int width = r.get_u16();
  const int height = r.get_u16();
  const int qp = r.get_u8();
  const std::uint8_t flags = r.get_u8();
  if (width < 1 || height < 1) throw DecodeError("residual stream has empty dimensions");
  if (qp < kMinQp || qp > kMaxQp) throw DecodeError("residual stream QP " + std::to_string(qp) + " out of range");
  if (flags != expected_flags) {
    throw DecodeError(flags & kIntraFlag ? "expected a residual stream, got an intra stream"
                                         : "expected an intra stream, got a residual stream");
  }
  const auto payload = r.get_bytes(r.remaining());
  BitReader bits(payload);
  ResidualImage out(width, height);
  const int cols = (width + kBlock - 1) / kBlock;
  const int rows = (height + kBlock - 1) / kBlock;
  for (int by = 0; by < rows; ++by)
    for (int bx = 0; bx < cols; ++bx) decode_block(bits, bx, by, qp, out);
  if ((bits.position() + 7) / 8 != payload.size()) throw DecodeError("trailing bytes after residual blocks");
  return out;
}

}  // namespace

ResidualImage::ResidualImage(int w, int h)
    : width(w), height(h), values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {
  if (w <= 0 || h <= 0) throw InputError("residual dimensions must be positive");
}

ResidualImage frame_difference(const Frame& original, const Frame& prediction) {
  if (!original.same_size(prediction)) throw InputError("frame_difference: sizes differ");
  ResidualImage r(original.width, original.height);
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    r.values[i] = static_cast<std::int16_t>(int(original.pixels[i]) - int(prediction.pixels[i]));
  }
  return r;
}

Frame add_residual(const Frame& prediction, const ResidualImage& residual) {
  if (prediction.width != residual.width || prediction.height != residual.height) {
    throw InputError("add_residual: sizes differ");
  }
  Frame out(prediction.width, prediction.height);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = static_cast<std::uint8_t>(std::clamp(int(prediction.pixels[i]) + residual.values[i], 0, 255));
  }
  return out;
}

double quantizer_step(int qp) { return std::pow(2.0, (qp - 4) / 6.0); }

void check_qp(int qp) {
  if (qp < kMinQp || qp > kMaxQp) {
    throw UsageError("QP " + std::to_string(qp) + " outside " + std::to_string(kMinQp) + ".." + std::to_string(kMaxQp));
  }
}

Block8 dct8x8(const Block8& block) {
  const Matrix8& c = dct_matrix();
  Block8 tmp{};
  Block8 out{};
  // rows: tmp = X C^T, then columns: out = C tmp
  for (int y = 0; y < 8; ++y)
    for (int k = 0; k < 8; ++k) {
      double acc = 0.0;
      for (int n = 0; n < 8; ++n) acc += block[y * 8 + n] * c[k][n];
      tmp[y * 8 + k] = acc;
    }
  for (int k = 0; k < 8; ++k)
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int n = 0; n < 8; ++n) acc += c[k][n] * tmp[n * 8 + x];
      out[k * 8 + x] = acc;
    }
  return out;
}

Block8 idct8x8(const Block8& coefficients) {
  const Matrix8& c = dct_matrix();
  Block8 tmp{};
  Block8 out{};
  for (int n = 0; n < 8; ++n)
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int k = 0; k < 8; ++k) acc += c[k][n] * coefficients[k * 8 + x];
      tmp[n * 8 + x] = acc;
    }
  for (int y = 0; y < 8; ++y)
    for (int n = 0; n < 8; ++n) {
      double acc = 0.0;
      for (int k = 0; k < 8; ++k) acc += tmp[y * 8 + k] * c[k][n];
      out[y * 8 + n] = acc;
    }
  return out;
}

const std::array<int, 64>& zigzag_order() {
  static const std::array<int, 64> order = [] {
    std::array<int, 64> o{};
    int i = 0;
    for (int s = 0; s < 15; ++s) {
      if (s % 2 == 1) {
        for (int row = std::max(0, s - 7); row <= std::min(s, 7); ++row) o[i++] = row * 8 + (s - row);
      } else {
        for (int row = std::min(s, 7); row >= std::max(0, s - 7); --row) o[i++] = row * 8 + (s - row);
      }
    }
    return o;
  }();
  return order;
}

std::int32_t quantize(double coefficient, int qp) {
  return static_cast<std::int32_t>(std::lround(coefficient / quantizer_step(qp)));
}

double dequantize(std::int32_t level, int qp) { return level * quantizer_step(qp); }

std::vector<std::uint8_t> encode_residual(const ResidualImage& residual, int qp) {
  return encode_stream(residual, qp, 0);
}

ResidualImage decode_residual(std::span<const std::uint8_t> stream) { return decode_stream(stream, 0); }

std::vector<std::uint8_t> encode_intra(const Frame& frame, int qp) {
  ResidualImage shifted(frame.width, frame.height);
  for (std::size_t i = 0; i < shifted.values.size(); ++i) {
    shifted.values[i] = static_cast<std::int16_t>(int(frame.pixels[i]) - 128);
  }
  return encode_stream(shifted, qp, kIntraFlag);
}

Frame decode_intra(std::span<const std::uint8_t> stream) {
  const ResidualImage shifted = decode_stream(stream, kIntraFlag);
  Frame out(shifted.width, shifted.height);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = static_cast<std::uint8_t>(std::clamp(shifted.values[i] + 128, 0, 255));
  }
  return out;
}

std::vector<std::uint8_t> InternalBackend::encode_residual(const ResidualImage& residual, int qp) const {
  return lfp::encode_residual(residual, qp);
}
ResidualImage InternalBackend::decode_residual(std::span<const std::uint8_t> stream) const {
  return lfp::decode_residual(stream);
}
std::vector<std::uint8_t> InternalBackend::encode_intra(const Frame& frame, int qp) const {
  return lfp::encode_intra(frame, qp);
}
Frame InternalBackend::decode_intra(std::span<const std::uint8_t> stream) const { return lfp::decode_intra(stream); }

std::uint8_t residual_to_byte(int r) { return static_cast<std::uint8_t>(std::clamp(r + 128, 0, 255)); }
int byte_to_residual(std::uint8_t v) { return static_cast<int>(v) - 128; }

}  // namespace lfp
