#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lfp/data/frame.hpp"

namespace lfp {

inline constexpr int kMinQp = 1;
inline constexpr int kMaxQp = 51;
inline constexpr int kResidualLimit = 255;

// Signed difference image with values in [-255, 255].
struct ResidualImage {
  int width = 0;
  int height = 0;
  std::vector<std::int16_t> values;

  ResidualImage() = default;
  ResidualImage(int w, int h);

  std::int16_t at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  std::int16_t& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  bool operator==(const ResidualImage&) const = default;
};

// original - prediction, elementwise.
ResidualImage frame_difference(const Frame& original, const Frame& prediction);
// clamp(prediction + residual, 0, 255)
Frame add_residual(const Frame& prediction, const ResidualImage& residual);

// 2^((qp - 4) / 6)
double quantizer_step(int qp);
void check_qp(int qp);

using Block8 = std::array<double, 64>;
// Orthonormal 2-D DCT-II on a row-major 8x8 block, and its inverse.
Block8 dct8x8(const Block8& block);
Block8 idct8x8(const Block8& coefficients);
// Scan position -> raster index.
const std::array<int, 64>& zigzag_order();

std::int32_t quantize(double coefficient, int qp);
double dequantize(std::int32_t level, int qp);

// Built-in transform codec. Stream: "LFPR", u16 version, u16 width,
// u16 height, u8 qp, u8 flags (bit 0: intra), then the block bitstream.
std::vector<std::uint8_t> encode_residual(const ResidualImage& residual, int qp);
ResidualImage decode_residual(std::span<const std::uint8_t> stream);
std::vector<std::uint8_t> encode_intra(const Frame& frame, int qp);
Frame decode_intra(std::span<const std::uint8_t> stream);

enum class BackendKind : std::uint8_t { internal = 0, external = 1 };

class ResidualBackend {
 public:
  virtual ~ResidualBackend() = default;
  virtual BackendKind kind() const = 0;
  virtual std::vector<std::uint8_t> encode_residual(const ResidualImage& residual, int qp) const = 0;
  virtual ResidualImage decode_residual(std::span<const std::uint8_t> stream) const = 0;
  virtual std::vector<std::uint8_t> encode_intra(const Frame& frame, int qp) const = 0;
  virtual Frame decode_intra(std::span<const std::uint8_t> stream) const = 0;
};

class InternalBackend final : public ResidualBackend {
 public:
  BackendKind kind() const override { return BackendKind::internal; }
  std::vector<std::uint8_t> encode_residual(const ResidualImage& residual, int qp) const override;
  ResidualImage decode_residual(std::span<const std::uint8_t> stream) const override;
  std::vector<std::uint8_t> encode_intra(const Frame& frame, int qp) const override;
  Frame decode_intra(std::span<const std::uint8_t> stream) const override;
};

// Shell command templates; {in}, {out} and {qp} are substituted. The encoder
// turns an 8-bit PGM into an opaque stream, the decoder turns it back.
struct ExternalCommands {
  std::string encode;
  std::string decode;
};

// "encode template ;; decode template", the LFP_EXTERNAL_CODEC format.
ExternalCommands parse_external_commands(const std::string& spec);

// Adapter for an outside still-image codec. Residuals travel as the 8-bit
// image clamp(r + 128, 0, 255). Construction round-trips a probe image twice
// and requires identical streams.
class ExternalBackend final : public ResidualBackend {
 public:
  explicit ExternalBackend(ExternalCommands commands);
  BackendKind kind() const override { return BackendKind::external; }
  std::vector<std::uint8_t> encode_residual(const ResidualImage& residual, int qp) const override;
  ResidualImage decode_residual(std::span<const std::uint8_t> stream) const override;
  std::vector<std::uint8_t> encode_intra(const Frame& frame, int qp) const override;
  Frame decode_intra(std::span<const std::uint8_t> stream) const override;

 private:
  ExternalCommands commands_;
};

std::uint8_t residual_to_byte(int r);
int byte_to_residual(std::uint8_t v);

}  // namespace lfp
