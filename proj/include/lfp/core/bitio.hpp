#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lfp {

// MSB-first bit packer with Exp-Golomb helpers.
class BitWriter {
 public:
  void put_bit(bool bit);
  void put_bits(std::uint64_t value, int count);
  // Unsigned Exp-Golomb, order 0.
  void put_ue(std::uint32_t value);
  // Signed Exp-Golomb: 0, 1, -1, 2, -2, ...
  void put_se(std::int32_t value);

  std::uint64_t bit_count() const { return bit_count_; }
  // Pads the final byte with zeros.
  std::vector<std::uint8_t> finish();

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t bit_count_ = 0;
};

// Reader counterpart. Every failure throws DecodeError.
class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> data) : data_(data) {}

  bool get_bit();
  std::uint64_t get_bits(int count);
  std::uint32_t get_ue();
  std::int32_t get_se();

  std::uint64_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> data_;
  std::uint64_t pos_ = 0;
};

// Number of bits put_ue / put_se would emit.
int ue_length(std::uint32_t value);
int se_length(std::int32_t value);

}  // namespace lfp
