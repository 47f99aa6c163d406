#include "lfp/core/bitio.hpp"

#include <bit>

#include "lfp/core/error.hpp"

namespace lfp {

namespace {

std::uint32_t se_to_ue(std::int32_t v) {
  return v > 0 ? 2 * static_cast<std::uint32_t>(v) - 1 : 2 * static_cast<std::uint32_t>(-static_cast<std::int64_t>(v));
}

}  // namespace

void BitWriter::put_bit(bool bit) {
  if (bit_count_ % 8 == 0) bytes_.push_back(0);
  if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bit_count_ % 8));
  ++bit_count_;
}

void BitWriter::put_bits(std::uint64_t value, int count) {
  for (int i = count - 1; i >= 0; --i) put_bit((value >> i) & 1u);
}

void BitWriter::put_ue(std::uint32_t value) {
  const std::uint64_t coded = std::uint64_t{value} + 1;
  const int width = std::bit_width(coded);
  put_bits(0, width - 1);
  put_bits(coded, width);
}

void BitWriter::put_se(std::int32_t value) { put_ue(se_to_ue(value)); }

std::vector<std::uint8_t> BitWriter::finish() {
  bit_count_ = 0;
  return std::move(bytes_);
}

bool BitReader::get_bit() {
  if (pos_ >= data_.size() * 8) throw DecodeError("bitstream exhausted");
  const bool bit = (data_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
  ++pos_;
  return bit;
}

std::uint64_t BitReader::get_bits(int count) {
  std::uint64_t v = 0;
  for (int i = 0; i < count; ++i) v = (v << 1) | static_cast<std::uint64_t>(get_bit());
  return v;
}

std::uint32_t BitReader::get_ue() {
  int zeros = 0;
  while (!get_bit()) {
    if (++zeros > 32) throw DecodeError("Exp-Golomb prefix too long");
  }
  const std::uint64_t coded = (std::uint64_t{1} << zeros) | get_bits(zeros);
  if (coded - 1 > 0xffffffffULL) throw DecodeError("Exp-Golomb value overflow");
  return static_cast<std::uint32_t>(coded - 1);
}

std::int32_t BitReader::get_se() {
  const std::uint32_t k = get_ue();
  if (k > 0xfffffffeu) throw DecodeError("signed Exp-Golomb value overflow");
  const auto mag = static_cast<std::int64_t>((k + 1) / 2);
  return static_cast<std::int32_t>(k % 2 == 1 ? mag : -mag);
}

int ue_length(std::uint32_t value) { return 2 * std::bit_width(std::uint64_t{value} + 1) - 1; }

int se_length(std::int32_t value) { return ue_length(se_to_ue(value)); }

}  // namespace lfp
