#include "lfp/core/bytes.hpp"

#include <bit>
#include <fstream>
#include <iterator>

namespace lfp {

void ByteWriter::put_f32(float v) { put_u32(std::bit_cast<std::uint32_t>(v)); }

void ByteWriter::put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }

float ByteReader::get_f32() { return std::bit_cast<float>(get_u32()); }

double ByteReader::get_f64() { return std::bit_cast<double>(get_u64()); }

std::span<const std::uint8_t> ByteReader::get_bytes(std::size_t count) {
  require(count);
  auto out = data_.subspan(pos_, count);
  pos_ += count;
  return out;
}

void ByteReader::expect_magic(std::string_view magic) {
  auto got = get_bytes(magic.size());
  if (!std::equal(got.begin(), got.end(), magic.begin())) {
    raise(on_underflow_, "bad magic, expected \"" + std::string(magic) + "\"");
  }
}

std::uint64_t ByteReader::get_le(int count) {
  require(static_cast<std::size_t>(count));
  std::uint64_t v = 0;
  for (int i = 0; i < count; ++i) v |= std::uint64_t{data_[pos_ + i]} << (8 * i);
  pos_ += static_cast<std::size_t>(count);
  return v;
}

void ByteReader::require(std::size_t count) const {
  if (count > data_.size() - pos_) {
    raise(on_underflow_, "truncated data: need " + std::to_string(count) + " bytes at offset " +
                                   std::to_string(pos_) + ", have " + std::to_string(data_.size() - pos_));
  }
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> data, std::uint64_t basis) noexcept {
  std::uint64_t h = basis;
  for (auto b : data) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw InputError("write failed for " + path.string());
}

}  // namespace lfp
