#pragma once

#include <cstdint>
#include <vector>

#include "lfp/core/error.hpp"

namespace lfp {

// 8-bit grayscale image, row-major.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Frame() = default;
  Frame(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
    if (w <= 0 || h <= 0) throw InputError("frame dimensions must be positive");
  }

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  // Edge-clamped read.
  std::uint8_t clamped(int x, int y) const {
    x = x < 0 ? 0 : (x >= width ? width - 1 : x);
    y = y < 0 ? 0 : (y >= height ? height - 1 : y);
    return at(x, y);
  }

  bool same_size(const Frame& other) const { return width == other.width && height == other.height; }
  bool operator==(const Frame&) const = default;
};

}  // namespace lfp
