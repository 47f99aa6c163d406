#pragma once

#include <cstdint>
#include <vector>

#include "lfp/data/frame.hpp"

namespace lfp {

inline constexpr int kMotionBlock = 16;
inline constexpr int kMotionRange = 31;                // full pixels
inline constexpr int kMotionLimit = 2 * kMotionRange;  // half-pel units

// Content motion in half-pel units: block pixel (x, y) is predicted from the
// reference at (x - dx/2, y - dy/2), bilinear at half positions, edge-clamped.
struct MotionVector {
  int dx = 0;
  int dy = 0;
  bool operator==(const MotionVector&) const = default;
};

// One vector per 16x16 block in raster order; edge blocks may be partial.
struct MotionField {
  int cols = 0;
  int rows = 0;
  std::vector<MotionVector> vectors;

  MotionField() = default;
  MotionField(int width, int height);

  MotionVector& at(int bx, int by) { return vectors[static_cast<std::size_t>(by) * cols + bx]; }
  const MotionVector& at(int bx, int by) const { return vectors[static_cast<std::size_t>(by) * cols + bx]; }
  bool operator==(const MotionField&) const = default;
};

struct MotionEstimate {
  MotionField field;
  Frame predicted;
};

// Exhaustive integer search over [-31, 31]^2 per block, then refinement over
// the 8 half-pel neighbours of the best integer vector. Cost is block SSE;
// ties go to the smaller |dx| + |dy|, then smaller dy, then smaller dx.
MotionEstimate mc_estimate(const Frame& reference, const Frame& target, unsigned threads = 1);

// Decoder-side reconstruction; identical to mc_estimate's predicted frame for
// the same field.
Frame mc_apply(const Frame& reference, const MotionField& field, unsigned threads = 1);

}  // namespace lfp
