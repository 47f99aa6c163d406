#include "lfp/predict/motion.hpp"

#include <cstdlib>
#include <limits>
#include <tuple>

#include "lfp/core/parallel.hpp"

namespace lfp {

namespace {

// Edge-replicated copy of a frame with a border wide enough for any vector
// within the limit plus one bilinear tap.
class PaddedPlane {
 public:
  static constexpr int kPad = kMotionRange + 2;

  explicit PaddedPlane(const Frame& f) : width_(f.width + 2 * kPad), height_(f.height + 2 * kPad) {
    data_.resize(static_cast<std::size_t>(width_) * height_);
    for (int y = 0; y < height_; ++y)
      for (int x = 0; x < width_; ++x) data_[static_cast<std::size_t>(y) * width_ + x] = f.clamped(x - kPad, y - kPad);
  }

  // Frame coordinates; valid within kPad of the frame.
  const std::uint8_t* row(int y) const { return data_.data() + static_cast<std::size_t>(y + kPad) * width_ + kPad; }
  int at(int x, int y) const { return row(y)[x]; }

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> data_;
};

struct BlockRect {
  int x0, y0, w, h;
};

BlockRect block_rect(int bx, int by, int width, int height) {
  const int x0 = bx * kMotionBlock;
  const int y0 = by * kMotionBlock;
  return {x0, y0, std::min(kMotionBlock, width - x0), std::min(kMotionBlock, height - y0)};
}

// Predicted pixel for frame position (x, y) under `mv`.
int sample(const PaddedPlane& ref, int x, int y, MotionVector mv) {
  const int sx = 2 * x - mv.dx;
  const int sy = 2 * y - mv.dy;
  const int ix = sx >> 1;
  const int iy = sy >> 1;
  const bool hx = sx & 1;
  const bool hy = sy & 1;
  if (!hx && !hy) return ref.at(ix, iy);
  if (hx && !hy) return (ref.at(ix, iy) + ref.at(ix + 1, iy) + 1) >> 1;
  if (!hx && hy) return (ref.at(ix, iy) + ref.at(ix, iy + 1) + 1) >> 1;
  return (ref.at(ix, iy) + ref.at(ix + 1, iy) + ref.at(ix, iy + 1) + ref.at(ix + 1, iy + 1) + 2) >> 2;
}

void predict_block(const PaddedPlane& ref, const BlockRect& r, MotionVector mv, Frame& out) {
  for (int y = r.y0; y < r.y0 + r.h; ++y)
    for (int x = r.x0; x < r.x0 + r.w; ++x) out.at(x, y) = static_cast<std::uint8_t>(sample(ref, x, y, mv));
}

std::uint64_t sub_pel_sse(const PaddedPlane& ref, const Frame& target, const BlockRect& r, MotionVector mv) {
  std::uint64_t sse = 0;
  for (int y = r.y0; y < r.y0 + r.h; ++y)
    for (int x = r.x0; x < r.x0 + r.w; ++x) {
      const int d = static_cast<int>(target.at(x, y)) - sample(ref, x, y, mv);
      sse += static_cast<std::uint64_t>(d * d);
    }
  return sse;
}

// Integer-displacement SSE with early exit once `bound` is exceeded.
std::uint64_t integer_sse(const PaddedPlane& ref, const Frame& target, const BlockRect& r, int mx, int my,
                          std::uint64_t bound) {
  std::uint64_t sse = 0;
  for (int y = r.y0; y < r.y0 + r.h; ++y) {
    const std::uint8_t* t = target.pixels.data() + static_cast<std::size_t>(y) * target.width + r.x0;
    const std::uint8_t* p = ref.row(y - my) + r.x0 - mx;
    int row = 0;
    for (int i = 0; i < r.w; ++i) {
      const int d = static_cast<int>(t[i]) - static_cast<int>(p[i]);
      row += d * d;
    }
    sse += static_cast<std::uint64_t>(row);
    if (sse > bound) return sse;
  }
  return sse;
}

struct Candidate {
  std::uint64_t sse = std::numeric_limits<std::uint64_t>::max();
  MotionVector mv;
};

bool precedes(const Candidate& a, const Candidate& b) {
  return std::make_tuple(a.sse, std::abs(a.mv.dx) + std::abs(a.mv.dy), a.mv.dy, a.mv.dx) <
         std::make_tuple(b.sse, std::abs(b.mv.dx) + std::abs(b.mv.dy), b.mv.dy, b.mv.dx);
}

MotionVector search_block(const PaddedPlane& ref, const Frame& target, const BlockRect& r) {
  Candidate best;
  for (int my = -kMotionRange; my <= kMotionRange; ++my)
    for (int mx = -kMotionRange; mx <= kMotionRange; ++mx) {
      const Candidate c{integer_sse(ref, target, r, mx, my, best.sse), {2 * mx, 2 * my}};
      if (precedes(c, best)) best = c;
    }
  const MotionVector centre = best.mv;
  for (int oy = -1; oy <= 1; ++oy)
    for (int ox = -1; ox <= 1; ++ox) {
      const MotionVector mv{centre.dx + ox, centre.dy + oy};
      if ((ox == 0 && oy == 0) || std::abs(mv.dx) > kMotionLimit || std::abs(mv.dy) > kMotionLimit) continue;
      const Candidate c{sub_pel_sse(ref, target, r, mv), mv};
      if (precedes(c, best)) best = c;
    }
  return best.mv;
}

}  // namespace

MotionField::MotionField(int width, int height)
    : cols((width + kMotionBlock - 1) / kMotionBlock),
      rows((height + kMotionBlock - 1) / kMotionBlock),
      vectors(static_cast<std::size_t>(cols) * rows) {}

MotionEstimate mc_estimate(const Frame& reference, const Frame& target, unsigned threads) {
  if (!reference.same_size(target)) {
    throw InputError("motion estimation needs equal frame sizes, got " + std::to_string(reference.width) + "x" +
                     std::to_string(reference.height) + " and " + std::to_string(target.width) + "x" +
                     std::to_string(target.height));
  }
  const PaddedPlane ref(reference);
  MotionEstimate est{MotionField(reference.width, reference.height), Frame(reference.width, reference.height)};
  parallel_for(est.field.vectors.size(), threads, [&](std::size_t i) {
    const int bx = static_cast<int>(i) % est.field.cols;
    const int by = static_cast<int>(i) / est.field.cols;
    const BlockRect r = block_rect(bx, by, reference.width, reference.height);
    est.field.vectors[i] = search_block(ref, target, r);
    predict_block(ref, r, est.field.vectors[i], est.predicted);
  });
  return est;
}

Frame mc_apply(const Frame& reference, const MotionField& field, unsigned threads) {
  const MotionField expected(reference.width, reference.height);
  if (field.cols != expected.cols || field.rows != expected.rows ||
      field.vectors.size() != expected.vectors.size()) {
    throw InputError("motion field grid " + std::to_string(field.cols) + "x" + std::to_string(field.rows) +
                     " does not cover a " + std::to_string(reference.width) + "x" + std::to_string(reference.height) +
                     " frame");
  }
  for (const auto& mv : field.vectors) {
    if (std::abs(mv.dx) > kMotionLimit || std::abs(mv.dy) > kMotionLimit) {
      throw InputError("motion vector (" + std::to_string(mv.dx) + "," + std::to_string(mv.dy) +
                       ") exceeds the half-pel limit " + std::to_string(kMotionLimit));
    }
  }
  const PaddedPlane ref(reference);
  Frame out(reference.width, reference.height);
  parallel_for(field.vectors.size(), threads, [&](std::size_t i) {
    const int bx = static_cast<int>(i) % field.cols;
    const int by = static_cast<int>(i) / field.cols;
    predict_block(ref, block_rect(bx, by, reference.width, reference.height), field.vectors[i], out);
  });
  return out;
}

}  // namespace lfp
