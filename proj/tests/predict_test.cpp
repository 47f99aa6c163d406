#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <tuple>

#include "lfp/predict/predictor.hpp"
#include "test_util.hpp"

namespace lfp {
namespace {

using testing::shifted;
using testing::textured_frame;

// Independent half-pel sampler on top of Frame::clamped.
int oracle_sample(const Frame& ref, int x, int y, int dx, int dy) {
  const double sx = x - dx / 2.0;
  const double sy = y - dy / 2.0;
  const int x0 = static_cast<int>(std::floor(sx));
  const int y0 = static_cast<int>(std::floor(sy));
  const bool hx = sx != x0;
  const bool hy = sy != y0;
  const int a = ref.clamped(x0, y0);
  if (hx && hy) return (a + ref.clamped(x0 + 1, y0) + ref.clamped(x0, y0 + 1) + ref.clamped(x0 + 1, y0 + 1) + 2) / 4;
  if (hx) return (a + ref.clamped(x0 + 1, y0) + 1) / 2;
  if (hy) return (a + ref.clamped(x0, y0 + 1) + 1) / 2;
  return a;
}

std::uint64_t oracle_sse(const Frame& ref, const Frame& tgt, int bx, int by, MotionVector mv) {
  std::uint64_t sse = 0;
  for (int y = by * 16; y < std::min(by * 16 + 16, tgt.height); ++y)
    for (int x = bx * 16; x < std::min(bx * 16 + 16, tgt.width); ++x) {
      const int d = tgt.at(x, y) - oracle_sample(ref, x, y, mv.dx, mv.dy);
      sse += static_cast<std::uint64_t>(d * d);
    }
  return sse;
}

auto tie_key(std::uint64_t sse, MotionVector mv) {
  return std::make_tuple(sse, std::abs(mv.dx) + std::abs(mv.dy), mv.dy, mv.dx);
}

std::uint64_t block_residual_energy(const Frame& a, const Frame& b, int bx, int by) {
  std::uint64_t e = 0;
  for (int y = by * 16; y < std::min(by * 16 + 16, a.height); ++y)
    for (int x = bx * 16; x < std::min(bx * 16 + 16, a.width); ++x) {
      const int d = a.at(x, y) - b.at(x, y);
      e += static_cast<std::uint64_t>(d * d);
    }
  return e;
}

double psnr_of(const Frame& a, const Frame& b) {
  double sse = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = double(a.pixels[i]) - double(b.pixels[i]);
    sse += d * d;
  }
  if (sse == 0.0) return INFINITY;
  return 10.0 * std::log10(255.0 * 255.0 / (sse / a.pixels.size()));
}

TEST(Fd, ReturnsPreviousFrame) {
  const Frame f = textured_frame(40, 30, 1);
  EXPECT_EQ(fd_predict(f), f);
  const FdPredictor fd;
  const std::vector<Frame> history{f};
  EXPECT_EQ(fd.predict(history, f).frame, f);
  EXPECT_FALSE(fd.predict(history, f).motion.has_value());
}

TEST(Fd, ShiftResidualMatchesDirectSubtraction) {
  const Frame ref = textured_frame(64, 48, 2);
  const Frame tgt = shifted(ref, 3, 0);
  const Frame pred = fd_predict(ref);
  int nonzero = 0;
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x) {
      const int r = tgt.at(x, y) - pred.at(x, y);
      EXPECT_EQ(r, tgt.clamped(x, y) - ref.at(x, y));
      nonzero += r != 0;
    }
  EXPECT_GT(nonzero, 64 * 48 / 2);
}

TEST(Mc, IdenticalFramesGiveZeroField) {
  const Frame f = textured_frame(48, 40, 3);
  const auto est = mc_estimate(f, f);
  for (const auto& mv : est.field.vectors) EXPECT_EQ(mv, (MotionVector{0, 0}));
  EXPECT_EQ(est.predicted, f);
}

TEST(Mc, FlatFrameTieBreaksToZero) {
  const Frame f(32, 32, 90);
  for (const auto& mv : mc_estimate(f, f).field.vectors) EXPECT_EQ(mv, (MotionVector{0, 0}));
}

TEST(Mc, IntegerShiftFoundExactly) {
  const Frame ref = textured_frame(128, 128, 4);
  const Frame tgt = shifted(ref, 3, -2);
  const auto est = mc_estimate(ref, tgt);
  ASSERT_EQ(est.field.cols, 8);
  for (int by = 1; by < 7; ++by)
    for (int bx = 1; bx < 7; ++bx) {
      EXPECT_EQ(est.field.at(bx, by), (MotionVector{6, -4})) << bx << "," << by;
      EXPECT_EQ(block_residual_energy(est.predicted, tgt, bx, by), 0u);
    }
  EXPECT_GE(psnr_of(est.predicted, tgt), psnr_of(fd_predict(ref), tgt));
}

TEST(Mc, HalfPelShiftFound) {
  const Frame ref = textured_frame(96, 64, 5);
  Frame tgt(96, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 96; ++x) tgt.at(x, y) = static_cast<std::uint8_t>((ref.clamped(x - 1, y) + ref.at(x, y) + 1) / 2);
  const auto est = mc_estimate(ref, tgt);
  for (int by = 1; by < est.field.rows - 1; ++by)
    for (int bx = 1; bx < est.field.cols - 1; ++bx) {
      EXPECT_EQ(est.field.at(bx, by), (MotionVector{1, 0}));
      EXPECT_EQ(block_residual_energy(est.predicted, tgt, bx, by), 0u);
    }
}

TEST(Mc, ChosenVectorOptimalOverSearchedSet) {
  for (std::uint64_t seed : {6u, 7u, 8u}) {
    const Frame ref = textured_frame(32, 32, seed);
    Frame tgt = shifted(ref, static_cast<int>(seed) - 7, 1);
    tgt.at(5, 5) ^= 0x3f;  // break exactness in one block
    const auto est = mc_estimate(ref, tgt);
    for (int by = 0; by < 2; ++by)
      for (int bx = 0; bx < 2; ++bx) {
        auto best = tie_key(~0ull, {});
        MotionVector best_int;
        for (int dy = -62; dy <= 62; dy += 2)
          for (int dx = -62; dx <= 62; dx += 2) {
            const auto key = tie_key(oracle_sse(ref, tgt, bx, by, {dx, dy}), {dx, dy});
            if (key < best) {
              best = key;
              best_int = {dx, dy};
            }
          }
        for (int oy = -1; oy <= 1; ++oy)
          for (int ox = -1; ox <= 1; ++ox) {
            const MotionVector mv{best_int.dx + ox, best_int.dy + oy};
            if (std::abs(mv.dx) > 62 || std::abs(mv.dy) > 62) continue;
            best = std::min(best, tie_key(oracle_sse(ref, tgt, bx, by, mv), mv));
          }
        const MotionVector chosen = est.field.at(bx, by);
        EXPECT_EQ(tie_key(oracle_sse(ref, tgt, bx, by, chosen), chosen), best) << seed << " " << bx << "," << by;
      }
  }
}

TEST(Mc, PartialEdgeBlocksAndThreadIndependence) {
  const Frame ref = textured_frame(40, 24, 9);
  const Frame tgt = shifted(ref, 1, 2);
  const auto a = mc_estimate(ref, tgt, 1);
  const auto b = mc_estimate(ref, tgt, 4);
  EXPECT_EQ(a.field.cols, 3);
  EXPECT_EQ(a.field.rows, 2);
  EXPECT_EQ(a.field, b.field);
  EXPECT_EQ(a.predicted, b.predicted);
}

TEST(Mc, ApplyMatchesEstimateAndZeroField) {
  const Frame ref = textured_frame(80, 48, 10);
  const Frame tgt = textured_frame(80, 48, 11);
  const auto est = mc_estimate(ref, tgt);
  EXPECT_EQ(mc_apply(ref, est.field), est.predicted);
  EXPECT_EQ(mc_apply(ref, MotionField(80, 48)), ref);
}

TEST(Mc, CornerVectorUsesClampedSamples) {
  const Frame ref = textured_frame(48, 48, 12);
  MotionField field(48, 48);
  field.at(0, 0) = {62, 62};
  field.at(2, 2) = {-61, 33};
  const Frame out = mc_apply(ref, field);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) EXPECT_EQ(out.at(x, y), ref.clamped(x - 31, y - 31));
  for (int y = 32; y < 48; ++y)
    for (int x = 32; x < 48; ++x) EXPECT_EQ(out.at(x, y), oracle_sample(ref, x, y, -61, 33));
}

TEST(Mc, ApplyRejectsBadFields) {
  const Frame ref(32, 32);
  MotionField field(32, 32);
  field.at(1, 1) = {63, 0};
  EXPECT_THROW(mc_apply(ref, field), InputError);
  EXPECT_THROW(mc_apply(ref, MotionField(48, 32)), InputError);
  EXPECT_THROW(mc_estimate(ref, Frame(32, 16)), InputError);
}

TEST(Lfp, ZeroGeneratorPredictsMidGrey) {
  auto g = std::make_shared<Generator>(build_generator({8, 4, 1, 3, 0.1}, 1));
  for (auto* p : g->parameters()) p->fill(0.0f);
  const std::vector<Frame> history(8, textured_frame(352, 288, 13));
  const LfpPredictor lfp(g);
  EXPECT_EQ(lfp.history_length(), 8);
  const Frame out = lfp.predict(history, history.back()).frame;
  EXPECT_EQ(out, Frame(352, 288, 128));
}

TEST(Lfp, DeterministicAndSizePreserving) {
  const auto g = std::make_shared<const Generator>(build_generator({8, 4, 1, 3, 0.1}, 2));
  std::vector<Frame> history;
  for (int i = 0; i < 8; ++i) history.push_back(textured_frame(352, 288, 20 + i));
  const Frame a = lfp_predict(*g, history);
  EXPECT_EQ(a.width, 352);
  EXPECT_EQ(a.height, 288);
  EXPECT_EQ(a, lfp_predict(*g, history));
  EXPECT_EQ(LfpPredictor(g).reconstruct(history, nullptr), a);
}

TEST(Lfp, WrongHistoryLengthIsUsageError) {
  const auto g = std::make_shared<const Generator>(build_generator(GeneratorConfig::desk(), 2));
  const std::vector<Frame> history(3, Frame(16, 16));
  EXPECT_THROW(lfp_predict(*g, history), UsageError);
  EXPECT_THROW(LfpPredictor(g).predict(history, history[0]), UsageError);
  EXPECT_THROW(FdPredictor().predict(history, history[0]), UsageError);
}

TEST(PredictorNames, RoundTrip) {
  for (auto k : {PredictorKind::fd, PredictorKind::mc, PredictorKind::lfp}) {
    EXPECT_EQ(parse_predictor(predictor_name(k)), k);
  }
  EXPECT_THROW(parse_predictor("bogus"), UsageError);
}

}  // namespace
}  // namespace lfp
