#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "lfp/core/bytes.hpp"
#include "lfp/data/frame_io.hpp"
#include "lfp/data/patches.hpp"
#include "lfp/nets/generator.hpp"
#include "test_util.hpp"

namespace lfp {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("lfp_data_" + std::to_string(Rng(counter_++).next()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  static inline std::uint64_t counter_ = 1;
  fs::path path_;
};

Frame ramp(int w, int h, int offset) {
  Frame f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) f.at(x, y) = static_cast<std::uint8_t>((x + 3 * y + offset) & 0xff);
  return f;
}

// Bright square moving 2 px per frame over a dark background.
std::vector<Frame> moving_square(int frames) {
  std::vector<Frame> clip;
  for (int t = 0; t < frames; ++t) {
    Frame f(64, 64, 20);
    for (int y = 8; y < 56; ++y)
      for (int x = 2 * t; x < 2 * t + 30 && x < 64; ++x) f.at(x, y) = 230;
    clip.push_back(f);
  }
  return clip;
}

TEST(Pgm, RoundTripAndComments) {
  TempDir dir;
  const Frame f = ramp(7, 5, 11);
  write_pgm(dir.path() / "a.pgm", f);
  EXPECT_EQ(read_pgm(dir.path() / "a.pgm"), f);

  std::ofstream(dir.path() / "c.pgm", std::ios::binary) << "P5\n# made by hand\n2 1\n255\n" << '\x05' << '\xfa';
  const Frame c = read_pgm(dir.path() / "c.pgm");
  EXPECT_EQ(c.width, 2);
  EXPECT_EQ(c.at(1, 0), 250);
}

TEST(Pgm, RejectsAsciiAndBadMaxval) {
  TempDir dir;
  std::ofstream(dir.path() / "p2.pgm") << "P2\n2 1\n255\n1 2\n";
  EXPECT_THROW(read_pgm(dir.path() / "p2.pgm"), InputError);
  std::ofstream(dir.path() / "m.pgm", std::ios::binary) << "P5\n1 1\n65535\n" << '\0' << '\0';
  EXPECT_THROW(read_pgm(dir.path() / "m.pgm"), InputError);
  std::ofstream(dir.path() / "short.pgm", std::ios::binary) << "P5\n4 4\n255\n" << "abc";
  EXPECT_THROW(read_pgm(dir.path() / "short.pgm"), InputError);
  EXPECT_THROW(read_pgm(dir.path() / "missing.pgm"), InputError);
}

TEST(LoadFrames, PatternAndDirectoryInIndexOrder) {
  TempDir dir;
  std::vector<Frame> frames;
  for (int i = 0; i < 12; ++i) frames.push_back(ramp(16, 8, i * 9));
  write_frames((dir.path() / "%03d.pgm").string(), frames, 1);
  EXPECT_EQ(load_frames((dir.path() / "%03d.pgm").string()), frames);
  EXPECT_EQ(load_frames(dir.path().string()), frames);
}

TEST(LoadFrames, FullClipCount) {
  TempDir dir;
  std::vector<Frame> frames(300, Frame(352, 288, 7));
  write_frames((dir.path() / "f%04d.pgm").string(), frames);
  const auto loaded = load_frames((dir.path() / "f%04d.pgm").string());
  ASSERT_EQ(loaded.size(), 300u);
  EXPECT_EQ(loaded.front().width, 352);
  EXPECT_EQ(loaded.front().height, 288);
}

TEST(LoadFrames, Errors) {
  TempDir dir;
  EXPECT_THROW(load_frames(dir.path().string()), InputError);
  EXPECT_THROW(load_frames((dir.path() / "%03d.pgm").string()), InputError);
  write_pgm(dir.path() / "000.pgm", Frame(8, 8));
  write_pgm(dir.path() / "001.pgm", Frame(8, 9));
  EXPECT_THROW(load_frames(dir.path().string()), InputError);
}

TEST(RawY, RoundTrip) {
  TempDir dir;
  const std::vector<Frame> frames{ramp(6, 4, 0), ramp(6, 4, 50)};
  write_raw_y(dir.path() / "clip.y", frames);
  EXPECT_EQ(load_raw_y(dir.path() / "clip.y", 6, 4), frames);
  EXPECT_THROW(load_raw_y(dir.path() / "clip.y", 5, 4), InputError);
}

TEST(Normalize, EndpointsAndInverse) {
  EXPECT_EQ(normalize_pixel(0), -1.0f);
  EXPECT_EQ(normalize_pixel(255), 1.0f);
  EXPECT_NEAR(normalize_pixel(128), 128.0 / 127.5 - 1.0, 1e-7);
  for (int v = 0; v < 256; ++v) {
    EXPECT_EQ(to_uint8_pixel(normalize_pixel(static_cast<std::uint8_t>(v))), v);
  }
}

TEST(Normalize, FramesStackAsChannels) {
  const std::vector<Frame> frames{Frame(3, 2, 0), Frame(3, 2, 255)};
  const auto t = normalize_frames(frames);
  EXPECT_EQ(t.shape(), (Shape{1, 2, 2, 3}));
  EXPECT_EQ(t.at(0, 0, 1, 2), -1.0f);
  EXPECT_EQ(t.at(0, 1, 0, 0), 1.0f);
}

TEST(Extraction, Defaults) {
  const ExtractionOptions opts;
  EXPECT_EQ(opts.threshold, 7.0);
  EXPECT_EQ(opts.ignore_prob, 0.05);
}

TEST(Extraction, StaticClipWithoutIgnoreYieldsNothing) {
  const std::vector<Frame> clip(12, testing::textured_frame(64, 64, 3));
  const auto result = extract_patch_samples(clip, {.count = 20, .seed = 1, .threshold = 7.0, .ignore_prob = 0.0});
  EXPECT_TRUE(result.samples.empty());
  EXPECT_TRUE(result.short_count);
  EXPECT_EQ(result.draws, 2000u);
}

TEST(Extraction, MovingSquareWindowsPassAgainstLoopOracle) {
  const auto clip = moving_square(12);
  const auto result = extract_patch_samples(clip, {.count = 200, .seed = 9, .threshold = 7.0, .ignore_prob = 0.0});
  ASSERT_FALSE(result.samples.empty());
  for (const auto& s : result.samples) {
    for (int t = 0; t < 8; ++t) {
      double acc = 0.0;
      for (std::size_t i = 0; i < kPatchPixels; ++i) {
        const double d = double(s.patch(t)[i]) - double(s.patch(t + 1)[i]);
        acc += d * d;
      }
      EXPECT_GT(acc / kPatchPixels, 7.0);
    }
  }
  // The square's vertical extent covers every window row, so any window whose
  // columns include a moving edge changes; windows missing both edges are rare.
  EXPECT_GT(result.samples.size(), 100u);
}

TEST(Extraction, ReproducibleAndGateIgnoredSometimes) {
  const std::vector<Frame> clip(10, testing::textured_frame(64, 64, 4));
  const ExtractionOptions opts{.count = 30, .seed = 77, .threshold = 7.0, .ignore_prob = 0.05};
  const auto a = extract_patch_samples(clip, opts);
  const auto b = extract_patch_samples(clip, opts);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.draws, b.draws);
  // Static clip: only ignored-gate draws are accepted, about 5% of them.
  EXPECT_GT(a.samples.size(), 0u);
  EXPECT_LT(static_cast<double>(a.samples.size()), 0.15 * static_cast<double>(a.draws));
}

TEST(Extraction, RejectsShortOrSmallClips) {
  EXPECT_THROW(extract_patch_samples(std::vector<Frame>(8, Frame(64, 64)), {.count = 1}), InputError);
  EXPECT_THROW(extract_patch_samples(std::vector<Frame>(9, Frame(47, 64)), {.count = 1}), InputError);
}

TEST(Dataset, SizeAndRoundTrip) {
  TempDir dir;
  const auto clip = moving_square(12);
  auto samples = extract_patch_samples(clip, {.count = 100, .seed = 2, .threshold = 0.0, .ignore_prob = 0.0}).samples;
  ASSERT_EQ(samples.size(), 100u);
  store_dataset(samples, dir.path() / "d.lfpd");
  EXPECT_EQ(fs::file_size(dir.path() / "d.lfpd"), 18u + 100u * 9u * 2304u);
  EXPECT_EQ(load_dataset(dir.path() / "d.lfpd"), samples);
}

TEST(Dataset, TruncatedOrPaddedFileIsRejected) {
  TempDir dir;
  std::vector<PatchSample> samples(3);
  samples[1].bytes[5] = 9;
  store_dataset(samples, dir.path() / "d.lfpd");
  auto bytes = read_file(dir.path() / "d.lfpd");
  bytes.pop_back();
  write_file(dir.path() / "t.lfpd", bytes);
  EXPECT_THROW(load_dataset(dir.path() / "t.lfpd"), IntegrityError);
  bytes.push_back(0);
  bytes.push_back(0);
  write_file(dir.path() / "p.lfpd", bytes);
  EXPECT_THROW(load_dataset(dir.path() / "p.lfpd"), IntegrityError);
  write_file(dir.path() / "h.lfpd", std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 10));
  EXPECT_THROW(load_dataset(dir.path() / "h.lfpd"), IntegrityError);
}

}  // namespace
}  // namespace lfp
