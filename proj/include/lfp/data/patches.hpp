#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lfp/data/frame.hpp"
#include "lfp/tensor/tensor.hpp"

namespace lfp {

inline constexpr int kPatchSide = 48;
inline constexpr int kSampleFrames = 9;
inline constexpr std::size_t kPatchPixels = static_cast<std::size_t>(kPatchSide) * kPatchSide;
inline constexpr std::size_t kSampleBytes = kPatchPixels * kSampleFrames;

// Nine temporally consecutive 48x48 patches from one location of a clip.
struct PatchSample {
  std::array<std::uint8_t, kSampleBytes> bytes{};

  std::span<const std::uint8_t, kPatchPixels> patch(int t) const {
    return std::span<const std::uint8_t, kPatchPixels>(bytes.data() + kPatchPixels * t, kPatchPixels);
  }
  std::span<std::uint8_t, kPatchPixels> patch(int t) {
    return std::span<std::uint8_t, kPatchPixels>(bytes.data() + kPatchPixels * t, kPatchPixels);
  }
  bool operator==(const PatchSample&) const = default;
};

// v / 127.5 - 1, mapping [0, 255] onto [-1, 1].
inline float normalize_pixel(std::uint8_t v) { return static_cast<float>(v / 127.5 - 1.0); }

// Stacks 8-bit planes of one size as channels of a (1, planes, h, w) tensor.
Tensor<float> normalize_planes(std::span<const std::span<const std::uint8_t>> planes, int width, int height);
Tensor<float> normalize_frames(std::span<const Frame> frames);

struct ExtractionOptions {
  std::size_t count = 0;
  std::uint64_t seed = 0;
  double threshold = 7.0;     // minimum mean square difference between consecutive patches
  double ignore_prob = 0.05;  // chance of accepting a draw without the motion test
};

struct ExtractionResult {
  std::vector<PatchSample> samples;
  std::size_t draws = 0;
  // Set when the retry cap (100 draws per requested sample) ran out first.
  bool short_count = false;
};

// Mean square difference of two equally sized 8-bit patches.
double patch_mse(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

// True when every consecutive patch pair differs by more than `threshold`.
bool passes_motion_gate(const PatchSample& sample, double threshold);

// Random start frame and location per draw; a draw is kept when it passes the
// motion gate or, with probability ignore_prob, unconditionally.
ExtractionResult extract_patch_samples(std::span<const Frame> clip, const ExtractionOptions& options);

// Dataset file: "LFPD", u16 version, u64 count, u16 patch side, u16 frames
// per sample, then the raw sample bytes.
inline constexpr std::size_t kDatasetHeaderBytes = 4 + 2 + 8 + 2 + 2;

void store_dataset(std::span<const PatchSample> samples, const std::filesystem::path& path);
std::vector<PatchSample> load_dataset(const std::filesystem::path& path);

}  // namespace lfp
