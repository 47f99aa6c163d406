#include "lfp/data/patches.hpp"

#include "lfp/core/bytes.hpp"
#include "lfp/core/rng.hpp"

namespace lfp {

namespace {

constexpr std::uint16_t kDatasetVersion = 1;

void copy_patch(const Frame& frame, int x0, int y0, std::span<std::uint8_t, kPatchPixels> out) {
  for (int y = 0; y < kPatchSide; ++y) {
    const std::uint8_t* row = frame.pixels.data() + static_cast<std::size_t>(y0 + y) * frame.width + x0;
    std::copy_n(row, kPatchSide, out.data() + static_cast<std::size_t>(y) * kPatchSide);
  }
}

}  // namespace

Tensor<float> normalize_planes(std::span<const std::span<const std::uint8_t>> planes, int width, int height) {
  const std::size_t plane = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  Tensor<float> t({1, static_cast<int>(planes.size()), height, width});
  float* out = t.data();
  for (const auto& p : planes) {
    if (p.size() != plane) throw DimensionError("normalize_planes: plane size mismatch");
    for (std::size_t i = 0; i < plane; ++i) *out++ = normalize_pixel(p[i]);
  }
  return t;
}

Tensor<float> normalize_frames(std::span<const Frame> frames) {
  if (frames.empty()) throw DimensionError("normalize_frames: no frames");
  std::vector<std::span<const std::uint8_t>> planes;
  for (const auto& f : frames) {
    if (!f.same_size(frames.front())) throw DimensionError("normalize_frames: frame sizes differ");
    planes.emplace_back(f.pixels);
  }
  return normalize_planes(planes, frames.front().width, frames.front().height);
}

double patch_mse(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size() || a.empty()) throw DimensionError("patch_mse: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

bool passes_motion_gate(const PatchSample& sample, double threshold) {
  for (int t = 0; t + 1 < kSampleFrames; ++t) {
    if (!(patch_mse(sample.patch(t), sample.patch(t + 1)) > threshold)) return false;
  }
  return true;
}

ExtractionResult extract_patch_samples(std::span<const Frame> clip, const ExtractionOptions& options) {
  if (clip.size() < static_cast<std::size_t>(kSampleFrames)) {
    throw InputError("clip has " + std::to_string(clip.size()) + " frames, need at least " +
                     std::to_string(kSampleFrames));
  }
  const Frame& first = clip.front();
  for (const auto& f : clip) {
    if (!f.same_size(first)) throw InputError("clip frames differ in size");
  }
  if (first.width < kPatchSide || first.height < kPatchSide) {
    throw InputError("clip frames are smaller than " + std::to_string(kPatchSide) + "x" + std::to_string(kPatchSide));
  }

  ExtractionResult result;
  result.samples.reserve(options.count);
  Rng rng(options.seed);
  const std::size_t max_draws = 100 * options.count;
  const int start_choices = static_cast<int>(clip.size()) - kSampleFrames;
  while (result.samples.size() < options.count && result.draws < max_draws) {
    ++result.draws;
    const int t0 = rng.between(0, start_choices);
    const int x0 = rng.between(0, first.width - kPatchSide);
    const int y0 = rng.between(0, first.height - kPatchSide);
    const bool ignore_gate = rng.uniform() < options.ignore_prob;
    PatchSample sample;
    for (int t = 0; t < kSampleFrames; ++t) copy_patch(clip[static_cast<std::size_t>(t0 + t)], x0, y0, sample.patch(t));
    if (ignore_gate || passes_motion_gate(sample, options.threshold)) result.samples.push_back(sample);
  }
  result.short_count = result.samples.size() < options.count;
  return result;
}

void store_dataset(std::span<const PatchSample> samples, const std::filesystem::path& path) {
  ByteWriter w;
  w.put_magic("LFPD");
  w.put_u16(kDatasetVersion);
  w.put_u64(samples.size());
  w.put_u16(static_cast<std::uint16_t>(kPatchSide));
  w.put_u16(static_cast<std::uint16_t>(kSampleFrames));
  for (const auto& s : samples) w.put_bytes(s.bytes);
  write_file(path, w.bytes());
}

std::vector<PatchSample> load_dataset(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  ByteReader r(bytes, ErrorCategory::integrity);
  r.expect_magic("LFPD");
  const std::uint16_t version = r.get_u16();
  if (version != kDatasetVersion) throw IntegrityError("unsupported dataset version " + std::to_string(version));
  const std::uint64_t count = r.get_u64();
  const std::uint16_t side = r.get_u16();
  const std::uint16_t frames = r.get_u16();
  if (side != kPatchSide || frames != kSampleFrames) {
    throw IntegrityError("dataset holds " + std::to_string(frames) + " patches of " + std::to_string(side) +
                         " px, expected " + std::to_string(kSampleFrames) + " of " + std::to_string(kPatchSide));
  }
  if (count > (bytes.size() - kDatasetHeaderBytes) / kSampleBytes ||
      bytes.size() != kDatasetHeaderBytes + count * kSampleBytes) {
    throw IntegrityError("dataset " + path.string() + " length " + std::to_string(bytes.size()) +
                         " does not match header count " + std::to_string(count));
  }
  std::vector<PatchSample> samples(count);
  for (auto& s : samples) {
    auto raw = r.get_bytes(kSampleBytes);
    std::copy(raw.begin(), raw.end(), s.bytes.begin());
  }
  return samples;
}

}  // namespace lfp
