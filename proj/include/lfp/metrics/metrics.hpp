#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lfp/codec/video.hpp"

namespace lfp {

// Per-frame ceiling used when averaging PSNR over a sequence; identical frames
// have infinite PSNR.
inline constexpr double kPsnrCapDb = 99.0;

double mean_squared_error(const Frame& a, const Frame& b);
double psnr(const Frame& a, const Frame& b);
double mean_capped_psnr(std::span<const double> values);

struct CurveSample {
  std::size_t frame = 0;  // 0-based index of the predicted frame
  double psnr = 0.0;
};

// Predicts every frame from the original frames before it.
std::vector<CurveSample> prediction_curve(std::span<const Frame> frames, const Predictor& predictor);

double bitrate_kbps(std::span<const std::uint64_t> frame_bits, double fps);
double bitrate_kbps(std::uint64_t file_bits, std::size_t frame_count, double fps);

struct RdPoint {
  int qp = 0;
  double bitrate_kbps = 0.0;
  double psnr_db = 0.0;
};

struct RdCurve {
  std::string label;
  std::vector<RdPoint> points;
};

// Coefficients c0..c3 of the least-squares cubic in x.
std::array<double, 4> fit_cubic(std::span<const double> x, std::span<const double> y);

// Mean PSNR gap of test over anchor across their shared log10-rate range.
double bd_psnr(const RdCurve& test, const RdCurve& anchor);

std::vector<int> default_qp_sweep();

struct RdSweepOptions {
  std::vector<int> qps = default_qp_sweep();
  int intra_frames = kDefaultIntraFrames;
  std::uint32_t fps_num = 25;
  std::uint32_t fps_den = 1;
  unsigned threads = 1;
};

// Encodes and decodes the clip once per QP. Rate and PSNR are averaged over the
// predicted frames (all frames when the clip is intra only). Rate covers each
// frame's whole chunk, motion vectors included.
RdCurve rd_sweep(std::span<const Frame> frames, const Predictor& predictor, const ResidualBackend& backend,
                 const RdSweepOptions& options, std::string label);

void write_curve_csv(const std::filesystem::path& path, std::span<const RdCurve> curves);
RdCurve import_curve_csv(const std::filesystem::path& path);
void write_prediction_curve_csv(const std::filesystem::path& path, std::span<const CurveSample> samples);

struct BdEntry {
  std::string test;
  std::string anchor;
  double bd_psnr_db = 0.0;
};
void write_bd_report_csv(const std::filesystem::path& path, std::span<const BdEntry> entries);

std::string format_fixed6(double value);

}  // namespace lfp
