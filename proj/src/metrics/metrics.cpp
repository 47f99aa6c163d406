#include "lfp/metrics/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "lfp/core/parallel.hpp"

namespace lfp {

namespace {

void check_same_size(const Frame& a, const Frame& b) {
  if (!a.same_size(b)) {
    throw InputError("frame sizes differ: " + std::to_string(a.width) + "x" + std::to_string(a.height) + " vs " +
                     std::to_string(b.width) + "x" + std::to_string(b.height));
  }
}

// Mean of the cubic over u in [-1, 1].
double mean_over_unit_interval(const std::array<double, 4>& c) { return c[0] + c[2] / 3.0; }

struct LogCurve {
  std::vector<double> x;
  std::vector<double> y;
};

LogCurve to_log_rates(const RdCurve& curve, const char* role) {
  if (curve.points.size() < 4) {
    throw InputError(std::string(role) + " curve '" + curve.label + "' has " + std::to_string(curve.points.size()) +
                     " points; BD-PSNR needs at least 4");
  }
  LogCurve out;
  for (const auto& p : curve.points) {
    if (!(p.bitrate_kbps > 0.0) || !std::isfinite(p.bitrate_kbps)) {
      throw InputError(std::string(role) + " curve has a non-positive bitrate");
    }
    if (!std::isfinite(p.psnr_db)) throw InputError(std::string(role) + " curve has a non-finite PSNR");
    out.x.push_back(std::log10(p.bitrate_kbps));
    out.y.push_back(p.psnr_db);
  }
  return out;
}

std::ofstream open_report(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

void finish_report(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw InputError("failed writing " + path.string());
}

void check_label(const std::string& label) {
  if (label.find_first_of(",\r\n") != std::string::npos) throw UsageError("label may not contain ',' or newlines");
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, std::size_t line, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line) + ": bad " + what + " '" + text + "'");
  }
}

}  // namespace

double mean_squared_error(const Frame& a, const Frame& b) {
  check_same_size(a, b);
  if (a.pixels.empty()) throw InputError("empty frame");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(a.pixels.size());
}

double psnr(const Frame& a, const Frame& b) {
  const double mse = mean_squared_error(a, b);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double mean_capped_psnr(std::span<const double> values) {
  if (values.empty()) throw InputError("no PSNR values to average");
  double acc = 0.0;
  for (double v : values) acc += std::min(v, kPsnrCapDb);
  return acc / static_cast<double>(values.size());
}

std::vector<CurveSample> prediction_curve(std::span<const Frame> frames, const Predictor& predictor) {
  const auto history = static_cast<std::size_t>(predictor.history_length());
  if (frames.size() <= history) {
    throw InputError("clip has " + std::to_string(frames.size()) + " frames; the " + predictor_name(predictor.kind()) +
                     " predictor needs more than " + std::to_string(history));
  }
  for (std::size_t t = 1; t < frames.size(); ++t) check_same_size(frames[0], frames[t]);
  std::vector<CurveSample> out;
  for (std::size_t t = history; t < frames.size(); ++t) {
    const Prediction p = predictor.predict(frames.subspan(t - history, history), frames[t]);
    out.push_back({t, psnr(p.frame, frames[t])});
  }
  return out;
}

double bitrate_kbps(std::span<const std::uint64_t> frame_bits, double fps) {
  if (frame_bits.empty()) throw InputError("no frames to average the bitrate over");
  if (!(fps > 0.0)) throw InputError("frame rate must be positive");
  double total = 0.0;
  for (auto b : frame_bits) total += static_cast<double>(b);
  return total / static_cast<double>(frame_bits.size()) * fps / 1000.0;
}

double bitrate_kbps(std::uint64_t file_bits, std::size_t frame_count, double fps) {
  if (frame_count == 0) throw InputError("no frames to average the bitrate over");
  if (!(fps > 0.0)) throw InputError("frame rate must be positive");
  return static_cast<double>(file_bits) / static_cast<double>(frame_count) * fps / 1000.0;
}

std::array<double, 4> fit_cubic(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 4) throw InputError("cubic fit needs at least 4 points");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd a(n, 4);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    a(i, 0) = 1.0;
    a(i, 1) = xi;
    a(i, 2) = xi * xi;
    a(i, 3) = xi * xi * xi;
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const auto qr = a.colPivHouseholderQr();
  if (qr.rank() < 4) throw DomainError("cubic fit is singular; rates must be distinct");
  const Eigen::Vector4d c = qr.solve(b);
  return {c(0), c(1), c(2), c(3)};
}

double bd_psnr(const RdCurve& test, const RdCurve& anchor) {
  const LogCurve t = to_log_rates(test, "test");
  const LogCurve a = to_log_rates(anchor, "anchor");
  const auto [t_min, t_max] = std::minmax_element(t.x.begin(), t.x.end());
  const auto [a_min, a_max] = std::minmax_element(a.x.begin(), a.x.end());
  const double lo = std::max(*t_min, *a_min);
  const double hi = std::min(*t_max, *a_max);
  if (!(hi > lo)) throw DomainError("rate ranges of the two curves do not overlap");
  // Fit in u = (x - centre) / half_width so the overlap maps onto [-1, 1].
  const double centre = 0.5 * (lo + hi);
  const double half_width = 0.5 * (hi - lo);
  const auto rescale = [&](std::vector<double> x) {
    for (auto& v : x) v = (v - centre) / half_width;
    return x;
  };
  const double test_mean = mean_over_unit_interval(fit_cubic(rescale(t.x), t.y));
  const double anchor_mean = mean_over_unit_interval(fit_cubic(rescale(a.x), a.y));
  return test_mean - anchor_mean;
}

std::vector<int> default_qp_sweep() {
  std::vector<int> qps;
  for (int qp = 25; qp <= 35; ++qp) qps.push_back(qp);
  return qps;
}

RdCurve rd_sweep(std::span<const Frame> frames, const Predictor& predictor, const ResidualBackend& backend,
                 const RdSweepOptions& options, std::string label) {
  if (options.qps.empty()) throw UsageError("QP list is empty");
  for (int qp : options.qps) check_qp(qp);
  DecodeSources sources;
  if (const auto* lfp = dynamic_cast<const LfpPredictor*>(&predictor)) sources.generator = lfp->shared_generator();
  if (backend.kind() == BackendKind::external) sources.external = &backend;
  const unsigned threads = backend.kind() == BackendKind::internal ? options.threads : 1;

  RdCurve curve{std::move(label), std::vector<RdPoint>(options.qps.size())};
  parallel_for(options.qps.size(), threads, [&](std::size_t i) {
    const int qp = options.qps[i];
    const auto enc = encode_video(frames, predictor, backend,
                                  {.qp = qp, .intra_frames = options.intra_frames, .fps_num = options.fps_num,
                                   .fps_den = options.fps_den});
    const auto decoded = decode_video(enc.stream, sources);
    const RateReport report = stream_rate_report(enc.stream);
    std::size_t first = static_cast<std::size_t>(options.intra_frames);
    if (first >= frames.size()) first = 0;
    std::vector<std::uint64_t> bits;
    std::vector<double> quality;
    for (std::size_t t = first; t < frames.size(); ++t) {
      bits.push_back(report.frames[t].total_bits());
      quality.push_back(psnr(decoded[t], frames[t]));
    }
    const double fps = static_cast<double>(options.fps_num) / options.fps_den;
    curve.points[i] = {qp, bitrate_kbps(bits, fps), mean_capped_psnr(quality)};
  });
  std::stable_sort(curve.points.begin(), curve.points.end(),
                   [](const RdPoint& a, const RdPoint& b) { return a.qp < b.qp; });
  return curve;
}

std::string format_fixed6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

void write_curve_csv(const std::filesystem::path& path, std::span<const RdCurve> curves) {
  auto out = open_report(path);
  out << "label,qp,bitrate_kbps,psnr_db\n";
  for (const auto& c : curves) {
    check_label(c.label);
    for (const auto& p : c.points) {
      out << c.label << ',' << p.qp << ',' << format_fixed6(p.bitrate_kbps) << ',' << format_fixed6(p.psnr_db) << '\n';
    }
  }
  finish_report(out, path);
}

RdCurve import_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("line 1: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "label,qp,bitrate_kbps,psnr_db") {
    throw ParseError("line 1: expected header 'label,qp,bitrate_kbps,psnr_db'");
  }
  RdCurve curve;
  bool have_label = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    const std::string at = "line " + std::to_string(line_no) + ": ";
    if (f.size() != 4) throw ParseError(at + "expected 4 fields, got " + std::to_string(f.size()));
    if (!have_label) {
      curve.label = f[0];
      have_label = true;
    } else if (f[0] != curve.label) {
      throw ParseError(at + "label '" + f[0] + "' differs from '" + curve.label + "'");
    }
    RdPoint p;
    try {
      std::size_t used = 0;
      p.qp = std::stoi(f[1], &used);
      if (used != f[1].size()) throw std::invalid_argument(f[1]);
    } catch (const std::exception&) {
      throw ParseError(at + "bad qp '" + f[1] + "'");
    }
    p.bitrate_kbps = parse_double(f[2], line_no, "bitrate");
    p.psnr_db = parse_double(f[3], line_no, "PSNR");
    if (!(p.bitrate_kbps > 0.0) || !std::isfinite(p.bitrate_kbps)) throw ParseError(at + "bitrate must be positive");
    if (!std::isfinite(p.psnr_db)) throw ParseError(at + "PSNR must be finite");
    for (const auto& q : curve.points) {
      if (q.bitrate_kbps == p.bitrate_kbps) throw ParseError(at + "duplicate bitrate " + f[2]);
    }
    curve.points.push_back(p);
  }
  if (curve.points.empty()) throw ParseError("line " + std::to_string(line_no) + ": no data rows");
  return curve;
}

void write_prediction_curve_csv(const std::filesystem::path& path, std::span<const CurveSample> samples) {
  auto out = open_report(path);
  out << "frame,psnr_db\n";
  for (const auto& s : samples) out << s.frame + 1 << ',' << format_fixed6(s.psnr) << '\n';
  finish_report(out, path);
}

void write_bd_report_csv(const std::filesystem::path& path, std::span<const BdEntry> entries) {
  auto out = open_report(path);
  out << "test,anchor,bd_psnr_db\n";
  for (const auto& e : entries) {
    check_label(e.test);
    check_label(e.anchor);
    out << e.test << ',' << e.anchor << ',' << format_fixed6(e.bd_psnr_db) << '\n';
  }
  finish_report(out, path);
}

}  // namespace lfp
