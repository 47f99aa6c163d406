// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "lfp/codec/video.hpp"
#include "lfp/core/bytes.hpp"
#include "lfp/metrics/metrics.hpp"
#include "lfp/nets/checkpoint.hpp"
#include "lfp/predict/motion.hpp"
#include "lfp/tensor/kernels.hpp"
#include "lfp/train/trainer.hpp"
#include "test_util.hpp"

namespace lfp {
namespace {

using testing::random_tensor;

// Tolerances and sizes pinned by the criteria.
constexpr double kGradTolerance = 1e-5;
constexpr double kGradStep = 1e-5;
constexpr std::size_t kGradMaxParams = 10000;
constexpr double kConvTolerance = 1e-6;
constexpr int kConvShapes = 50;
constexpr std::int64_t kDeskSteps = 2000;
constexpr std::size_t kDeskSamples = 5000;
constexpr double kDeskLossRatio = 0.5;
constexpr int kTextureCell = 8;        // coarsest value-noise octave of the training textures
constexpr double kTextureGain = 6.0;   // octave amplitude per pixel of cell size
constexpr int kMinSpeed = 2;           // px/frame, larger of |vx| and |vy|
constexpr int kMaxSpeed = 4;
constexpr std::int64_t kGanSteps = 500;
constexpr double kHalfPelMinDb = 48.0;
constexpr int kClosedLoopFrames = 20;
constexpr double kIntraMinDb = 50.0;
constexpr double kBdZeroTolerance = 1e-9;
constexpr double kBdOffsetTolerance = 1e-6;
constexpr double kBdOracleTolerance = 1e-6;
constexpr int kBdOracleSamples = 100000;
constexpr double kOneLevelDb = 48.1308;
constexpr double kOneLevelTolerance = 1e-3;
constexpr int kHighMotionPx = 4;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// 1. Random small graphs over every differentiable op, checked in double.
void gradient_correctness(Verdict& v) {
  Rng rng(101);
  const Activation acts[] = {Activation::relu(), Activation::leaky_relu(0.2), Activation::tanh(),
                             Activation::sigmoid()};
  double worst = 0.0;
  std::size_t checked = 0;
  std::size_t largest = 0;
  for (int graph = 0; graph < 16; ++graph) {
    int n, c, h, w, o, k, stride, pad;
    Shape conv_shape;
    do {
      n = rng.between(1, 2);
      c = rng.between(1, 3);
      k = 2 * rng.between(0, 2) + 1;
      h = rng.between(k + 1, 10);
      w = rng.between(k + 1, 10);
      o = rng.between(1, 4);
      stride = rng.between(1, 2);
      pad = rng.between(0, k / 2);
      conv_shape = kernels::conv2d_output_shape({n, c, h, w}, {o, c, k, k}, stride, pad);
    } while (conv_shape.h < 2 || conv_shape.w < 2);
    const Activation first = acts[rng.between(0, 3)];
    const Activation second = acts[rng.between(0, 3)];
    const auto pooled = kernels::avg_pool2d_output_shape(conv_shape, 2, 2);
    const int features = pooled.c * pooled.h * pooled.w;
    std::vector<Tensor<double>> leaves{random_tensor<double>({n, c, h, w}, rng),
                                       random_tensor<double>({o, c, k, k}, rng),
                                       random_tensor<double>({o, 1, 1, 1}, rng),
                                       random_tensor<double>({1, features, 1, 1}, rng, -0.5, 0.5),
                                       random_tensor<double>({1, 1, 1, 1}, rng),
                                       random_tensor<double>(conv_shape, rng)};
    std::size_t params = 0;
    for (const auto& t : leaves) params += t.size();
    largest = std::max(largest, params);
    const double label = rng.between(0, 1);
    const double mix = rng.uniform(0.2, 0.8);
    const auto result = testing::gradient_check(
        leaves,
        [&](const std::vector<Var<double>>& x) {
          auto y = ag::activation(ag::conv2d(x[0], x[1], x[2], stride, pad), first);
          auto fit = ag::mse_loss(y, x[5]);
          auto p = ag::sigmoid(ag::linear(ag::activation(ag::avg_pool2d(y, 2, 2), second), x[3], x[4]));
          return ag::combined_loss(fit, ag::bce_loss(p, label), mix, 1.0 - mix);
        },
        kGradStep);
    worst = std::max(worst, result.max_relative_error);
    checked += result.checked;
  }
  v.require(largest <= kGradMaxParams, "graph too large");
  v.require(worst < kGradTolerance, "relative error");
  v.detail << "16 graphs, " << checked << " partials, max rel err " << sci(worst) << " < " << sci(kGradTolerance);
}

// 2. conv2d against the direct summation on random shapes.
void convolution_oracle(Verdict& v) {
  Rng rng(202);
  double worst = 0.0;
  for (int trial = 0; trial < kConvShapes; ++trial) {
    const int k = 2 * rng.between(0, 3) + 1;
    const int stride = rng.between(1, 3);
    const int pad = rng.between(0, k - 1);
    const Shape in{rng.between(1, 3), rng.between(1, 5), rng.between(k, 18), rng.between(k, 18)};
    const Shape ws{rng.between(1, 6), in.c, k, k};
    const auto x = random_tensor<double>(in, rng);
    const auto w = random_tensor<double>(ws, rng);
    const auto b = random_tensor<double>({ws.n, 1, 1, 1}, rng);
    const auto got = conv2d(x, ConvParams<double>{w, b, stride, pad});
    const auto want = testing::conv2d_loop_oracle(x, w, b, stride, pad);
    v.require(got.shape() == want.shape(), "shape");
    if (got.shape() == want.shape()) worst = std::max(worst, testing::max_abs_diff(got, want));
  }
  v.require(worst <= kConvTolerance, "max abs diff");
  v.detail << kConvShapes << " shapes, max abs diff " << sci(worst) << " <= " << sci(kConvTolerance);
}

// Fine-grained textures translating at 2..4 px/frame in random directions.
std::vector<Frame> translating_clip(int size, int frames, int vx, int vy, std::uint64_t seed) {
  return testing::panning_clip(size, size, frames, vx, vy, seed, kTextureCell, kTextureGain);
}

std::vector<PatchSample> translating_dataset(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PatchSample> samples;
  std::uint64_t clip = 0;
  while (samples.size() < count) {
    int vx = 0;
    int vy = 0;
    while (std::max(std::abs(vx), std::abs(vy)) < kMinSpeed) {
      vx = rng.between(-kMaxSpeed, kMaxSpeed);
      vy = rng.between(-kMaxSpeed, kMaxSpeed);
    }
    const auto frames = translating_clip(80, 9, vx, vy, rng.next());
    const std::size_t want = std::min<std::size_t>(25, count - samples.size());
    auto got = extract_patch_samples(frames, {.count = want, .seed = seed + ++clip, .threshold = 7.0, .ignore_prob = 0.05});
    samples.insert(samples.end(), got.samples.begin(), got.samples.end());
  }
  return samples;
}

double mean_psnr_from(const std::vector<CurveSample>& curve, std::size_t first_frame) {
  std::vector<double> values;
  for (const auto& s : curve) {
    if (s.frame >= first_frame) values.push_back(s.psnr);
  }
  return mean_capped_psnr(values);
}

std::shared_ptr<const Generator> g_trained;

// 3. Desk-scale MSE training.
void desk_learning(Verdict& v) {
  const auto dataset = translating_dataset(kDeskSamples, 303);
  Generator g = build_generator(GeneratorConfig::desk(), 304);
  TrainConfigMSE cfg;
  cfg.steps = kDeskSteps;
  v.require(cfg.lr0 == 1e-4 && cfg.batch == 32, "default settings");
  const TrainLog log = train_mse(g, dataset, cfg, 305);
  const double early = log.smoothed(99, 100);
  const double late = log.smoothed(log.records.size() - 1, 100);
  v.require(late < kDeskLossRatio * early, "(a) loss ratio");

  const auto held_out = translating_clip(96, 16, 3, -2, 306);
  const auto shared = std::make_shared<const Generator>(std::move(g));
  const auto history = static_cast<std::size_t>(shared->config.input_frames);
  const double learned = mean_psnr_from(prediction_curve(held_out, LfpPredictor(shared)), history);
  const double fd = mean_psnr_from(prediction_curve(held_out, FdPredictor{}), history);
  v.require(learned > fd, "(b) learned PSNR above FD");
  g_trained = shared;
  v.detail << dataset.size() << " samples; smoothed loss " << sci(early) << " @100 -> " << sci(late) << " @"
           << kDeskSteps << " (ratio " << sci(late / early) << " < " << kDeskLossRatio << "); held-out PSNR learned "
           << format_fixed6(learned) << " dB vs FD " << format_fixed6(fd) << " dB";
}

std::vector<float> flatten(const Generator& g) {
  std::vector<float> out;
  for (const auto* p : g.parameters()) out.insert(out.end(), p->values().begin(), p->values().end());
  return out;
}

// 4. Adversarial plumbing.
void adversarial_plumbing(Verdict& v) {
  const auto dataset = translating_dataset(400, 404);
  const Generator pretrained = build_generator(GeneratorConfig::desk(), 405);
  {
    Generator g = pretrained;
    Discriminator d = build_discriminator(DiscriminatorConfig::desk(), 406);
    TrainConfigGAN cfg;
    cfg.steps = kGanSteps;
    v.require(cfg.lambda_ms == 0.95 && cfg.lambda_adv == 0.05, "default weights");
    const GanLog log = train_adversarial(g, d, dataset, cfg, 407);
    bool finite = log.generator.records.size() == static_cast<std::size_t>(kGanSteps) &&
                  log.discriminator.records.size() == static_cast<std::size_t>(kGanSteps);
    for (const auto& r : log.generator.records) finite &= std::isfinite(r.loss);
    for (const auto& r : log.discriminator.records) finite &= std::isfinite(r.loss);
    bool composition = log.compositions.size() == static_cast<std::size_t>(kGanSteps);
    for (const auto& c : log.compositions) composition &= c.real == 16 && c.generated == 16;
    v.require(finite, "finite losses over every step");
    v.require(composition, "16 real + 16 generated per step");
    v.detail << kGanSteps << " steps finite, every discriminator batch 16+16; ";
  }
  // With no adversarial weight the generator follows the MSE trainer exactly.
  bool identical = true;
  for (std::int64_t steps : {1, 10, 40}) {
    Generator a = pretrained;
    Discriminator d = build_discriminator(DiscriminatorConfig::desk(), 408);
    TrainConfigGAN gan;
    gan.steps = steps;
    gan.lambda_ms = 1.0;
    gan.lambda_adv = 0.0;
    const GanLog glog = train_adversarial(a, d, dataset, gan, 409);
    Generator b = pretrained;
    TrainConfigMSE mse;
    mse.steps = steps;
    mse.batch = gan.gen_batch;
    mse.lr0 = gan.gen_lr;
    const TrainLog mlog = train_mse(b, dataset, mse, 409);
    identical &= flatten(a) == flatten(b);
    for (std::size_t i = 0; i < mlog.records.size(); ++i) identical &= glog.generator.records[i].loss == mlog.records[i].loss;
  }
  v.require(identical, "zero adversarial weight matches MSE training bit for bit");
  v.detail << "zero adversarial weight: parameters bit-identical to MSE training after 1, 10, 40 steps";
}

// 5. Motion compensation on exact and half-pel shifts.
void mc_exactness(Verdict& v) {
  const Frame ref = testing::textured_frame(128, 128, 505);
  const Frame target = testing::shifted(ref, 3, -2);
  const MotionEstimate est = mc_estimate(ref, target);
  bool vectors = true;
  std::uint64_t interior_sse = 0;
  for (int by = 1; by + 1 < est.field.rows; ++by)
    for (int bx = 1; bx + 1 < est.field.cols; ++bx) {
      vectors &= est.field.at(bx, by) == MotionVector{6, -4};
      for (int y = by * 16; y < by * 16 + 16; ++y)
        for (int x = bx * 16; x < bx * 16 + 16; ++x) {
          const int d = int(est.predicted.at(x, y)) - int(target.at(x, y));
          interior_sse += static_cast<std::uint64_t>(d * d);
        }
    }
  v.require(vectors, "interior vectors (3,-2) px");
  v.require(interior_sse == 0, "interior residual energy 0");

  // Half-pel target: rounded average of horizontal neighbours.
  Frame half(128, 128);
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x) half.at(x, y) = static_cast<std::uint8_t>((ref.clamped(x, y) + ref.clamped(x - 1, y) + 1) >> 1);
  const MotionEstimate hest = mc_estimate(ref, half);
  double sse = 0.0;
  int pixels = 0;
  for (int y = 16; y < 112; ++y)
    for (int x = 16; x < 112; ++x) {
      const double d = double(hest.predicted.at(x, y)) - double(half.at(x, y));
      sse += d * d;
      ++pixels;
    }
  const double half_db = sse == 0.0 ? std::numeric_limits<double>::infinity() : 10 * std::log10(65025.0 * pixels / sse);
  v.require(half_db >= kHalfPelMinDb, "half-pel interior PSNR");

  // Exhaustive re-scan with an independent sampler.
  Rng rng(507);
  bool optimal = true;
  for (int trial = 0; trial < 3; ++trial) {
    const Frame a = testing::textured_frame(32, 32, rng.next());
    const Frame b = testing::shifted(testing::textured_frame(32, 32, rng.next()), rng.between(-3, 3), rng.between(-3, 3));
    const MotionEstimate e = mc_estimate(a, b);
    const auto sample = [&](int x, int y, int dx, int dy) {
      const int x2 = 2 * x - dx, y2 = 2 * y - dy;
      const int x0 = x2 >> 1, y0 = y2 >> 1, fx = x2 & 1, fy = y2 & 1;
      const int p00 = a.clamped(x0, y0), p10 = a.clamped(x0 + 1, y0), p01 = a.clamped(x0, y0 + 1),
                p11 = a.clamped(x0 + 1, y0 + 1);
      if (!fx && !fy) return p00;
      if (fx && !fy) return (p00 + p10 + 1) >> 1;
      if (!fx && fy) return (p00 + p01 + 1) >> 1;
      return (p00 + p10 + p01 + p11 + 2) >> 2;
    };
    for (int by = 0; by < e.field.rows; ++by)
      for (int bx = 0; bx < e.field.cols; ++bx) {
        const auto cost = [&](int dx, int dy) {
          std::int64_t s = 0;
          for (int y = by * 16; y < by * 16 + 16; ++y)
            for (int x = bx * 16; x < bx * 16 + 16; ++x) {
              const int d = sample(x, y, dx, dy) - b.at(x, y);
              s += d * d;
            }
          return s;
        };
        const MotionVector chosen = e.field.at(bx, by);
        const std::int64_t best = cost(chosen.dx, chosen.dy);
        for (int dy = -62; dy <= 62; dy += 2)
          for (int dx = -62; dx <= 62; dx += 2) optimal &= best <= cost(dx, dy);
      }
  }
  v.require(optimal, "no integer vector beats the chosen one");
  v.detail << "interior vectors (3,-2) px, interior SSE " << interior_sse << "; half-pel interior "
           << (std::isinf(half_db) ? std::string("inf") : format_fixed6(half_db)) << " dB >= " << kHalfPelMinDb
           << "; 32x32 re-scan optimal";
}

// 6. Closed-loop bit exactness.
void closed_loop(Verdict& v) {
  const auto clip = testing::panning_clip(64, 48, kClosedLoopFrames, 2, 1, 606);
  const auto generator = g_trained ? g_trained : std::make_shared<const Generator>(build_generator(GeneratorConfig::desk(), 607));
  const InternalBackend backend;
  std::vector<std::unique_ptr<Predictor>> predictors;
  predictors.push_back(std::make_unique<FdPredictor>());
  predictors.push_back(std::make_unique<McPredictor>());
  predictors.push_back(std::make_unique<LfpPredictor>(generator));
  int cases = 0;
  for (const auto& p : predictors) {
    for (int qp : {1, 25, 35}) {
      const auto enc = encode_video(clip, *p, backend, {.qp = qp});
      const auto dec = decode_video(enc.stream, {.generator = generator});
      v.require(dec == enc.reconstructions, predictor_name(p->kind()) + " qp " + std::to_string(qp) + " bit-exact");
      const auto report = stream_rate_report(enc.stream);
      v.require(report.total_bits() == 8 * enc.stream.size(), "rate accounting");
      if (p->kind() != PredictorKind::mc) v.require(report.mv_bits() == 0, "no motion bits");
      ++cases;
    }
  }
  v.detail << cases << " predictor/QP cases on " << kClosedLoopFrames << " frames bit-exact; FD and LFP 0 MV bits";
}

// 7. Rate behaviour of the internal codec.
void rate_behaviour(Verdict& v) {
  const auto clip = testing::panning_clip(96, 80, 16, 1, 1, 707);
  const RdCurve curve = rd_sweep(clip, FdPredictor{}, InternalBackend{}, {}, "fd");
  const RdPoint& q25 = curve.points.front();
  const RdPoint& q35 = curve.points.back();
  v.require(curve.points.size() == 11 && q25.qp == 25 && q35.qp == 35, "sweep QP 25..35");
  v.require(q35.bitrate_kbps < q25.bitrate_kbps, "bitrate falls with QP");
  v.require(q35.psnr_db < q25.psnr_db, "PSNR falls with QP");
  const Frame natural = testing::natural_frame(96, 80, 708);
  const InternalBackend backend;
  const double intra_db = psnr(backend.decode_intra(backend.encode_intra(natural, 1)), natural);
  v.require(intra_db >= kIntraMinDb, "QP 1 intra PSNR");
  v.detail << "QP25 " << format_fixed6(q25.bitrate_kbps) << " kbit/s " << format_fixed6(q25.psnr_db) << " dB; QP35 "
           << format_fixed6(q35.bitrate_kbps) << " kbit/s " << format_fixed6(q35.psnr_db) << " dB; QP1 intra "
           << format_fixed6(intra_db) << " dB";
}

double cubic_at(const std::array<double, 4>& c, double x) { return c[0] + x * (c[1] + x * (c[2] + x * c[3])); }

// 8. BD-PSNR against closed forms and numerical integration.
void bd_correctness(Verdict& v) {
  const RdCurve base{"a", {{25, 820.0, 37.9}, {28, 560.0, 36.2}, {31, 390.0, 34.1}, {35, 240.0, 31.7}}};
  const double same = bd_psnr(base, base);
  RdCurve lifted = base;
  for (auto& p : lifted.points) p.psnr_db += 1.0;
  const double offset = bd_psnr(lifted, base);
  v.require(std::abs(same) <= kBdZeroTolerance, "identical curves");
  v.require(std::abs(offset - 1.0) <= kBdOffsetTolerance, "+1 dB offset");

  Rng rng(808);
  double oracle_err = 0.0;
  double anti_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::array<double, 4> ct{}, ca{};
    for (auto& c : ct) c = rng.uniform(-2.0, 2.0);
    for (auto& c : ca) c = rng.uniform(-2.0, 2.0);
    RdCurve t{"t", {}}, a{"a", {}};
    for (int i = 0; i < 4; ++i) {
      const double xt = 2.0 + 0.4 * i + rng.uniform(-0.1, 0.1);
      const double xa = 2.1 + 0.4 * i + rng.uniform(-0.1, 0.1);
      t.points.push_back({i, std::pow(10.0, xt), cubic_at(ct, xt)});
      a.points.push_back({i, std::pow(10.0, xa), cubic_at(ca, xa)});
    }
    const double lo = std::max(std::log10(t.points.front().bitrate_kbps), std::log10(a.points.front().bitrate_kbps));
    const double hi = std::min(std::log10(t.points.back().bitrate_kbps), std::log10(a.points.back().bitrate_kbps));
    const double h = (hi - lo) / kBdOracleSamples;
    double area = 0.0;
    for (int i = 0; i <= kBdOracleSamples; ++i) {
      const double x = lo + h * i;
      area += (i == 0 || i == kBdOracleSamples ? 0.5 : 1.0) * (cubic_at(ct, x) - cubic_at(ca, x));
    }
    const double bd = bd_psnr(t, a);
    oracle_err = std::max(oracle_err, std::abs(bd - area * h / (hi - lo)));
    anti_err = std::max(anti_err, std::abs(bd + bd_psnr(a, t)));
  }
  v.require(oracle_err <= kBdOracleTolerance, "trapezoid oracle");
  v.require(anti_err <= kBdZeroTolerance, "antisymmetry");
  v.require(offset > 0.0, "better test curve is positive");
  v.detail << "identical " << sci(same) << ", offset " << format_fixed6(offset) << ", oracle err " << sci(oracle_err)
           << ", antisymmetry err " << sci(anti_err);
}

// 9. PSNR unit values.
void metric_units(Verdict& v) {
  const double zero = psnr(Frame(32, 32, 0), Frame(32, 32, 255));
  Frame a = testing::textured_frame(32, 32, 909);
  Frame b = a;
  for (auto& p : b.pixels) p = p == 255 ? 254 : p + 1;
  const double one = psnr(a, b);
  v.require(zero == 0.0, "all-0 vs all-255 is 0 dB");
  v.require(std::abs(one - kOneLevelDb) <= kOneLevelTolerance, "off-by-one frames");
  v.detail << "0/255 -> " << zero << " dB; off by one -> " << format_fixed6(one) << " dB";
}

// 10. MC beats FD under fast global motion.
void baseline_ordering(Verdict& v) {
  const auto clip = testing::panning_clip(96, 96, 10, kHighMotionPx, 0, 1010);
  const double fd = mean_psnr_from(prediction_curve(clip, FdPredictor{}), 1);
  const double mc = mean_psnr_from(prediction_curve(clip, McPredictor{}), 1);
  v.require(mc > fd, "MC above FD");
  v.detail << "MC " << format_fixed6(mc) << " dB vs FD " << format_fixed6(fd) << " dB";
}

}  // namespace
}  // namespace lfp

int main(int argc, char** argv) {
  using namespace lfp;
  const std::map<int, std::pair<const char*, std::function<void(Verdict&)>>> criteria{
      {1, {"gradient correctness", gradient_correctness}},
      {2, {"convolution oracle", convolution_oracle}},
      {3, {"desk-scale learning", desk_learning}},
      {4, {"adversarial plumbing", adversarial_plumbing}},
      {5, {"motion compensation exactness", mc_exactness}},
      {6, {"closed-loop bit exactness", closed_loop}},
      {7, {"rate behaviour", rate_behaviour}},
      {8, {"BD-PSNR correctness", bd_correctness}},
      {9, {"metric unit values", metric_units}},
      {10, {"baseline ordering", baseline_ordering}},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& [id, entry] : criteria) {
    if (!selected.empty() && !selected.contains(id)) continue;
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      entry.second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "[exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %d %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", id, entry.first, v.detail.str().c_str(), secs);
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
