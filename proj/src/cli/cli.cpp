#include "lfp/cli/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "lfp/codec/video.hpp"
#include "lfp/core/bytes.hpp"
#include "lfp/data/frame_io.hpp"
#include "lfp/metrics/metrics.hpp"
#include "lfp/nets/checkpoint.hpp"
#include "lfp/train/trainer.hpp"

namespace lfp {

namespace {

struct Common {
  unsigned threads = 0;
  bool print_config = false;
};

struct Dimensions {
  int width = 0;
  int height = 0;
};

Dimensions parse_size(const std::string& text) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t used_w = 0, used_h = 0;
    const std::string w = text.substr(0, x), h = text.substr(x + 1);
    Dimensions d{std::stoi(w, &used_w), std::stoi(h, &used_h)};
    if (used_w != w.size() || used_h != h.size() || d.width < 1 || d.height < 1) throw std::invalid_argument(text);
    return d;
  } catch (const std::exception&) {
    throw UsageError("--size expects WIDTHxHEIGHT, got '" + text + "'");
  }
}

struct FrameRate {
  std::uint32_t num = 25;
  std::uint32_t den = 1;
};

FrameRate parse_fps(const std::string& text) {
  try {
    const auto slash = text.find('/');
    const std::string num = text.substr(0, slash);
    const std::string den = slash == std::string::npos ? "1" : text.substr(slash + 1);
    std::size_t used_n = 0, used_d = 0;
    const unsigned long n = std::stoul(num, &used_n);
    const unsigned long d = std::stoul(den, &used_d);
    if (used_n != num.size() || used_d != den.size() || n == 0 || d == 0 || n > 0xffffffffUL || d > 0xffffffffUL) {
      throw std::invalid_argument(text);
    }
    return {static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(d)};
  } catch (const std::exception&) {
    throw UsageError("--fps expects a positive integer or NUM/DEN, got '" + text + "'");
  }
}

bool is_raw_path(const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  return ext == ".y" || ext == ".yuv";
}

std::vector<Frame> read_input(const std::string& source, const std::string& size) {
  if (is_raw_path(source)) {
    if (size.empty()) throw UsageError("raw input " + source + " needs --size WIDTHxHEIGHT");
    const Dimensions d = parse_size(size);
    return load_raw_y(source, d.width, d.height);
  }
  return load_frames(source);
}

void write_output(const std::string& target, const std::vector<Frame>& frames) {
  if (is_raw_path(target)) {
    write_raw_y(target, frames);
  } else {
    write_frames(target, frames);
  }
}

std::shared_ptr<const Generator> load_generator(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_shared<const Generator>(load_generator_checkpoint(path));
}

std::unique_ptr<Predictor> make_predictor(const std::string& name, const std::string& checkpoint, unsigned threads) {
  switch (parse_predictor(name)) {
    case PredictorKind::fd: return std::make_unique<FdPredictor>();
    case PredictorKind::mc: return std::make_unique<McPredictor>(threads);
    case PredictorKind::lfp:
      if (checkpoint.empty()) throw UsageError("the lfp predictor needs --checkpoint");
      return std::make_unique<LfpPredictor>(load_generator(checkpoint));
  }
  throw UsageError("unknown predictor " + name);
}

struct ExternalFlags {
  std::string encode;
  std::string decode;
};

// Flags first, then LFP_EXTERNAL_CODEC ("<encode> ;; <decode>").
std::optional<ExternalCommands> external_commands(const ExternalFlags& flags) {
  if (!flags.encode.empty() || !flags.decode.empty()) {
    if (flags.encode.empty() || flags.decode.empty()) {
      throw ConfigError("--external-encode and --external-decode must be given together");
    }
    return ExternalCommands{flags.encode, flags.decode};
  }
  if (const char* env = std::getenv("LFP_EXTERNAL_CODEC"); env && *env) return parse_external_commands(env);
  return std::nullopt;
}

std::unique_ptr<ResidualBackend> make_backend(const std::string& name, const ExternalFlags& flags) {
  if (name == "internal") return std::make_unique<InternalBackend>();
  if (name == "external") {
    const auto commands = external_commands(flags);
    if (!commands) {
      throw ConfigError("external backend needs --external-encode/--external-decode or LFP_EXTERNAL_CODEC");
    }
    return std::make_unique<ExternalBackend>(*commands);
  }
  throw UsageError("unknown backend '" + name + "' (expected internal or external)");
}

void add_external_flags(CLI::App* cmd, ExternalFlags& flags) {
  cmd->add_option("--external-encode", flags.encode,
                  "External codec encode command with {in}, {out}, {qp} placeholders");
  cmd->add_option("--external-decode", flags.decode, "External codec decode command with {in}, {out} placeholders");
}

void write_size_report(const std::filesystem::path& path, const RateReport& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << "frame,type,mv_bits,residual_bits,framing_bits,total_bits\n";
  for (const auto& f : report.frames) {
    out << f.index << ',' << (f.type == ChunkType::intra ? "intra" : "residual") << ',' << f.mv_bits << ','
        << f.residual_bits << ',' << f.framing_bits << ',' << f.total_bits() << '\n';
  }
  out << "header,,,,," << report.header_bits << '\n';
  if (!out.flush()) throw InputError("failed writing " + path.string());
}

GeneratorConfig generator_config_from(int frames, int channels, int blocks, int kernel, double scale) {
  GeneratorConfig cfg{frames, channels, blocks, kernel, scale};
  cfg.validate();
  return cfg;
}

struct GeneratorShape {
  int frames = 8;
  int channels = 256;
  int blocks = 32;
  int kernel = 3;
  double scale = 0.1;
  GeneratorConfig config() const { return generator_config_from(frames, channels, blocks, kernel, scale); }
};

struct ExtractFlags {
  std::vector<std::string> inputs;
  std::string size;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  double threshold = 7.0;
  double ignore_prob = 0.05;
  std::string out;
};

struct MseFlags {
  std::string data, out, init, log;
  std::uint64_t seed = 0;
  std::int64_t steps = 0;
  TrainConfigMSE cfg;
};

struct GanFlags {
  std::string data, checkpoint, out, disc_out, log, disc_log;
  std::uint64_t seed = 0;
  std::int64_t steps = 0;
  TrainConfigGAN cfg;
  DiscriminatorConfig disc;
};

struct ClipInput {
  std::string source;
  std::string size;
};

struct PredictorFlags {
  std::string name;
  std::string checkpoint;
};

struct CodecFlags {
  int intra_frames = kDefaultIntraFrames;
  std::string fps = "25";
  std::string backend = "internal";
  ExternalFlags external;
};

struct PredictFlags {
  ClipInput in;
  PredictorFlags predictor;
  std::string out;
};

struct EncodeFlags {
  ClipInput in;
  PredictorFlags predictor;
  int qp = 30;
  CodecFlags codec;
  std::string out, report, recon;
};

struct DecodeFlags {
  std::string in, checkpoint, out;
  ExternalFlags external;
};

struct EvalFlags {
  ClipInput in;
  PredictorFlags predictor;
  std::string out;
};

struct SweepFlags {
  ClipInput in;
  PredictorFlags predictor;
  std::vector<int> qps = default_qp_sweep();
  CodecFlags codec;
  std::string label, out;
};

struct BdFlags {
  std::string test, anchor, out;
};

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) { build(); }

  int run(int argc, const char* const* argv) {
    try {
      try {
        for (int i = 1; i < argc; ++i) {
          if (std::string_view(argv[i]) == "--print-config") relax_required();
        }
        app_.parse(argc, argv);
      } catch (const CLI::CallForHelp& e) {
        return app_.exit(e, out_, err_);
      } catch (const CLI::CallForAllHelp& e) {
        return app_.exit(e, out_, err_);
      } catch (const CLI::CallForVersion& e) {
        return app_.exit(e, out_, err_);
      } catch (const CLI::ParseError& e) {
        err_ << "ERROR:usage:" << e.what() << '\n';
        return exit_code_for(ErrorCategory::usage);
      }
      CLI::App* selected = app_.get_subcommands().front();
      if (common_.print_config) {
        out_ << "threads=" << common_.threads << "\n[" << selected->get_name() << "]\n";
        std::istringstream lines(selected->config_to_str(true, false));
        for (std::string line; std::getline(lines, line);) {
          if (!line.ends_with("=\"\"")) out_ << line << '\n';
        }
        return 0;
      }
      actions_.at(selected->get_name())();
      return 0;
    } catch (const Error& e) {
      err_ << "ERROR:" << category_name(e.category()) << ':' << e.what() << '\n';
      return exit_code_for(e.category());
    } catch (const std::bad_alloc&) {
      err_ << "ERROR:numeric:out of memory\n";
      return exit_code_for(ErrorCategory::numeric);
    } catch (const std::exception& e) {
      err_ << "ERROR:input:" << e.what() << '\n';
      return exit_code_for(ErrorCategory::input);
    }
  }

 private:
  // Lets --print-config show defaults without the mandatory inputs.
  void relax_required() {
    for (CLI::App* cmd : app_.get_subcommands({})) {
      for (CLI::Option* opt : cmd->get_options()) opt->required(false);
    }
  }

  CLI::App* command(const std::string& name, const std::string& description, std::function<void()> action) {
    CLI::App* cmd = app_.add_subcommand(name, description);
    cmd->allow_config_extras(CLI::config_extras_mode::error);
    actions_[name] = std::move(action);
    return cmd;
  }

  void build() {
    app_.description("Learned frame prediction for video coding");
    app_.set_config("--config", "", "Read option values from a TOML file; command-line flags take precedence");
    app_.allow_config_extras(CLI::config_extras_mode::error);
    app_.add_option("--threads", common_.threads, "Worker threads (0: all cores; 1: sequential reference)")
        ->capture_default_str();
    app_.add_flag("--print-config", common_.print_config, "Print the resolved options of the command and exit");
    app_.require_subcommand(1, 1);
    app_.fallthrough();
    add_extract();
    add_train_mse();
    add_train_gan();
    add_predict();
    add_encode();
    add_decode();
    add_eval_predict();
    add_rd_sweep();
    add_bd_psnr();
  }

  void add_extract() {
    auto* o = &extract_;
    auto* cmd = command("extract-dataset", "Extract motion-gated 9-frame patch samples into a dataset file",
                        [this] { run_extract(); });
    cmd->add_option("--in", o->inputs, "Input clips: frame pattern (%03d), directory of PGMs, or raw .y file")
        ->required();
    cmd->add_option("--size", o->size, "Frame size WIDTHxHEIGHT for raw .y inputs");
    cmd->add_option("--count", o->count, "Samples to extract, split evenly over the clips")->required();
    cmd->add_option("--seed", o->seed, "Random seed")->required();
    cmd->add_option("--threshold", o->threshold, "Minimum mean square difference between consecutive patches")
        ->capture_default_str();
    cmd->add_option("--ignore-prob", o->ignore_prob, "Probability of skipping the motion test")->capture_default_str();
    cmd->add_option("--out", o->out, "Output dataset file")->required();
  }

  void run_extract() {
    const auto& o = extract_;
    if (o.count == 0) throw UsageError("--count must be positive");
    std::vector<PatchSample> all;
    bool short_count = false;
    for (std::size_t i = 0; i < o.inputs.size(); ++i) {
      const auto clip = read_input(o.inputs[i], o.size);
      const std::size_t share = o.count / o.inputs.size() + (i < o.count % o.inputs.size() ? 1 : 0);
      if (share == 0) continue;
      auto result = extract_patch_samples(
          clip, {.count = share, .seed = o.seed + i, .threshold = o.threshold, .ignore_prob = o.ignore_prob});
      short_count |= result.short_count;
      all.insert(all.end(), result.samples.begin(), result.samples.end());
    }
    store_dataset(all, o.out);
    out_ << "samples " << all.size() << '\n';
    if (short_count) err_ << "warning: retry cap reached; wrote " << all.size() << " of " << o.count << " samples\n";
  }

  void add_generator_shape(CLI::App* cmd) {
    auto* g = &gen_shape_;
    cmd->add_option("--frames", g->frames, "Generator input frames N")->capture_default_str();
    cmd->add_option("--channels", g->channels, "Generator feature channels")->capture_default_str();
    cmd->add_option("--blocks", g->blocks, "Generator residual blocks")->capture_default_str();
    cmd->add_option("--kernel", g->kernel, "Generator kernel size (odd)")->capture_default_str();
    cmd->add_option("--residual-scale", g->scale, "Residual block output scale")->capture_default_str();
  }

  void add_train_mse() {
    auto* o = &mse_;
    auto* cmd = command("train-mse", "Train a generator on mean-square error", [this] { run_train_mse(); });
    cmd->add_option("--data", o->data, "Dataset file")->required();
    cmd->add_option("--out", o->out, "Output generator checkpoint")->required();
    cmd->add_option("--seed", o->seed, "Random seed (initialization and minibatches)")->required();
    cmd->add_option("--steps", o->steps, "Training steps")->required();
    cmd->add_option("--init", o->init, "Continue from this generator checkpoint instead of a fresh network");
    add_generator_shape(cmd);
    cmd->add_option("--lr", o->cfg.lr0, "Initial learning rate")->capture_default_str();
    cmd->add_option("--batch", o->cfg.batch, "Minibatch size")->capture_default_str();
    cmd->add_option("--plateau-window", o->cfg.plateau_window, "Steps without improvement before decaying")
        ->capture_default_str();
    cmd->add_option("--lr-factor", o->cfg.lr_factor, "Learning-rate decay factor")->capture_default_str();
    cmd->add_option("--smoothing", o->cfg.smoothing, "Loss moving-average window")->capture_default_str();
    cmd->add_option("--checkpoint-every", o->cfg.checkpoint_every, "Save every this many steps (0: only at the end)")
        ->capture_default_str();
    cmd->add_option("--log", o->log, "Training log CSV (step,loss,lr,wall_ms)");
  }

  void run_train_mse() {
    auto& o = mse_;
    const auto dataset = load_dataset(o.data);
    Generator g = o.init.empty() ? build_generator(gen_shape_.config(), o.seed) : load_generator_checkpoint(o.init);
    TrainConfigMSE cfg = o.cfg;
    cfg.steps = o.steps;
    cfg.threads = common_.threads;
    cfg.checkpoint_path = o.out;
    const TrainLog log = train_mse(g, dataset, cfg, o.seed);
    save_checkpoint(g, o.out);
    if (!o.log.empty()) log.write_csv(o.log);
    out_ << "final_loss " << format_fixed6(log.smoothed(log.records.size() - 1, cfg.smoothing)) << '\n';
  }

  void add_train_gan() {
    auto* o = &gan_;
    auto* cmd = command("train-gan", "Fine-tune a pretrained generator against a discriminator",
                        [this] { run_train_gan(); });
    cmd->add_option("--data", o->data, "Dataset file")->required();
    cmd->add_option("--checkpoint", o->checkpoint, "Pretrained generator checkpoint");
    cmd->add_option("--out", o->out, "Output generator checkpoint")->required();
    cmd->add_option("--disc-out", o->disc_out, "Output discriminator checkpoint")->required();
    cmd->add_option("--seed", o->seed, "Random seed (discriminator init and minibatches)")->required();
    cmd->add_option("--steps", o->steps, "Training steps")->required();
    cmd->add_option("--lambda-ms", o->cfg.lambda_ms, "Weight of the mean-square term")->capture_default_str();
    cmd->add_option("--lambda-adv", o->cfg.lambda_adv, "Weight of the adversarial term")->capture_default_str();
    cmd->add_option("--gen-batch", o->cfg.gen_batch, "Generator minibatch size")->capture_default_str();
    cmd->add_option("--disc-batch", o->cfg.disc_batch, "Discriminator minibatch size (half real, half generated)")
        ->capture_default_str();
    cmd->add_option("--gen-lr", o->cfg.gen_lr, "Generator learning rate")->capture_default_str();
    cmd->add_option("--disc-lr", o->cfg.disc_lr, "Discriminator learning rate")->capture_default_str();
    cmd->add_option("--disc-hidden1", o->disc.hidden1, "Discriminator first-layer channels")->capture_default_str();
    cmd->add_option("--disc-hidden2", o->disc.hidden2, "Discriminator second-layer channels")->capture_default_str();
    cmd->add_option("--checkpoint-every", o->cfg.checkpoint_every, "Save every this many steps (0: only at the end)")
        ->capture_default_str();
    cmd->add_option("--log", o->log, "Generator log CSV");
    cmd->add_option("--disc-log", o->disc_log, "Discriminator log CSV");
  }

  void run_train_gan() {
    auto& o = gan_;
    if (o.checkpoint.empty()) throw ConfigError("train-gan needs a pretrained generator (--checkpoint)");
    const auto dataset = load_dataset(o.data);
    Generator g = load_generator_checkpoint(o.checkpoint);
    Discriminator d = build_discriminator(o.disc, o.seed);
    TrainConfigGAN cfg = o.cfg;
    cfg.steps = o.steps;
    cfg.threads = common_.threads;
    cfg.checkpoint_path = o.out;
    const GanLog log = train_adversarial(g, d, dataset, cfg, o.seed);
    save_checkpoint(g, o.out);
    save_checkpoint(d, o.disc_out);
    if (!o.log.empty()) log.generator.write_csv(o.log);
    if (!o.disc_log.empty()) log.discriminator.write_csv(o.disc_log);
    out_ << "final_generator_loss " << format_fixed6(log.generator.records.back().loss) << '\n'
         << "final_discriminator_loss " << format_fixed6(log.discriminator.records.back().loss) << '\n';
  }

  void add_clip_input(CLI::App* cmd, ClipInput& in) {
    cmd->add_option("--in", in.source, "Input frames: pattern (%03d), directory of PGMs, or raw .y file")->required();
    cmd->add_option("--size", in.size, "Frame size WIDTHxHEIGHT for raw .y input");
  }

  void add_predictor_flags(CLI::App* cmd, PredictorFlags& p, bool required) {
    auto* opt = cmd->add_option("--predictor", p.name, "Predictor: fd, mc or lfp")
                    ->check(CLI::IsMember({"fd", "mc", "lfp"}));
    if (required) opt->required();
    cmd->add_option("--checkpoint", p.checkpoint, "Generator checkpoint (lfp predictor)");
  }

  void add_predict() {
    auto* o = &predict_;
    auto* cmd = command("predict", "Predict every frame from the original frames before it", [this] { run_predict(); });
    add_clip_input(cmd, o->in);
    add_predictor_flags(cmd, o->predictor, true);
    cmd->add_option("--out", o->out, "Output pattern (%03d, indexed by target frame) or raw .y file")->required();
  }

  void run_predict() {
    const auto& o = predict_;
    const auto frames = read_input(o.in.source, o.in.size);
    const auto predictor = make_predictor(o.predictor.name, o.predictor.checkpoint, common_.threads);
    const auto history = static_cast<std::size_t>(predictor->history_length());
    if (frames.size() <= history) throw InputError("clip is too short for the predictor history");
    std::vector<Frame> predicted;
    for (std::size_t t = history; t < frames.size(); ++t) {
      predicted.push_back(predictor->predict(std::span(frames).subspan(t - history, history), frames[t]).frame);
    }
    if (is_raw_path(o.out)) {
      write_raw_y(o.out, predicted);
    } else {
      write_frames(o.out, predicted, static_cast<int>(history));
    }
    out_ << "predicted " << predicted.size() << '\n';
  }

  void add_codec_flags(CLI::App* cmd, CodecFlags& c) {
    cmd->add_option("--k", c.intra_frames, "Intra-coded warm-up frames K")->capture_default_str();
    cmd->add_option("--fps", c.fps, "Frame rate, integer or NUM/DEN")->capture_default_str();
    cmd->add_option("--backend", c.backend, "Residual codec: internal or external")
        ->check(CLI::IsMember({"internal", "external"}))
        ->capture_default_str();
    add_external_flags(cmd, c.external);
  }

  void add_encode() {
    auto* o = &encode_;
    auto* cmd = command("encode", "Encode a clip into a bitstream", [this] { run_encode(); });
    add_clip_input(cmd, o->in);
    add_predictor_flags(cmd, o->predictor, true);
    cmd->add_option("--qp", o->qp, "Quantization parameter 1..51")->capture_default_str();
    add_codec_flags(cmd, o->codec);
    cmd->add_option("--out", o->out, "Output bitstream")->required();
    cmd->add_option("--report", o->report, "Per-frame size report CSV");
    cmd->add_option("--recon", o->recon, "Write the encoder's reconstructions (pattern or raw .y)");
  }

  void run_encode() {
    const auto& o = encode_;
    const auto frames = read_input(o.in.source, o.in.size);
    const auto predictor = make_predictor(o.predictor.name, o.predictor.checkpoint, common_.threads);
    const auto backend = make_backend(o.codec.backend, o.codec.external);
    const FrameRate fps = parse_fps(o.codec.fps);
    const auto enc = encode_video(frames, *predictor, *backend,
                                  {.qp = o.qp, .intra_frames = o.codec.intra_frames, .fps_num = fps.num,
                                   .fps_den = fps.den});
    write_file(o.out, enc.stream);
    if (!o.report.empty()) write_size_report(o.report, enc.report);
    if (!o.recon.empty()) write_output(o.recon, enc.reconstructions);
    std::vector<std::uint64_t> bits;
    for (const auto& f : enc.report.frames) bits.push_back(f.total_bits());
    out_ << "bytes " << enc.stream.size() << '\n'
         << "mv_bits " << enc.report.mv_bits() << '\n'
         << "bitrate_kbps " << format_fixed6(bitrate_kbps(bits, static_cast<double>(fps.num) / fps.den)) << '\n';
  }

  void add_decode() {
    auto* o = &decode_;
    auto* cmd = command("decode", "Decode a bitstream into frames", [this] { run_decode(); });
    cmd->add_option("--in", o->in, "Input bitstream")->required();
    cmd->add_option("--checkpoint", o->checkpoint, "Generator checkpoint for lfp streams");
    cmd->add_option("--out", o->out, "Output pattern (%03d) or raw .y file")->required();
    add_external_flags(cmd, o->external);
  }

  void run_decode() {
    const auto& o = decode_;
    const auto stream = read_file(o.in);
    const VideoHeader header = parse_video_header(stream);
    DecodeSources sources;
    sources.threads = common_.threads;
    if (header.predictor == PredictorKind::lfp) {
      if (o.checkpoint.empty()) throw ModelError("stream needs a generator checkpoint (--checkpoint)");
      sources.generator = load_generator(o.checkpoint);
    }
    std::unique_ptr<ResidualBackend> external;
    if (header.backend == BackendKind::external) {
      external = make_backend("external", o.external);
      sources.external = external.get();
    }
    const auto frames = decode_video(stream, sources);
    write_output(o.out, frames);
    out_ << "frames " << frames.size() << '\n';
  }

  void add_eval_predict() {
    auto* o = &eval_;
    auto* cmd = command("eval-predict", "Per-frame prediction PSNR from original history", [this] { run_eval(); });
    add_clip_input(cmd, o->in);
    add_predictor_flags(cmd, o->predictor, true);
    cmd->add_option("--out", o->out, "Output CSV (frame,psnr_db)")->required();
  }

  void run_eval() {
    const auto& o = eval_;
    const auto frames = read_input(o.in.source, o.in.size);
    const auto predictor = make_predictor(o.predictor.name, o.predictor.checkpoint, common_.threads);
    const auto curve = prediction_curve(frames, *predictor);
    write_prediction_curve_csv(o.out, curve);
    std::vector<double> values;
    for (const auto& s : curve) values.push_back(s.psnr);
    out_ << "mean_psnr_db " << format_fixed6(mean_capped_psnr(values)) << " (per-frame cap " << kPsnrCapDb << ")\n";
  }

  void add_rd_sweep() {
    auto* o = &sweep_;
    auto* cmd = command("rd-sweep", "Rate-distortion curve over a list of QPs", [this] { run_sweep(); });
    add_clip_input(cmd, o->in);
    add_predictor_flags(cmd, o->predictor, true);
    cmd->add_option("--qps", o->qps, "QP list")->capture_default_str()->delimiter(',');
    add_codec_flags(cmd, o->codec);
    cmd->add_option("--label", o->label, "Curve label (default: predictor name)");
    cmd->add_option("--out", o->out, "Output CSV (label,qp,bitrate_kbps,psnr_db)")->required();
  }

  void run_sweep() {
    const auto& o = sweep_;
    const auto frames = read_input(o.in.source, o.in.size);
    const auto predictor = make_predictor(o.predictor.name, o.predictor.checkpoint, 1);
    const auto backend = make_backend(o.codec.backend, o.codec.external);
    const FrameRate fps = parse_fps(o.codec.fps);
    RdSweepOptions options;
    options.qps = o.qps;
    options.intra_frames = o.codec.intra_frames;
    options.fps_num = fps.num;
    options.fps_den = fps.den;
    options.threads = common_.threads;
    const RdCurve curve = rd_sweep(frames, *predictor, *backend, options, o.label.empty() ? o.predictor.name : o.label);
    write_curve_csv(o.out, std::span(&curve, 1));
    for (const auto& p : curve.points) {
      out_ << p.qp << ' ' << format_fixed6(p.bitrate_kbps) << ' ' << format_fixed6(p.psnr_db) << '\n';
    }
  }

  void add_bd_psnr() {
    auto* o = &bd_;
    auto* cmd = command("bd-psnr", "Bjontegaard delta PSNR of a test curve over an anchor", [this] { run_bd(); });
    cmd->add_option("--test", o->test, "Test curve CSV")->required();
    cmd->add_option("--anchor", o->anchor, "Anchor curve CSV")->required();
    cmd->add_option("--out", o->out, "Report CSV (test,anchor,bd_psnr_db)");
  }

  void run_bd() {
    const auto& o = bd_;
    const RdCurve test = import_curve_csv(o.test);
    const RdCurve anchor = import_curve_csv(o.anchor);
    const double bd = bd_psnr(test, anchor);
    if (!o.out.empty()) {
      const BdEntry entry{test.label, anchor.label, bd};
      write_bd_report_csv(o.out, std::span(&entry, 1));
    }
    out_ << format_fixed6(bd) << '\n';
  }

  std::ostream& out_;
  std::ostream& err_;
  CLI::App app_{"lfp", "lfp"};
  std::map<std::string, std::function<void()>> actions_;
  Common common_;
  GeneratorShape gen_shape_;
  ExtractFlags extract_;
  MseFlags mse_;
  GanFlags gan_;
  PredictFlags predict_;
  EncodeFlags encode_;
  DecodeFlags decode_;
  EvalFlags eval_;
  SweepFlags sweep_;
  BdFlags bd_;
};

}  // namespace

int exit_code_for(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::usage:
    case ErrorCategory::config: return 1;
    case ErrorCategory::input:
    case ErrorCategory::parse:
    case ErrorCategory::decode:
    case ErrorCategory::integrity:
    case ErrorCategory::dimension:
    case ErrorCategory::domain: return 2;
    case ErrorCategory::numeric:
    case ErrorCategory::backend:
    case ErrorCategory::model: return 3;
  }
  return 3;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Cli cli(out, err);
  return cli.run(argc, argv);
}

}  // namespace lfp
