#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>

#include "lfp/codec/residual.hpp"
#include "lfp/core/bytes.hpp"
#include "lfp/data/frame_io.hpp"

namespace lfp {

namespace {

namespace fs = std::filesystem;

class ScratchDir {
 public:
  ScratchDir() {
    static std::atomic<unsigned> counter{0};
    path_ = fs::temp_directory_path() /
            ("lfp-ext-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  fs::path file(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

std::string substitute(std::string templ, const fs::path& in, const fs::path& out, int qp) {
  const std::pair<std::string, std::string> keys[] = {
      {"{in}", shell_quote(in.string())}, {"{out}", shell_quote(out.string())}, {"{qp}", std::to_string(qp)}};
  for (const auto& [key, value] : keys) {
    for (std::size_t pos = templ.find(key); pos != std::string::npos; pos = templ.find(key, pos + value.size())) {
      templ.replace(pos, key.size(), value);
    }
  }
  return templ;
}

void run(const std::string& command, const fs::path& expected_output) {
  const int status = std::system(command.c_str());
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw BackendError("external codec command failed (status " + std::to_string(status) + "): " + command);
  }
  if (!fs::exists(expected_output)) throw BackendError("external codec produced no output file: " + command);
}

std::vector<std::uint8_t> encode_image(const ExternalCommands& cmds, const Frame& image, int qp) {
  check_qp(qp);
  ScratchDir dir;
  const fs::path in = dir.file("in.pgm");
  const fs::path out = dir.file("out.bin");
  write_pgm(in, image);
  run(substitute(cmds.encode, in, out, qp), out);
  return read_file(out);
}

Frame decode_image(const ExternalCommands& cmds, std::span<const std::uint8_t> stream) {
  ScratchDir dir;
  const fs::path in = dir.file("in.bin");
  const fs::path out = dir.file("out.pgm");
  write_file(in, stream);
  run(substitute(cmds.decode, in, out, 0), out);
  try {
    return read_pgm(out);
  } catch (const InputError& e) {
    throw BackendError(std::string("external decoder output unreadable: ") + e.what());
  }
}

}  // namespace

ExternalCommands parse_external_commands(const std::string& spec) {
  const auto sep = spec.find(";;");
  if (sep == std::string::npos) throw ConfigError("external codec spec needs 'encode ;; decode'");
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  ExternalCommands cmds{trim(spec.substr(0, sep)), trim(spec.substr(sep + 2))};
  if (cmds.encode.empty() || cmds.decode.empty()) throw ConfigError("external codec commands must not be empty");
  return cmds;
}

ExternalBackend::ExternalBackend(ExternalCommands commands) : commands_(std::move(commands)) {
  Frame probe(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) probe.at(x, y) = static_cast<std::uint8_t>(16 * x + y);
  const auto first = encode_image(commands_, probe, 30);
  const auto second = encode_image(commands_, probe, 30);
  if (first != second) throw BackendError("external codec is not deterministic on the probe image");
  const Frame back = decode_image(commands_, first);
  if (!back.same_size(probe)) throw BackendError("external codec probe round trip changed the image size");
}

std::vector<std::uint8_t> ExternalBackend::encode_residual(const ResidualImage& residual, int qp) const {
  Frame mapped(residual.width, residual.height);
  for (std::size_t i = 0; i < mapped.pixels.size(); ++i) mapped.pixels[i] = residual_to_byte(residual.values[i]);
  return encode_image(commands_, mapped, qp);
}

ResidualImage ExternalBackend::decode_residual(std::span<const std::uint8_t> stream) const {
  const Frame mapped = decode_image(commands_, stream);
  ResidualImage out(mapped.width, mapped.height);
  for (std::size_t i = 0; i < mapped.pixels.size(); ++i) {
    out.values[i] = static_cast<std::int16_t>(byte_to_residual(mapped.pixels[i]));
  }
  return out;
}

std::vector<std::uint8_t> ExternalBackend::encode_intra(const Frame& frame, int qp) const {
  return encode_image(commands_, frame, qp);
}

Frame ExternalBackend::decode_intra(std::span<const std::uint8_t> stream) const {
  return decode_image(commands_, stream);
}

}  // namespace lfp
