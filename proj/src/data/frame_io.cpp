#include "lfp/data/frame_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <regex>

#include "lfp/core/bytes.hpp"

namespace fs = std::filesystem;

namespace lfp {

namespace {

// Header tokens are separated by whitespace; '#' starts a comment to end of line.
class PgmHeaderReader {
 public:
  PgmHeaderReader(const std::vector<std::uint8_t>& bytes, const fs::path& path) : bytes_(bytes), path_(path) {}

  int next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) fail("expected a number");
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_++] - '0');
      if (value > 1 << 20) fail("header value too large");
    }
    return static_cast<int>(value);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail("missing separator before raster");
    return pos_ + 1;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw InputError("malformed PGM " + path_.string() + ": " + what);
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  const fs::path& path_;
  std::size_t pos_ = 2;
};

struct PatternParts {
  std::string prefix;
  std::string suffix;
  int width = 0;  // 0 means unpadded %d
};

PatternParts split_pattern(const std::string& pattern) {
  static const std::regex spec(R"(%(0?\d*)d)");
  std::smatch m;
  if (!std::regex_search(pattern, m, spec)) throw InputError("frame pattern lacks a %d field: " + pattern);
  PatternParts parts;
  parts.prefix = m.prefix().str();
  parts.suffix = m.suffix().str();
  if (parts.suffix.find('%') != std::string::npos) throw InputError("frame pattern has more than one field");
  const std::string digits = m[1].str();
  parts.width = digits.empty() ? 0 : std::stoi(digits);
  return parts;
}

std::string regex_escape(const std::string& s) {
  static const std::regex special(R"([.^$|()\[\]{}*+?\\])");
  return std::regex_replace(s, special, R"(\$&)");
}

}  // namespace

Frame read_pgm(const fs::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  PgmHeaderReader header(bytes, path);
  if (bytes.size() < 2 || bytes[0] != 'P') header.fail("missing magic");
  if (bytes[1] != '5') header.fail("only binary P5 is supported, found P" + std::string(1, static_cast<char>(bytes[1])));
  const int width = header.next_int();
  const int height = header.next_int();
  const int maxval = header.next_int();
  if (width <= 0 || height <= 0) header.fail("non-positive dimensions");
  if (maxval != 255) header.fail("maxval must be 255, got " + std::to_string(maxval));
  const std::size_t start = header.raster_start();
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() < start + count) header.fail("raster truncated");
  Frame frame(width, height);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(start), count, frame.pixels.begin());
  return frame;
}

void write_pgm(const fs::path& path, const Frame& frame) {
  const std::string header = "P5\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), frame.pixels.begin(), frame.pixels.end());
  write_file(path, bytes);
}

std::string format_frame_path(const std::string& pattern, int index) {
  const PatternParts parts = split_pattern(pattern);
  std::string number = std::to_string(index);
  if (static_cast<int>(number.size()) < parts.width) number.insert(0, parts.width - number.size(), '0');
  return parts.prefix + number + parts.suffix;
}

std::vector<Frame> load_frames(const std::string& source) {
  std::vector<fs::path> files;
  if (fs::is_directory(source)) {
    for (const auto& entry : fs::directory_iterator(source)) {
      if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    const PatternParts parts = split_pattern(source);
    const std::size_t slash = parts.prefix.rfind('/');
    const fs::path dir = slash == std::string::npos ? fs::path(".") : fs::path(parts.prefix.substr(0, slash + 1));
    const std::string name_prefix = slash == std::string::npos ? parts.prefix : parts.prefix.substr(slash + 1);
    if (parts.suffix.find('/') != std::string::npos) throw InputError("frame pattern field must be in the file name");
    const std::string digits = parts.width > 0 ? "(\\d{" + std::to_string(parts.width) + ",})" : "(\\d+)";
    const std::regex name_re(regex_escape(name_prefix) + digits + regex_escape(parts.suffix));
    std::vector<std::pair<long, fs::path>> indexed;
    if (fs::is_directory(dir)) {
      for (const auto& entry : fs::directory_iterator(dir)) {
        std::smatch m;
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && std::regex_match(name, m, name_re)) {
          indexed.emplace_back(std::stol(m[1].str()), entry.path());
        }
      }
    }
    std::sort(indexed.begin(), indexed.end());
    for (auto& [index, path] : indexed) files.push_back(path);
  }
  if (files.empty()) throw InputError("no frames found for " + source);

  std::vector<Frame> frames;
  frames.reserve(files.size());
  for (const auto& file : files) {
    frames.push_back(read_pgm(file));
    if (!frames.back().same_size(frames.front())) {
      throw InputError("frame " + file.string() + " is " + std::to_string(frames.back().width) + "x" +
                       std::to_string(frames.back().height) + ", expected " + std::to_string(frames.front().width) +
                       "x" + std::to_string(frames.front().height));
    }
  }
  return frames;
}

std::vector<Frame> load_raw_y(const fs::path& path, int width, int height) {
  if (width <= 0 || height <= 0) throw InputError("raw Y input needs positive dimensions");
  const std::vector<std::uint8_t> bytes = read_file(path);
  const std::size_t plane = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.empty() || bytes.size() % plane != 0) {
    throw InputError("raw Y file " + path.string() + " is not a whole number of " + std::to_string(width) + "x" +
                     std::to_string(height) + " frames");
  }
  std::vector<Frame> frames;
  for (std::size_t off = 0; off < bytes.size(); off += plane) {
    Frame f(width, height);
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(off), plane, f.pixels.begin());
    frames.push_back(std::move(f));
  }
  return frames;
}

void write_raw_y(const fs::path& path, const std::vector<Frame>& frames) {
  std::vector<std::uint8_t> bytes;
  for (const auto& f : frames) bytes.insert(bytes.end(), f.pixels.begin(), f.pixels.end());
  write_file(path, bytes);
}

void write_frames(const std::string& pattern, const std::vector<Frame>& frames, int first_index) {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    write_pgm(format_frame_path(pattern, first_index + static_cast<int>(i)), frames[i]);
  }
}

}  // namespace lfp
