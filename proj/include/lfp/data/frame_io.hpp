#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lfp/data/frame.hpp"

namespace lfp {

// Binary PGM (P5) with maxval 255. Anything else is an InputError.
Frame read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Frame& frame);

// Loads a frame sequence. `source` is either a directory (every *.pgm inside,
// sorted by name) or a printf-style pattern such as "clip/%03d.pgm" (every
// existing match, sorted by index). All frames must share one size.
std::vector<Frame> load_frames(const std::string& source);

// Raw concatenated 8-bit Y planes of the given size.
std::vector<Frame> load_raw_y(const std::filesystem::path& path, int width, int height);
void write_raw_y(const std::filesystem::path& path, const std::vector<Frame>& frames);

// Expands a %d / %0Nd pattern for one index.
std::string format_frame_path(const std::string& pattern, int index);

// Writes frames as pattern(first_index), pattern(first_index + 1), ...
void write_frames(const std::string& pattern, const std::vector<Frame>& frames, int first_index = 0);

}  // namespace lfp
