#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lfp/nets/discriminator.hpp"
#include "lfp/nets/generator.hpp"

namespace lfp {

// Checkpoint layout (little-endian):
//   "LFPC", u16 version, u8 model kind (1 generator, 2 discriminator),
//   config block (u32 integers, f64 reals, in struct field order),
//   u64 parameter scalar count, f32 parameters in declaration order,
//   u64 FNV-1a checksum of every preceding byte.
enum class ModelKind : std::uint8_t { generator = 1, discriminator = 2 };

std::vector<std::uint8_t> serialize_checkpoint(const Generator& g);
std::vector<std::uint8_t> serialize_checkpoint(const Discriminator& d);

Generator parse_generator_checkpoint(std::span<const std::uint8_t> bytes);
Discriminator parse_discriminator_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Generator& g, const std::filesystem::path& path);
void save_checkpoint(const Discriminator& d, const std::filesystem::path& path);
Generator load_generator_checkpoint(const std::filesystem::path& path);
Discriminator load_discriminator_checkpoint(const std::filesystem::path& path);

// The stored checksum; identifies a model in video stream headers.
std::uint64_t checkpoint_digest(const Generator& g);
// Hash of the config block alone.
std::uint64_t config_hash(const GeneratorConfig& config);

}  // namespace lfp
