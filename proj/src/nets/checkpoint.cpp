#include "lfp/nets/checkpoint.hpp"

#include "lfp/core/bytes.hpp"

namespace lfp {

namespace {

constexpr std::uint16_t kCheckpointVersion = 1;

void put_config(ByteWriter& w, const GeneratorConfig& c) {
  w.put_u32(static_cast<std::uint32_t>(c.input_frames));
  w.put_u32(static_cast<std::uint32_t>(c.channels));
  w.put_u32(static_cast<std::uint32_t>(c.residual_blocks));
  w.put_u32(static_cast<std::uint32_t>(c.kernel));
  w.put_f64(c.residual_scale);
}

void put_config(ByteWriter& w, const DiscriminatorConfig& c) {
  w.put_u32(static_cast<std::uint32_t>(c.input_frames));
  w.put_u32(static_cast<std::uint32_t>(c.patch_size));
  w.put_u32(static_cast<std::uint32_t>(c.kernel));
  w.put_u32(static_cast<std::uint32_t>(c.hidden1));
  w.put_u32(static_cast<std::uint32_t>(c.hidden2));
  w.put_f64(c.leaky_slope);
}

int get_int(ByteReader& r) {
  const std::uint32_t v = r.get_u32();
  if (v > (1u << 24)) throw IntegrityError("checkpoint config value out of range");
  return static_cast<int>(v);
}

template <typename Params>
std::vector<std::uint8_t> serialize(ModelKind kind, const auto& config, const Params& params) {
  ByteWriter w;
  w.put_magic("LFPC");
  w.put_u16(kCheckpointVersion);
  w.put_u8(static_cast<std::uint8_t>(kind));
  put_config(w, config);
  std::uint64_t count = 0;
  for (const auto* p : params) count += p->size();
  w.put_u64(count);
  for (const auto* p : params) {
    for (float v : p->values()) w.put_f32(v);
  }
  const std::uint64_t checksum = fnv1a64(w.bytes());
  w.put_u64(checksum);
  return w.release();
}

// Validates framing and checksum, leaving the reader just past the kind byte.
ByteReader open_checkpoint(std::span<const std::uint8_t> bytes, ModelKind expected) {
  if (bytes.size() < 8) throw IntegrityError("checkpoint truncated");
  const auto body = bytes.first(bytes.size() - 8);
  ByteReader tail(bytes.last(8), ErrorCategory::integrity);
  if (fnv1a64(body) != tail.get_u64()) throw IntegrityError("checkpoint checksum mismatch");
  ByteReader r(body, ErrorCategory::integrity);
  r.expect_magic("LFPC");
  const std::uint16_t version = r.get_u16();
  if (version != kCheckpointVersion) throw IntegrityError("unsupported checkpoint version " + std::to_string(version));
  const auto kind = static_cast<ModelKind>(r.get_u8());
  if (kind != expected) throw ModelError("checkpoint holds a different model kind");
  return r;
}

void read_parameters(ByteReader& r, const std::vector<Tensor<float>*>& params) {
  std::uint64_t expected = 0;
  for (const auto* p : params) expected += p->size();
  const std::uint64_t count = r.get_u64();
  if (count != expected) {
    throw IntegrityError("checkpoint has " + std::to_string(count) + " parameters, config implies " +
                         std::to_string(expected));
  }
  for (auto* p : params) {
    for (float& v : p->values()) v = r.get_f32();
  }
  if (!r.at_end()) throw IntegrityError("trailing bytes in checkpoint");
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Generator& g) {
  return serialize(ModelKind::generator, g.config, g.parameters());
}

std::vector<std::uint8_t> serialize_checkpoint(const Discriminator& d) {
  return serialize(ModelKind::discriminator, d.config, d.parameters());
}

Generator parse_generator_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r = open_checkpoint(bytes, ModelKind::generator);
  GeneratorConfig c;
  c.input_frames = get_int(r);
  c.channels = get_int(r);
  c.residual_blocks = get_int(r);
  c.kernel = get_int(r);
  c.residual_scale = r.get_f64();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw IntegrityError(std::string("checkpoint config invalid: ") + e.what());
  }
  Generator g = build_generator(c, 0);
  read_parameters(r, g.parameters());
  return g;
}

Discriminator parse_discriminator_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r = open_checkpoint(bytes, ModelKind::discriminator);
  DiscriminatorConfig c;
  c.input_frames = get_int(r);
  c.patch_size = get_int(r);
  c.kernel = get_int(r);
  c.hidden1 = get_int(r);
  c.hidden2 = get_int(r);
  c.leaky_slope = r.get_f64();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw IntegrityError(std::string("checkpoint config invalid: ") + e.what());
  }
  Discriminator d = build_discriminator(c, 0);
  read_parameters(r, d.parameters());
  return d;
}

void save_checkpoint(const Generator& g, const std::filesystem::path& path) {
  write_file(path, serialize_checkpoint(g));
}

void save_checkpoint(const Discriminator& d, const std::filesystem::path& path) {
  write_file(path, serialize_checkpoint(d));
}

Generator load_generator_checkpoint(const std::filesystem::path& path) {
  return parse_generator_checkpoint(read_file(path));
}

Discriminator load_discriminator_checkpoint(const std::filesystem::path& path) {
  return parse_discriminator_checkpoint(read_file(path));
}

std::uint64_t checkpoint_digest(const Generator& g) {
  const auto bytes = serialize_checkpoint(g);
  ByteReader tail(std::span<const std::uint8_t>(bytes).last(8), ErrorCategory::integrity);
  return tail.get_u64();
}

std::uint64_t config_hash(const GeneratorConfig& config) {
  ByteWriter w;
  put_config(w, config);
  return fnv1a64(w.bytes());
}

}  // namespace lfp
