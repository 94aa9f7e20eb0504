#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "advebm/error.hpp"
#include "advebm/mixture.hpp"
#include "advebm/net.hpp"
#include "advebm/tensor.hpp"

namespace advebm {

namespace detail {

// CRC-32 (IEEE, reflected), table-driven.
inline constexpr std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
  return table;
}

inline std::uint32_t crc32(const std::uint8_t* data, std::size_t len) {
  static constexpr auto table = make_crc_table();
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xFFu] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

// little-endian writers/readers; the on-disk layout is LE regardless of host
struct ByteWriter {
  std::vector<std::uint8_t> buf;

  void u8(std::uint8_t v) { buf.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf.insert(buf.end(), b, b + n);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
};

struct ByteReader {
  const std::uint8_t* p;
  std::size_t len;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > len) throw FormatError("checkpoint: truncated file (needed " + std::to_string(n) +
                                         " bytes at offset " + std::to_string(pos) + ")");
  }
  std::uint8_t u8() {
    need(1);
    return p[pos++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(p + pos), n);
    pos += n;
    return s;
  }
};

}  // namespace detail

inline constexpr char kCheckpointMagic[8] = {'A', 'D', 'V', 'E', 'B', 'M', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::uint32_t kCheckpointFlagPartial = 1u << 0;

// Versioned serialized model: parameters plus everything needed to resume
// sampling (mixture stats, seed, resolved training config). Round trips are
// bit-exact on parameter data; version mismatches are rejected.
struct Checkpoint {
  std::uint32_t format_version = kCheckpointVersion;
  std::uint32_t flags = 0;
  ArchTag arch_tag = ArchTag::mlp2d;
  std::size_t input_dim = 0;
  std::size_t num_classes = 0;
  std::uint64_t rng_seed = 0;
  std::string training_config;  // key=value lines
  std::map<std::string, Tensor> params;
  bool has_mixture_stats = false;
  MixtureStats mixture_stats;

  bool partial() const { return flags & kCheckpointFlagPartial; }

  static Checkpoint from_classifier(const Classifier& c, std::uint64_t seed, std::string config = "") {
    Checkpoint ck;
    ck.arch_tag = c.arch_tag;
    ck.input_dim = c.input_dim;
    ck.num_classes = c.num_classes;
    ck.rng_seed = seed;
    ck.training_config = std::move(config);
    ck.params = c.params;
    return ck;
  }

  // Rebuilds the classifier: graph from the arch tag, parameters from the file.
  Classifier to_classifier() const {
    Classifier c = build(arch_tag, input_dim, num_classes, rng_seed);
    for (auto& [name, t] : c.params) {
      auto it = params.find(name);
      if (it == params.end()) throw FormatError("checkpoint: missing parameter '" + name + "'");
      if (it->second.shape != t.shape)
        throw FormatError("checkpoint: parameter '" + name + "' has shape " + shape_str(it->second.shape) +
                          ", expected " + shape_str(t.shape));
      t = it->second;
    }
    return c;
  }
};

inline std::vector<std::uint8_t> serialize(const Checkpoint& ck) {
  detail::ByteWriter w;
  w.bytes(kCheckpointMagic, 8);
  w.u32(ck.format_version);
  w.u32(ck.flags);
  w.u32(static_cast<std::uint32_t>(ck.arch_tag));
  w.u32(static_cast<std::uint32_t>(ck.input_dim));
  w.u32(static_cast<std::uint32_t>(ck.num_classes));
  w.u64(ck.rng_seed);
  w.str(ck.training_config);
  w.u32(static_cast<std::uint32_t>(ck.params.size()));
  for (const auto& [name, t] : ck.params) {  // std::map: deterministic order
    w.str(name);
    w.u32(static_cast<std::uint32_t>(t.ndim()));
    for (std::size_t d : t.shape) w.u32(static_cast<std::uint32_t>(d));
    for (double v : t.data) w.f64(v);
  }
  w.u8(ck.has_mixture_stats ? 1 : 0);
  if (ck.has_mixture_stats) {
    const auto& st = ck.mixture_stats;
    w.u32(static_cast<std::uint32_t>(st.num_classes()));
    w.u32(static_cast<std::uint32_t>(st.dim()));
    w.f64(st.variance_floor);
    for (const Tensor& m : st.mean)
      for (double v : m.data) w.f64(v);
    for (const Tensor& s : st.variance)
      for (double v : s.data) w.f64(v);
  }
  const std::uint32_t crc = detail::crc32(w.buf.data(), w.buf.size());
  w.u32(crc);
  return std::move(w.buf);
}

inline Checkpoint deserialize(const std::uint8_t* data, std::size_t len) {
  if (len < 8 + 4 + 4) throw FormatError("checkpoint: file too short");
  if (std::memcmp(data, kCheckpointMagic, 8) != 0) throw FormatError("checkpoint: bad magic");

  detail::ByteReader r{data, len};
  r.pos = 8;
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) throw VersionError(version, kCheckpointVersion);

  // CRC over everything except the trailing checksum itself
  const std::uint32_t stored = [&] {
    detail::ByteReader tail{data, len};
    tail.pos = len - 4;
    return tail.u32();
  }();
  const std::uint32_t actual = detail::crc32(data, len - 4);
  if (stored != actual) throw FormatError("checkpoint: CRC mismatch (corrupt or truncated file)");

  Checkpoint ck;
  ck.format_version = version;
  ck.flags = r.u32();
  const std::uint32_t arch = r.u32();
  if (arch > 1) throw FormatError("checkpoint: unknown arch tag " + std::to_string(arch));
  ck.arch_tag = static_cast<ArchTag>(arch);
  ck.input_dim = r.u32();
  ck.num_classes = r.u32();
  ck.rng_seed = r.u64();
  ck.training_config = r.str();
  const std::uint32_t nparams = r.u32();
  for (std::uint32_t i = 0; i < nparams; ++i) {
    std::string name = r.str();
    const std::uint32_t ndim = r.u32();
    Shape shape;
    for (std::uint32_t d = 0; d < ndim; ++d) shape.push_back(r.u32());
    Tensor t(shape);
    for (double& v : t.data) v = r.f64();
    ck.params.emplace(std::move(name), std::move(t));
  }
  ck.has_mixture_stats = r.u8() != 0;
  if (ck.has_mixture_stats) {
    const std::uint32_t k = r.u32();
    const std::uint32_t d = r.u32();
    ck.mixture_stats.variance_floor = r.f64();
    ck.mixture_stats.mean.assign(k, Tensor::zeros({d}));
    ck.mixture_stats.variance.assign(k, Tensor::zeros({d}));
    for (auto& m : ck.mixture_stats.mean)
      for (double& v : m.data) v = r.f64();
    for (auto& s : ck.mixture_stats.variance)
      for (double& v : s.data) v = r.f64();
  }
  return ck;
}

inline void save(const Checkpoint& ck, const std::filesystem::path& path) {
  const auto bytes = serialize(ck);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("checkpoint: cannot open '" + tmp + "' for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("checkpoint: write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline Checkpoint load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("checkpoint: cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize(bytes.data(), bytes.size());
}

}  // namespace advebm
