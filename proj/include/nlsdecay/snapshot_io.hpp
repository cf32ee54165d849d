#pragma once
// NLSF snapshot files. Layout (all little-endian):
//   "NLSF"                      4 bytes
//   format version              u32 (currently 1)
//   mode                        u32 (0 periodic-cartesian, 1 radial-3d)
//   dimension                   u32
//   sizes                       u32 x dimension
//   extents                     f64 x dimension
//   time                        f64
//   samples                     (re f64, im f64) x prod(sizes), row-major
// Radial-3d files store the solver variable v = r u at r_j = (j + 1/2) R / N.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nlsdecay/errors.hpp"
#include "nlsdecay/fields.hpp"

namespace nlsd {

inline constexpr char kSnapshotMagic[4] = {'N', 'L', 'S', 'F'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

inline void put_f64(std::string& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

class ByteReader {
 public:
  ByteReader(const std::string& data, std::string source) : data_(data), source_(std::move(source)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }

  void bytes(char* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, data_.data() + pos_, n);
    pos_ += n;
  }

  [[nodiscard]] bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw IoError(source_ + ": truncated snapshot file");
  }
  const std::string& data_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_snapshot(const Field& f) {
  const auto& g = f.geometry();
  std::string out;
  out.reserve(16 + 12 * g.sizes.size() + 8 + 16 * f.values.size());
  out.append(kSnapshotMagic, 4);
  detail::put_u32(out, kSnapshotVersion);
  detail::put_u32(out, g.mode == Mode::radial_3d ? 1u : 0u);
  detail::put_u32(out, static_cast<std::uint32_t>(g.dimension));
  for (auto n : g.sizes) detail::put_u32(out, static_cast<std::uint32_t>(n));
  for (double l : g.lengths) detail::put_f64(out, l);
  detail::put_f64(out, f.time);
  for (const auto& z : f.values) {
    detail::put_f64(out, z.real());
    detail::put_f64(out, z.imag());
  }
  return out;
}

struct DecodedSnapshot {
  Geometry geometry;
  double time = 0.0;
  std::vector<cplx> values;
};

inline DecodedSnapshot decode_snapshot(const std::string& bytes, const std::string& source = "snapshot") {
  detail::ByteReader in(bytes, source);
  char magic[4];
  in.bytes(magic, 4);
  if (std::memcmp(magic, kSnapshotMagic, 4) != 0) throw IoError(source + ": not an NLSF snapshot");
  const auto version = in.u32();
  if (version != kSnapshotVersion) throw IoError(source + ": unsupported snapshot version " + std::to_string(version));
  const auto mode_tag = in.u32();
  if (mode_tag > 1) throw IoError(source + ": unknown mode tag " + std::to_string(mode_tag));
  const auto dim = in.u32();
  if (dim < 1 || dim > 3) throw IoError(source + ": invalid dimension " + std::to_string(dim));
  std::vector<std::size_t> sizes(dim);
  std::vector<double> lengths(dim);
  for (auto& n : sizes) n = in.u32();
  for (auto& l : lengths) l = in.f64();
  DecodedSnapshot snap;
  try {
    snap.geometry = make_geometry(static_cast<int>(dim), sizes, lengths,
                                  mode_tag == 1 ? Mode::radial_3d : Mode::periodic_cartesian);
  } catch (const ConfigError& e) {
    throw IoError(source + ": invalid geometry: " + e.what());
  }
  snap.time = in.f64();
  snap.values.resize(snap.geometry.total());
  for (auto& z : snap.values) {
    const double re = in.f64();
    const double im = in.f64();
    z = {re, im};
  }
  if (!in.done()) throw IoError(source + ": trailing bytes after samples");
  return snap;
}

inline void write_snapshot(const std::filesystem::path& path, const Field& f) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  const auto bytes = encode_snapshot(f);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("failed writing " + path.string());
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

inline DecodedSnapshot read_snapshot(const std::filesystem::path& path) {
  return decode_snapshot(read_file_bytes(path), path.string());
}

/// Reads a snapshot onto an existing grid (geometry must match exactly).
inline Field read_snapshot(const std::filesystem::path& path, const GridPtr& grid) {
  auto snap = read_snapshot(path);
  if (!(snap.geometry == grid->geometry())) throw IoError(path.string() + ": geometry does not match the run");
  return Field(grid, snap.time, std::move(snap.values));
}

}  // namespace nlsd
