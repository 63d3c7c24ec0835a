#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "spkr/io.hpp"

namespace spkr {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};
constexpr std::uint8_t kF32 = 4;
constexpr std::uint8_t kF64 = 8;

template <typename T>
void put_le(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  std::uint64_t bits = 0;
  if constexpr (std::is_floating_point_v<T>) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    bits = std::bit_cast<U>(v);
  } else {
    bits = static_cast<std::uint64_t>(v);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const char* what) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    fail(Errc::TruncatedFile, std::string("archive: file ends inside ") + what);
  }
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  if constexpr (std::is_floating_point_v<T>) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    return std::bit_cast<T>(static_cast<U>(bits));
  } else {
    return static_cast<T>(bits);
  }
}

}  // namespace

void write_archive(std::ostream& out, std::span<const Embedding> xs, Dtype dtype) {
  const std::size_t d = xs.empty() ? 0 : xs.front().dim();
  check_same_dim(xs, d, "write_archive");
  for (const auto& x : xs) {
    check_finite(x.vec, "write_archive: embedding '" + x.id + "'");
    if (x.id.size() > 0xFFFFFFFFu) fail(Errc::InvalidArgument, "write_archive: id too long");
  }
  out.write(kMagic, 4);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  put_le<std::uint64_t>(out, xs.size());
  put_le<std::uint8_t>(out, dtype == Dtype::F32 ? kF32 : kF64);
  put_le<std::uint8_t>(out, 0);
  put_le<std::uint16_t>(out, 0);
  for (const auto& x : xs) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(x.id.size()));
    out.write(x.id.data(), static_cast<std::streamsize>(x.id.size()));
    for (double v : x.vec) {
      if (dtype == Dtype::F32) {
        put_le<float>(out, static_cast<float>(v));
      } else {
        put_le<double>(out, v);
      }
    }
  }
  if (!out) fail(Errc::IoError, "write_archive: write failed");
}

void write_archive(const std::filesystem::path& path, std::span<const Embedding> xs, Dtype dtype) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot open '" + path.string() + "' for writing");
  write_archive(out, xs, dtype);
}

std::vector<Embedding> read_archive(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4)) fail(Errc::TruncatedFile, "archive: file ends inside the header");
  if (std::memcmp(magic, kMagic, 4) != 0) fail(Errc::BadMagic, "archive: bad magic, not an embedding archive");
  const auto d = get_le<std::uint32_t>(in, "the header");
  const auto count = get_le<std::uint64_t>(in, "the header");
  const auto dtype = get_le<std::uint8_t>(in, "the header");
  const auto endian = get_le<std::uint8_t>(in, "the header");
  (void)get_le<std::uint16_t>(in, "the header");
  if (dtype != kF32 && dtype != kF64) fail(Errc::ParseError, "archive: unknown dtype code " + std::to_string(dtype));
  if (endian != 0) fail(Errc::ParseError, "archive: only little-endian archives are supported");
  if (d == 0 && count > 0) fail(Errc::DimensionMismatch, "archive: zero dimension with non-empty record list");

  std::vector<Embedding> xs;
  xs.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)));
  for (std::uint64_t r = 0; r < count; ++r) {
    const auto len = get_le<std::uint32_t>(in, "a record id length");
    Embedding x;
    x.id.resize(len);
    if (!in.read(x.id.data(), len)) fail(Errc::TruncatedFile, "archive: file ends inside a record id");
    x.vec.resize(d);
    for (std::uint32_t i = 0; i < d; ++i) {
      x.vec[i] = dtype == kF32 ? static_cast<double>(get_le<float>(in, "a vector")) : get_le<double>(in, "a vector");
      if (!std::isfinite(x.vec[i])) fail(Errc::NonFinite, "archive: non-finite value in '" + x.id + "'");
    }
    xs.push_back(std::move(x));
  }
  return xs;
}

std::vector<Embedding> read_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open '" + path.string() + "'");
  return read_archive(in);
}

}  // namespace spkr
