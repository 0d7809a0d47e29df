#pragma once

// VTNSR raw tensor files:
//   bytes 0-7   magic "VTNSR\0\0\1"
//   bytes 8-11  rank, u32 little-endian
//   rank x u32  dims, little-endian
//   4 bytes     reserved, zero
//   payload     f32 little-endian, row-major

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "triplet_forge/core/errors.hpp"
#include "triplet_forge/core/tensor.hpp"

namespace tforge {

inline constexpr std::array<char, 8> kTensorMagic = {'V', 'T', 'N', 'S', 'R', '\0', '\0', '\1'};

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "VTNSR I/O assumes a little-endian host");

inline void put_u32(std::vector<char>& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.insert(out.end(), b, b + 4);
}

inline std::uint32_t get_u32(const std::vector<char>& in, std::size_t at) {
  std::uint32_t v = 0;
  std::memcpy(&v, in.data() + at, 4);
  return v;
}

/// Write bytes to `path` through a sibling temp file and rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::vector<char>& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw IoError("write failed: " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename into place: " + path.string());
}

inline std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace detail

inline std::vector<char> encode_tensor(const Tensor& t) {
  std::vector<char> out(kTensorMagic.begin(), kTensorMagic.end());
  detail::put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape()) detail::put_u32(out, static_cast<std::uint32_t>(d));
  detail::put_u32(out, 0);
  const auto* p = reinterpret_cast<const char*>(t.data().data());
  out.insert(out.end(), p, p + t.size() * sizeof(float));
  return out;
}

inline Tensor decode_tensor(const std::vector<char>& bytes) {
  if (bytes.size() < 12 || !std::equal(kTensorMagic.begin(), kTensorMagic.end(), bytes.begin())) {
    throw FormatError("not a VTNSR tensor (bad magic)");
  }
  const std::uint32_t rank = detail::get_u32(bytes, 8);
  const std::size_t header = 12 + 4 * static_cast<std::size_t>(rank) + 4;
  if (rank > 16 || bytes.size() < header) throw FormatError("truncated VTNSR header");
  Shape shape(rank);
  for (std::uint32_t a = 0; a < rank; ++a) shape[a] = detail::get_u32(bytes, 12 + 4 * a);
  if (detail::get_u32(bytes, header - 4) != 0) throw FormatError("VTNSR reserved bytes not zero");
  const std::size_t n = shape_numel(shape);
  if (bytes.size() - header != n * sizeof(float)) {
    throw SizeError("VTNSR payload has " + std::to_string(bytes.size() - header) +
                    " bytes, shape " + shape_string(shape) + " needs " +
                    std::to_string(n * sizeof(float)));
  }
  std::vector<float> data(n);
  std::memcpy(data.data(), bytes.data() + header, n * sizeof(float));
  return Tensor(std::move(shape), std::move(data));
}

inline void write_tensor(const Tensor& t, const std::filesystem::path& path) {
  detail::write_file_atomic(path, encode_tensor(t));
}

inline Tensor read_tensor(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InputError("no such file: " + path.string());
  return decode_tensor(detail::read_file(path));
}

}  // namespace tforge
