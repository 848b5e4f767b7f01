#pragma once

// Binary array files: "MVTA", u16 version, u8 dtype, u8 ndim, ndim x u64
// shape, then the row-major payload. Everything little-endian.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <type_traits>
#include <vector>

#include "mvtrans/core/error.hpp"
#include "mvtrans/core/tensor.hpp"

namespace mvtrans::synthgen {

static_assert(std::endian::native == std::endian::little, "array files assume a little-endian host");

inline constexpr char kArrayMagic[4] = {'M', 'V', 'T', 'A'};
inline constexpr std::uint16_t kArrayVersion = 1;

enum class DType : std::uint8_t { U8 = 1, I32 = 2, F32 = 3, F64 = 4 };

template <class T>
constexpr DType dtype_of() {
  if constexpr (std::is_same_v<T, std::uint8_t>) return DType::U8;
  else if constexpr (std::is_same_v<T, std::int32_t>) return DType::I32;
  else if constexpr (std::is_same_v<T, float>) return DType::F32;
  else {
    static_assert(std::is_same_v<T, double>, "unsupported array element type");
    return DType::F64;
  }
}

template <class T, std::size_t R>
void write_array(const std::filesystem::path& path, const Tensor<T, R>& t) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(f.good(), ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  f.write(kArrayMagic, 4);
  const std::uint16_t version = kArrayVersion;
  f.write(reinterpret_cast<const char*>(&version), sizeof version);
  const auto dtype = static_cast<std::uint8_t>(dtype_of<T>());
  const auto ndim = static_cast<std::uint8_t>(R);
  f.write(reinterpret_cast<const char*>(&dtype), 1);
  f.write(reinterpret_cast<const char*>(&ndim), 1);
  for (std::size_t a = 0; a < R; ++a) {
    const std::uint64_t d = t.dim(a);
    f.write(reinterpret_cast<const char*>(&d), sizeof d);
  }
  f.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(T)));
  require(f.good(), ErrorCode::IoError, "failed writing " + path.string());
}

template <class T, std::size_t R>
Tensor<T, R> read_array(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), ErrorCode::IoError, "cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const std::string name = path.string();
  std::size_t pos = 0;
  auto take = [&](void* dst, std::size_t n) {
    require(pos + n <= bytes.size(), ErrorCode::FormatError, name + ": truncated file");
    std::memcpy(dst, bytes.data() + pos, n);
    pos += n;
  };
  char magic[4];
  take(magic, 4);
  require(std::memcmp(magic, kArrayMagic, 4) == 0, ErrorCode::FormatError, name + ": bad magic");
  std::uint16_t version = 0;
  take(&version, sizeof version);
  require(version == kArrayVersion, ErrorCode::VersionMismatch,
          name + ": array version " + std::to_string(version) + ", expected " + std::to_string(kArrayVersion));
  std::uint8_t dtype = 0, ndim = 0;
  take(&dtype, 1);
  take(&ndim, 1);
  require(dtype == static_cast<std::uint8_t>(dtype_of<T>()), ErrorCode::FormatError, name + ": unexpected dtype");
  require(ndim == R, ErrorCode::FormatError, name + ": expected rank " + std::to_string(R));
  typename Tensor<T, R>::Shape shape;
  for (std::size_t a = 0; a < R; ++a) {
    std::uint64_t d = 0;
    take(&d, sizeof d);
    shape[a] = static_cast<std::size_t>(d);
  }
  const std::size_t count = Tensor<T, R>::count(shape);
  require(bytes.size() - pos == count * sizeof(T), ErrorCode::FormatError,
          name + ": payload size does not match shape");
  std::vector<T> data(count);
  if (count) std::memcpy(data.data(), bytes.data() + pos, count * sizeof(T));
  return Tensor<T, R>(shape, std::move(data));
}

}  // namespace mvtrans::synthgen
