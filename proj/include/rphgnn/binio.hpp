#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "rphgnn/errors.hpp"

// Little-endian binary file helpers.  All on-disk formats in the project are
// explicitly little-endian regardless of host order.

namespace rphgnn::binio {

inline void write_bytes(std::ostream& os, const void* data, std::size_t n) {
  os.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

inline void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  write_bytes(os, b, 4);
}

inline void write_f32(std::ostream& os, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  write_u32(os, v);
}

inline void write_f32_array(std::ostream& os, const float* data,
                            std::size_t n) {
  // Hosts are little-endian in practice; fall back to per-element writes
  // elsewhere.  The constant fold keeps the fast path branch-free.
  if constexpr (std::endian::native == std::endian::little) {
    write_bytes(os, data, n * 4);
  } else {
    for (std::size_t i = 0; i < n; ++i) write_f32(os, data[i]);
  }
}

inline void read_exact(std::istream& is, void* data, std::size_t n,
                       const char* what) {
  is.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n)
    throw FormatError(std::string(what) + ": unexpected end of file");
}

inline std::uint32_t read_u32(std::istream& is, const char* what) {
  unsigned char b[4];
  read_exact(is, b, 4, what);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

inline float read_f32(std::istream& is, const char* what) {
  std::uint32_t v = read_u32(is, what);
  float f;
  std::memcpy(&f, &v, 4);
  return f;
}

inline void read_f32_array(std::istream& is, float* data, std::size_t n,
                           const char* what) {
  if constexpr (std::endian::native == std::endian::little) {
    read_exact(is, data, n * 4, what);
  } else {
    for (std::size_t i = 0; i < n; ++i) data[i] = read_f32(is, what);
  }
}

inline std::string read_string(std::istream& is, std::size_t n,
                               const char* what) {
  std::string s(n, '\0');
  read_exact(is, s.data(), n, what);
  return s;
}

}  // namespace rphgnn::binio
