#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "mlin/error.hpp"

namespace mlin::io {

// Little-endian encode/decode helpers for the binary file formats, plus
// atomic whole-file writes (temp file + rename).

inline void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

inline void append_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
  }
}

inline void append_f32(std::vector<std::uint8_t>& out, float v) {
  append_u32(out, std::bit_cast<std::uint32_t>(v));
}

inline void append_f64(std::vector<std::uint8_t>& out, double v) {
  append_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline void append_bytes(std::vector<std::uint8_t>& out, const void* data,
                         std::size_t n) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  out.insert(out.end(), p, p + n);
}

/// Reads a whole file and decodes it sequentially; every failure names the
/// path and the byte offset where decoding stopped.
class ByteReader {
 public:
  explicit ByteReader(const std::filesystem::path& path);

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

  void magic(const char* expected);  // 4 bytes
  std::uint32_t u32(const char* what);
  float f32(const char* what);
  double f64(const char* what);
  std::string string_block(std::size_t n, const char* what);

  /// Rejects trailing bytes.
  void expect_done();

 private:
  void need(std::size_t n, const char* what);

  std::filesystem::path path_;
  std::vector<std::uint8_t> data_;
  std::size_t pos_ = 0;
};

void write_file_atomic(const std::filesystem::path& path,
                       const void* data, std::size_t size);

inline void write_file_atomic(const std::filesystem::path& path,
                              const std::vector<std::uint8_t>& bytes) {
  write_file_atomic(path, bytes.data(), bytes.size());
}

inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& text) {
  write_file_atomic(path, text.data(), text.size());
}

}  // namespace mlin::io
