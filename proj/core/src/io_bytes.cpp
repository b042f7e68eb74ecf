#include "io_bytes.hpp"

#include <fstream>

namespace mlin::io {

ByteReader::ByteReader(const std::filesystem::path& path) : path_(path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  data_.resize(static_cast<std::size_t>(size));
  if (size > 0 &&
      !in.read(reinterpret_cast<char*>(data_.data()), size)) {
    throw DataError("cannot read " + path.string());
  }
}

void ByteReader::need(std::size_t n, const char* what) {
  if (pos_ + n > data_.size()) {
    throw DataError(path_.string() + ": truncated at byte " +
                    std::to_string(pos_) + " while reading " + what + " (" +
                    std::to_string(n) + " bytes needed, " +
                    std::to_string(data_.size() - pos_) + " left)");
  }
}

void ByteReader::magic(const char* expected) {
  need(4, "magic");
  if (std::memcmp(data_.data() + pos_, expected, 4) != 0) {
    throw DataError(path_.string() + ": bad magic at byte " +
                    std::to_string(pos_) + ", expected '" +
                    std::string(expected, 4) + "'");
  }
  pos_ += 4;
}

std::uint32_t ByteReader::u32(const char* what) {
  need(4, what);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) {
    v = (v << 8) | data_[pos_ + static_cast<std::size_t>(i)];
  }
  pos_ += 4;
  return v;
}

float ByteReader::f32(const char* what) {
  return std::bit_cast<float>(u32(what));
}

double ByteReader::f64(const char* what) {
  need(8, what);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) {
    v = (v << 8) | data_[pos_ + static_cast<std::size_t>(i)];
  }
  pos_ += 8;
  return std::bit_cast<double>(v);
}

std::string ByteReader::string_block(std::size_t n, const char* what) {
  need(n, what);
  std::string out(reinterpret_cast<const char*>(data_.data() + pos_), n);
  pos_ += n;
  return out;
}

void ByteReader::expect_done() {
  if (pos_ != data_.size()) {
    throw DataError(path_.string() + ": " +
                    std::to_string(data_.size() - pos_) +
                    " trailing bytes at offset " + std::to_string(pos_));
  }
}

void write_file_atomic(const std::filesystem::path& path, const void* data,
                       std::size_t size) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw DataError("cannot open " + tmp.string() + " for writing");
    }
    out.write(static_cast<const char*>(data),
              static_cast<std::streamsize>(size));
    if (!out) {
      throw DataError("write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace mlin::io
