// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace refdic::io {

// Little-endian append helpers used by the binary file formats.
template <typename T>
void append_le(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
  for (std::size_t i = sizeof(T); i-- > 0;) out.push_back(static_cast<char>(bytes[i]));
#else
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
#endif
}

// Bounds-checked little-endian reader over an in-memory buffer.
class Reader {
 public:
  Reader(const std::string& data, std::string name)
      : data_(data), name_(std::move(name)) {}

  template <typename T>
  T read() {
    static_assert(std::is_trivially_copyable_v<T>);
    require(sizeof(T));
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
    unsigned char* p = reinterpret_cast<unsigned char*>(&value);
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(p[i], p[sizeof(T) - 1 - i]);
#endif
    pos_ += sizeof(T);
    return value;
  }

  std::string read_bytes(std::size_t n) {
    require(n);
    std::string out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  void expect_magic(const char* magic);
  bool exhausted() const { return pos_ == data_.size(); }
  std::size_t position() const { return pos_; }

 private:
  void require(std::size_t n) const;

  const std::string& data_;
  std::string name_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path);

// Writes to "<path>.tmp" then renames, so readers never observe a partial
// file.
void write_file_atomic(const std::string& path, const std::string& bytes);

}  // namespace refdic::io
