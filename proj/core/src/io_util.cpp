// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#include "refdic/io_util.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "refdic/errors.hpp"

namespace refdic::io {

void Reader::expect_magic(const char* magic) {
  std::size_t len = std::strlen(magic);
  std::string found = read_bytes(len);
  if (found != magic) {
    throw SchemaError(name_ + ": bad magic bytes, expected \"" + magic + "\"");
  }
}

void Reader::require(std::size_t n) const {
  if (pos_ + n > data_.size()) {
    throw SchemaError(name_ + ": truncated at byte " + std::to_string(pos_));
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SchemaError("cannot open file for writing: " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw SchemaError("short write: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw SchemaError("cannot rename " + tmp + " to " + path + ": " +
                      ec.message());
  }
}

}  // namespace refdic::io
