// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

// Little-endian primitive readers/writers shared by the file formats.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include "rvqtok/error.hpp"

namespace rvqtok::io {

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    require(static_cast<bool>(out_), ErrorKind::kIo,
            "cannot open for writing: " + path.string());
  }

  void magic(std::string_view m) { out_.write(m.data(), 4); }

  template <typename T>
  void put(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }

  void close() {
    out_.close();
    require(!out_.fail(), ErrorKind::kIo, "write failed: " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path)
      : path_(path), in_(path, std::ios::binary) {
    require(static_cast<bool>(in_), ErrorKind::kIo,
            "cannot open for reading: " + path.string());
  }

  void expect_magic(std::string_view m) {
    char buf[4] = {};
    in_.read(buf, 4);
    require(in_.gcount() == 4 && std::memcmp(buf, m.data(), 4) == 0,
            ErrorKind::kDataFormat,
            path_.string() + ": bad magic, expected " + std::string(m));
  }

  template <typename T>
  T get() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    require(in_.gcount() == static_cast<std::streamsize>(sizeof(T)),
            ErrorKind::kDataFormat, path_.string() + ": truncated file");
    return v;
  }

  void expect_eof() {
    require(in_.peek() == std::char_traits<char>::eof(),
            ErrorKind::kDataFormat, path_.string() + ": trailing bytes");
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

}  // namespace rvqtok::io
