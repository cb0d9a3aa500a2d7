// Copyright 2026 The eshdr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <type_traits>

#include "eshdr/error.hpp"

namespace eshdr::io {

[[noreturn]] inline void fail_io(std::string_view source, std::size_t offset,
                                 const std::string& what) {
  fail(ErrorCategory::io,
       std::string(source) + ": " + what + " (at byte " + std::to_string(offset) + ")");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCategory::io, path.string() + ": cannot open for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCategory::io, path.string() + ": cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCategory::io, path.string() + ": write failed");
}

template <typename T>
  requires std::is_trivially_copyable_v<T>
T byteswap_value(T v) noexcept {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

/// Appends v to out in little-endian byte order.
template <typename T>
  requires std::is_trivially_copyable_v<T>
void put_le(std::string& out, T v) {
  if constexpr (std::endian::native == std::endian::big) v = byteswap_value(v);
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  out.append(bytes, sizeof(T));
}

/// Reads a value of the given endianness at bytes[offset]; caller checks bounds.
template <typename T>
  requires std::is_trivially_copyable_v<T>
T get_value(std::string_view bytes, std::size_t offset, std::endian order) {
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  if (order != std::endian::native) v = byteswap_value(v);
  return v;
}

/// Whitespace-separated header token reader shared by the PNM-family codecs.
class HeaderCursor {
 public:
  HeaderCursor(std::string_view bytes, std::string_view source, bool comments)
      : bytes_(bytes), source_(source), comments_(comments) {}

  std::size_t offset() const noexcept { return pos_; }

  void skip_space() {
    while (pos_ < bytes_.size()) {
      const char ch = bytes_[pos_];
      if (comments_ && ch == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\v' ||
                 ch == '\f') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view token(std::string_view what) {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size()) {
      const char ch = bytes_[pos_];
      if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\v' || ch == '\f') break;
      ++pos_;
    }
    if (pos_ == start) fail_io(source_, start, "missing " + std::string(what));
    return bytes_.substr(start, pos_ - start);
  }

  long long integer(std::string_view what) {
    const std::size_t start = (skip_space(), pos_);
    const std::string text(token(what));
    std::size_t used = 0;
    long long value = 0;
    try {
      value = std::stoll(text, &used);
    } catch (const std::exception&) {
      fail_io(source_, start, "malformed " + std::string(what) + " '" + text + "'");
    }
    if (used != text.size())
      fail_io(source_, start, "malformed " + std::string(what) + " '" + text + "'");
    return value;
  }

  double real(std::string_view what) {
    const std::size_t start = (skip_space(), pos_);
    const std::string text(token(what));
    std::size_t used = 0;
    double value = 0;
    try {
      value = std::stod(text, &used);
    } catch (const std::exception&) {
      fail_io(source_, start, "malformed " + std::string(what) + " '" + text + "'");
    }
    if (used != text.size())
      fail_io(source_, start, "malformed " + std::string(what) + " '" + text + "'");
    return value;
  }

  /// Consumes the single whitespace byte that separates a header from its payload.
  void end_of_header() {
    if (pos_ >= bytes_.size()) fail_io(source_, pos_, "truncated header");
    const char ch = bytes_[pos_];
    if (!(ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r'))
      fail_io(source_, pos_, "expected whitespace after header");
    ++pos_;
  }

 private:
  std::string_view bytes_;
  std::string_view source_;
  bool comments_;
  std::size_t pos_ = 0;
};

}  // namespace eshdr::io
