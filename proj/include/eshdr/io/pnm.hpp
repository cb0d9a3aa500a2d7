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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "eshdr/image.hpp"
#include "eshdr/io/binary.hpp"

namespace eshdr::io {

// Binary PNM with maxval 255: P6 for RGB, P5 for single-channel.

inline std::string encode_pnm(const Image<std::uint8_t>& img) {
  require(img.channels() == 1 || img.channels() == 3, ErrorCategory::validation,
          "PNM holds 1 or 3 channels");
  std::string out = img.channels() == 3 ? "P6\n" : "P5\n";
  out += std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  const auto samples = img.samples();
  out.append(reinterpret_cast<const char*>(samples.data()), samples.size());
  return out;
}

inline Image<std::uint8_t> decode_pnm(std::string_view bytes, std::string_view source = "<pnm>") {
  HeaderCursor cursor(bytes, source, true);
  const std::string_view magic = cursor.token("PNM magic");
  int channels = 0;
  if (magic == "P6") {
    channels = 3;
  } else if (magic == "P5") {
    channels = 1;
  } else {
    fail_io(source, 0, "expected binary PNM magic 'P6' or 'P5', found '" + std::string(magic) + "'");
  }
  const std::size_t dims_at = (cursor.skip_space(), cursor.offset());
  const long long width = cursor.integer("width");
  const long long height = cursor.integer("height");
  if (width < 1 || height < 1 || width > (1 << 20) || height > (1 << 20))
    fail_io(source, dims_at, "invalid PNM dimensions");
  const std::size_t maxval_at = (cursor.skip_space(), cursor.offset());
  const long long maxval = cursor.integer("maxval");
  if (maxval != 255) fail_io(source, maxval_at, "only maxval 255 is supported");
  cursor.end_of_header();

  const std::size_t payload = cursor.offset();
  const std::size_t expected = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - payload < expected)
    fail_io(source, bytes.size(), "truncated PNM payload");
  Image<std::uint8_t> img(static_cast<int>(width), static_cast<int>(height), channels);
  auto dst = img.samples();
  for (std::size_t i = 0; i < expected; ++i)
    dst[i] = static_cast<std::uint8_t>(bytes[payload + i]);
  return img;
}

inline void write_pnm(const std::filesystem::path& path, const Image<std::uint8_t>& img) {
  write_file(path, encode_pnm(img));
}

inline Image<std::uint8_t> read_pnm(const std::filesystem::path& path) {
  return decode_pnm(read_file(path), path.string());
}

}  // namespace eshdr::io
