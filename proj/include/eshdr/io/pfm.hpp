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
#include <cmath>
#include <filesystem>
#include <string>
#include <string_view>

#include "eshdr/image.hpp"
#include "eshdr/io/binary.hpp"

namespace eshdr::io {

// Portable float map: "PF" (3 channels) or "Pf" (1 channel), then
// "<width> <height>", then a scale whose sign gives the byte order
// (negative = little-endian). Rows are stored bottom-to-top as 32-bit floats.

inline std::string encode_pfm(const Image<float>& img) {
  require(img.channels() == 1 || img.channels() == 3, ErrorCategory::validation,
          "PFM holds 1 or 3 channels, got " + std::to_string(img.channels()));
  std::string out = img.channels() == 3 ? "PF\n" : "Pf\n";
  out += std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n-1.0\n";
  out.reserve(out.size() + img.size() * sizeof(float));
  for (int y = img.height() - 1; y >= 0; --y)
    for (float v : img.row(y)) put_le(out, v);
  return out;
}

inline Image<float> decode_pfm(std::string_view bytes, std::string_view source = "<pfm>") {
  HeaderCursor cursor(bytes, source, false);
  const std::string_view magic = cursor.token("PFM magic");
  int channels = 0;
  if (magic == "PF") {
    channels = 3;
  } else if (magic == "Pf") {
    channels = 1;
  } else {
    fail_io(source, 0, "expected PFM magic 'PF' or 'Pf', found '" + std::string(magic) + "'");
  }
  const std::size_t dims_at = (cursor.skip_space(), cursor.offset());
  const long long width = cursor.integer("width");
  const long long height = cursor.integer("height");
  if (width < 1 || height < 1 || width > (1 << 20) || height > (1 << 20))
    fail_io(source, dims_at, "invalid PFM dimensions");
  const std::size_t scale_at = (cursor.skip_space(), cursor.offset());
  const double scale = cursor.real("scale");
  if (!std::isfinite(scale) || scale == 0.0) fail_io(source, scale_at, "invalid PFM scale");
  cursor.end_of_header();
  const std::endian order = scale < 0.0 ? std::endian::little : std::endian::big;

  const std::size_t payload = cursor.offset();
  const std::size_t expected =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * channels * sizeof(float);
  if (bytes.size() - payload < expected)
    fail_io(source, bytes.size(),
            "truncated PFM payload: need " + std::to_string(expected) + " bytes, have " +
                std::to_string(bytes.size() - payload));
  if (bytes.size() - payload > expected)
    fail_io(source, payload + expected, "trailing bytes after PFM payload");

  Image<float> img(static_cast<int>(width), static_cast<int>(height), channels);
  std::size_t at = payload;
  for (int y = img.height() - 1; y >= 0; --y) {
    for (float& v : img.row(y)) {
      v = get_value<float>(bytes, at, order);
      at += sizeof(float);
    }
  }
  return img;
}

inline void write_pfm(const std::filesystem::path& path, const Image<float>& img) {
  write_file(path, encode_pfm(img));
}

inline Image<float> read_pfm(const std::filesystem::path& path) {
  return decode_pfm(read_file(path), path.string());
}

inline void write_pfm(const std::filesystem::path& path, const RadianceImage& img) {
  write_pfm(path, img.pixels());
}

inline RadianceImage read_radiance(const std::filesystem::path& path) {
  try {
    return RadianceImage(read_pfm(path));
  } catch (const Error& e) {
    if (e.category() == ErrorCategory::io) throw;
    fail(e.category(), path.string() + ": " + e.what());
  }
}

/// Linear normalized images only; other domains are not representable as PFM.
inline void write_pfm(const std::filesystem::path& path, const NormalizedImage& img) {
  require_domain(img, Domain::linear, "write_pfm");
  write_pfm(path, img.pixels());
}

inline NormalizedImage read_linear_pfm(const std::filesystem::path& path) {
  try {
    return NormalizedImage(read_pfm(path), Domain::linear);
  } catch (const Error& e) {
    if (e.category() == ErrorCategory::io) throw;
    fail(e.category(), path.string() + ": " + e.what());
  }
}

}  // namespace eshdr::io
