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

#include <json.hpp>

#include "eshdr/image.hpp"
#include "eshdr/io/binary.hpp"
#include "eshdr/io/pnm.hpp"

namespace eshdr::io {

using Json = nlohmann::ordered_json;

inline Json read_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail_io(path.string(), e.byte, "malformed JSON");
  }
}

inline void write_json(const std::filesystem::path& path, const Json& doc) {
  write_file(path, doc.dump(2) + "\n");
}

/// Sidecar path for an LDR frame: same stem, ".json" extension.
inline std::filesystem::path sidecar_path(const std::filesystem::path& image_path) {
  auto p = image_path;
  p.replace_extension(".json");
  return p;
}

inline Json capture_to_json(const CaptureInfo& info) {
  return Json{{"ev", info.ev},
              {"exposure_time", info.exposure_time},
              {"timestamp_ns", info.timestamp}};
}

inline CaptureInfo capture_from_json(const Json& doc, const std::string& source) {
  try {
    CaptureInfo info;
    info.ev = doc.at("ev").get<double>();
    info.exposure_time = doc.at("exposure_time").get<double>();
    info.timestamp = doc.at("timestamp_ns").get<TimeNs>();
    return info;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::io, source + ": invalid capture sidecar: " + e.what());
  }
}

inline void write_ldr_frame(const std::filesystem::path& image_path, const LdrFrame& frame) {
  write_pnm(image_path, frame.codes());
  write_json(sidecar_path(image_path), capture_to_json(frame.info()));
}

inline LdrFrame read_ldr_frame(const std::filesystem::path& image_path) {
  auto codes = read_pnm(image_path);
  const auto side = sidecar_path(image_path);
  const CaptureInfo info = capture_from_json(read_json(side), side.string());
  return LdrFrame(std::move(codes), info);
}

}  // namespace eshdr::io
