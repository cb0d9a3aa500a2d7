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

#include <cmath>
#include <filesystem>

#include "eshdr/align.hpp"
#include "eshdr/io/pfm.hpp"

namespace eshdr::io {

/// Flow as a three-channel PFM: u, v, validity in {0, 1}.
inline Image<float> flow_to_image(const FlowField& flow) {
  Image<float> out(flow.width(), flow.height(), 3);
  for (int y = 0; y < flow.height(); ++y)
    for (int x = 0; x < flow.width(); ++x) {
      out(x, y, 0) = flow.u(x, y);
      out(x, y, 1) = flow.v(x, y);
      out(x, y, 2) = flow.valid(x, y) ? 1.0f : 0.0f;
    }
  return out;
}

inline FlowField flow_from_image(const Image<float>& img, std::string_view source = "<flow>") {
  require(img.channels() == 3, ErrorCategory::validation,
          std::string(source) + ": flow file must have 3 channels");
  FlowField flow(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const float u = img(x, y, 0), v = img(x, y, 1), ok = img(x, y, 2);
      require(std::isfinite(u) && std::isfinite(v), ErrorCategory::validation,
              std::string(source) + ": flow component is not finite");
      require(ok == 0.0f || ok == 1.0f, ErrorCategory::validation,
              std::string(source) + ": flow validity must be 0 or 1");
      flow.uv(x, y, 0) = u;
      flow.uv(x, y, 1) = v;
      flow.valid(x, y) = ok == 1.0f ? 1 : 0;
    }
  return flow;
}

inline void write_flow(const std::filesystem::path& path, const FlowField& flow) {
  write_pfm(path, flow_to_image(flow));
}

inline FlowField read_flow(const std::filesystem::path& path) {
  return flow_from_image(read_pfm(path), path.string());
}

}  // namespace eshdr::io
