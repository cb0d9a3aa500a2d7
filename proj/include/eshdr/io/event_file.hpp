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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eshdr/events.hpp"
#include "eshdr/io/binary.hpp"

namespace eshdr::io {

// ESHDR1 event file, all little-endian:
//   magic     8 bytes  "ESHDR1" followed by two NUL bytes
//   version   u32      1
//   width     u32
//   height    u32
//   c         f64      contrast threshold
//   log_floor f64
//   begin     i64      recording span start, ns
//   end       i64      recording span end, ns
//   count     u64
//   count records of 16 bytes: u64 t_ns, u16 x, u16 y, i8 polarity, 3 zero bytes

inline constexpr std::string_view kEventMagic{"ESHDR1\0\0", 8};
inline constexpr std::uint32_t kEventVersion = 1;
inline constexpr std::size_t kEventHeaderSize = 8 + 4 + 4 + 4 + 8 + 8 + 8 + 8 + 8;
inline constexpr std::size_t kEventRecordSize = 16;

inline std::string encode_events(const EventStream& stream) {
  std::string out(kEventMagic);
  out.reserve(kEventHeaderSize + stream.size() * kEventRecordSize);
  put_le<std::uint32_t>(out, kEventVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(stream.width()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(stream.height()));
  put_le<double>(out, stream.contrast_threshold());
  put_le<double>(out, stream.log_floor());
  put_le<std::int64_t>(out, stream.begin());
  put_le<std::int64_t>(out, stream.end());
  put_le<std::uint64_t>(out, stream.size());
  for (const Event& e : stream.events()) {
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(e.t));
    put_le<std::uint16_t>(out, e.x);
    put_le<std::uint16_t>(out, e.y);
    put_le<std::int8_t>(out, e.polarity);
    out.append(3, '\0');
  }
  return out;
}

inline EventStream decode_events(std::string_view bytes, std::string_view source = "<events>") {
  constexpr auto le = std::endian::little;
  if (bytes.size() < kEventMagic.size() || bytes.substr(0, kEventMagic.size()) != kEventMagic)
    fail_io(source, 0, "bad magic, expected \"ESHDR1\\0\\0\"");
  if (bytes.size() < kEventHeaderSize)
    fail_io(source, bytes.size(), "truncated header, need " + std::to_string(kEventHeaderSize) +
                                      " bytes");
  const auto version = get_value<std::uint32_t>(bytes, 8, le);
  if (version != kEventVersion)
    fail_io(source, 8, "unsupported version " + std::to_string(version));
  const auto width = get_value<std::uint32_t>(bytes, 12, le);
  const auto height = get_value<std::uint32_t>(bytes, 16, le);
  if (width < 1 || height < 1 || width > 65535 || height > 65535)
    fail_io(source, 12, "invalid sensor size");
  const auto c = get_value<double>(bytes, 20, le);
  if (!std::isfinite(c) || c <= 0.0) fail_io(source, 20, "invalid contrast threshold");
  const auto log_floor = get_value<double>(bytes, 28, le);
  if (!std::isfinite(log_floor) || log_floor <= 0.0) fail_io(source, 28, "invalid log floor");
  const auto begin = get_value<std::int64_t>(bytes, 36, le);
  const auto end = get_value<std::int64_t>(bytes, 44, le);
  if (begin < 0 || end < begin) fail_io(source, 36, "invalid recording span");
  const auto count = get_value<std::uint64_t>(bytes, 52, le);
  const std::size_t available = (bytes.size() - kEventHeaderSize) / kEventRecordSize;
  if (count > available || bytes.size() - kEventHeaderSize != count * kEventRecordSize)
    fail_io(source, 52,
            "record count " + std::to_string(count) + " does not match payload of " +
                std::to_string(bytes.size() - kEventHeaderSize) + " bytes");

  std::vector<Event> events(count);
  std::size_t at = kEventHeaderSize;
  for (std::uint64_t i = 0; i < count; ++i, at += kEventRecordSize) {
    Event e;
    const auto t = get_value<std::uint64_t>(bytes, at, le);
    if (t > static_cast<std::uint64_t>(INT64_MAX)) fail_io(source, at, "timestamp overflow");
    e.t = static_cast<TimeNs>(t);
    e.x = get_value<std::uint16_t>(bytes, at + 8, le);
    e.y = get_value<std::uint16_t>(bytes, at + 10, le);
    e.polarity = get_value<std::int8_t>(bytes, at + 12, le);
    if (e.x >= width || e.y >= height) fail_io(source, at + 8, "event outside the sensor");
    if (e.polarity != 1 && e.polarity != -1) fail_io(source, at + 12, "invalid polarity");
    if (bytes[at + 13] != 0 || bytes[at + 14] != 0 || bytes[at + 15] != 0)
      fail_io(source, at + 13, "non-zero record padding");
    if (i > 0 && !event_before(events[i - 1], e))
      fail_io(source, at, "events out of order");
    events[i] = e;
  }
  if (!events.empty() && (events.front().t < begin || events.back().t > end))
    fail_io(source, 36, "recording span does not cover the events");
  EventStream stream(static_cast<int>(width), static_cast<int>(height), c, log_floor,
                     std::move(events));
  stream.set_span(begin, end);
  return stream;
}

inline void write_events(const std::filesystem::path& path, const EventStream& stream) {
  write_file(path, encode_events(stream));
}

inline EventStream read_events(const std::filesystem::path& path) {
  return decode_events(read_file(path), path.string());
}

/// Debug export, one "t_ns,x,y,p" row per event.
inline std::string events_to_csv(const EventStream& stream) {
  std::string out = "t_ns,x,y,p\n";
  for (const Event& e : stream.events()) {
    out += std::to_string(e.t);
    out += ',';
    out += std::to_string(e.x);
    out += ',';
    out += std::to_string(e.y);
    out += ',';
    out += std::to_string(static_cast<int>(e.polarity));
    out += '\n';
  }
  return out;
}

}  // namespace eshdr::io
