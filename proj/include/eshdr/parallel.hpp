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

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace eshdr {

namespace detail {
inline std::atomic<unsigned>& thread_setting() {
  static std::atomic<unsigned> threads{0};
  return threads;
}
}  // namespace detail

/// Worker count for intra-stage loops; 0 selects hardware concurrency.
inline void set_thread_count(unsigned threads) { detail::thread_setting() = threads; }

inline unsigned thread_count() {
  const unsigned configured = detail::thread_setting();
  if (configured != 0) return configured;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [begin, end) over contiguous static chunks. Callers
/// write only to slots owned by i, so results never depend on the thread count.
template <typename Fn>
void parallel_for(std::ptrdiff_t begin, std::ptrdiff_t end, Fn&& fn) {
  const std::ptrdiff_t n = end - begin;
  if (n <= 0) return;
  const auto workers = static_cast<std::ptrdiff_t>(std::min<std::ptrdiff_t>(thread_count(), n));
  if (workers <= 1) {
    for (std::ptrdiff_t i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  pool.reserve(static_cast<std::size_t>(workers));
  for (std::ptrdiff_t w = 0; w < workers; ++w) {
    const std::ptrdiff_t lo = begin + n * w / workers;
    const std::ptrdiff_t hi = begin + n * (w + 1) / workers;
    pool.emplace_back([&, lo, hi, w] {
      try {
        for (std::ptrdiff_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace eshdr
