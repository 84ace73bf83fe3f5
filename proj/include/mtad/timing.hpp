/*
 * Copyright 2026 The mtad Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <chrono>
#include <mutex>
#include <shared_mutex>

#include "mtad/error.hpp"

namespace mtad {

// Global gate between timed phases and everything else. Untimed work of
// concurrent jobs runs under a SharedSection; a timed phase takes the gate
// exclusively, so nothing else executes while it is being measured.
inline std::shared_mutex& execution_gate() {
  static std::shared_mutex gate;
  return gate;
}

namespace detail {
inline thread_local bool timing_active = false;
inline thread_local bool shared_section_held = false;
}  // namespace detail

class SharedSection {
 public:
  SharedSection() : lock_(execution_gate()) { detail::shared_section_held = true; }
  ~SharedSection() { detail::shared_section_held = false; }
  SharedSection(const SharedSection&) = delete;
  SharedSection& operator=(const SharedSection&) = delete;

 private:
  std::shared_lock<std::shared_mutex> lock_;
};

// Runs `phase` under the exclusive gate and returns its monotonic wall-clock
// duration in seconds.
template <class Phase>
double time_phase(Phase&& phase) {
  require(!detail::timing_active, ErrorCode::nested_timing, "nested timing is not allowed");
  require(!detail::shared_section_held, ErrorCode::nested_timing,
          "time_phase called while holding a shared section");
  std::unique_lock lock(execution_gate());
  detail::timing_active = true;
  struct Reset {
    ~Reset() { detail::timing_active = false; }
  } reset;
  const auto start = std::chrono::steady_clock::now();
  phase();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count();
}

}  // namespace mtad
