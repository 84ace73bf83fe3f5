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

#include <stdexcept>
#include <string>
#include <string_view>

namespace mtad {

// Failure categories. The snake_case name of each code is what the benchmark
// report prints inside NA(...) cells.
enum class ErrorCode {
  io,
  parse,
  non_finite,
  invalid_label,
  dimension_mismatch,
  no_informative_kpis,
  zero_variance,
  invalid_argument,
  degenerate_labels,
  insufficient_tail,
  constant_scores,
  length_mismatch,
  double_adjustment,
  nested_timing,
  detector_failed,
};

constexpr std::string_view reason_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::io: return "io";
    case ErrorCode::parse: return "parse";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::invalid_label: return "invalid_label";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::no_informative_kpis: return "no_informative_kpis";
    case ErrorCode::zero_variance: return "zero_variance";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::degenerate_labels: return "degenerate_labels";
    case ErrorCode::insufficient_tail: return "insufficient_tail";
    case ErrorCode::constant_scores: return "constant_scores";
    case ErrorCode::length_mismatch: return "length_mismatch";
    case ErrorCode::double_adjustment: return "double_adjustment";
    case ErrorCode::nested_timing: return "nested_timing";
    case ErrorCode::detector_failed: return "detector_failed";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace mtad
