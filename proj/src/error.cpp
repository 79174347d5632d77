// Copyright 2026 The cloudfuse Authors
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

#include "cloudfuse/error.hpp"

namespace cloudfuse {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInsufficientCorrespondences: return "insufficient-correspondences";
    case ErrorCode::kDegenerateConfiguration: return "degenerate-configuration";
    case ErrorCode::kNoOverlap: return "no-overlap";
    case ErrorCode::kParse: return "parse-error";
    case ErrorCode::kUnsupportedFormat: return "unsupported-format";
    case ErrorCode::kInvalidTransform: return "invalid-transform";
    case ErrorCode::kNotASimilarity: return "not-a-similarity";
    case ErrorCode::kReflectionOrDegenerate: return "reflection-or-degenerate";
    case ErrorCode::kNotInvertible: return "not-invertible";
    case ErrorCode::kFrameMismatch: return "frame-mismatch";
    case ErrorCode::kValidation: return "validation-error";
    case ErrorCode::kInvalidScene: return "invalid-scene";
    case ErrorCode::kIo: return "io-error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorCode::kParse,
            line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

NoOverlapError::NoOverlapError(int iteration)
    : Error(ErrorCode::kNoOverlap,
            "no correspondence within max_pair_distance at iteration " +
                std::to_string(iteration)),
      iteration_(iteration) {}

}  // namespace cloudfuse
