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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cloudfuse {

enum class ErrorCode {
  kInvalidArgument,
  kInsufficientCorrespondences,
  kDegenerateConfiguration,
  kNoOverlap,
  kParse,
  kUnsupportedFormat,
  kInvalidTransform,
  kNotASimilarity,
  kReflectionOrDegenerate,
  kNotInvertible,
  kFrameMismatch,
  kValidation,
  kInvalidScene,
  kIo,
};

// Stable kebab-case identifier, used in CLI messages and HTTP payloads.
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Malformed file content. line() is 1-based; 0 when the failure is not tied
// to a line (binary payloads).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// ICP found no pair within the distance threshold. iteration() is 1-based.
class NoOverlapError : public Error {
 public:
  explicit NoOverlapError(int iteration);

  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

}  // namespace cloudfuse
