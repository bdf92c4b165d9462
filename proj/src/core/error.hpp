// Copyright 2026 The greenjudge Authors.
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

#ifndef GREENJUDGE_CORE_ERROR_HPP_
#define GREENJUDGE_CORE_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace greenjudge {

// Numeric values are part of the C ABI (see include/greenjudge/greenjudge.h).
enum class ErrorCode : int {
  kOk = 0,
  kParseError = 1,
  kDuplicateKey = 2,
  kEmptyText = 3,
  kInsufficientPopulation = 4,
  kInvalidSpec = 5,
  kAuthError = 6,
  kRateLimited = 7,
  kProviderError = 8,
  kTimeout = 9,
  kConfigMismatch = 10,
  kSelfComparison = 11,
  kNoLogprobs = 12,
  kNoDigitMass = 13,
  kEmptyMass = 14,
  kUnparseableVerdict = 15,
  kInsufficientPool = 16,
  kOutOfRange = 17,
  kBinMismatch = 18,
  kEmptyInput = 19,
  kDegenerateInput = 20,
  kGenerationFailure = 21,
  kIdMismatch = 22,
  kConfigError = 23,
  kIoError = 24,
  kInvalidArgument = 25,
  kCancelled = 26,
  kInternal = 27,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Provider failures carry the HTTP status when one was received.
class ProviderFailure : public Error {
 public:
  ProviderFailure(ErrorCode code, const std::string& message, int status)
      : Error(code, message), status_(status) {}

  int status() const noexcept { return status_; }

 private:
  int status_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace greenjudge

#endif  // GREENJUDGE_CORE_ERROR_HPP_
