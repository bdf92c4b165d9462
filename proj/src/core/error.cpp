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

#include "core/error.hpp"

namespace greenjudge {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDuplicateKey: return "DuplicateKey";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kInsufficientPopulation: return "InsufficientPopulation";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kAuthError: return "AuthError";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kProviderError: return "ProviderError";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kConfigMismatch: return "ConfigMismatch";
    case ErrorCode::kSelfComparison: return "SelfComparison";
    case ErrorCode::kNoLogprobs: return "NoLogprobs";
    case ErrorCode::kNoDigitMass: return "NoDigitMass";
    case ErrorCode::kEmptyMass: return "EmptyMass";
    case ErrorCode::kUnparseableVerdict: return "UnparseableVerdict";
    case ErrorCode::kInsufficientPool: return "InsufficientPool";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kBinMismatch: return "BinMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kGenerationFailure: return "GenerationFailure";
    case ErrorCode::kIdMismatch: return "IdMismatch";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kCancelled: return "Cancelled";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace greenjudge
