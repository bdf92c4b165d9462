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
#ifndef GREENJUDGE_CORE_BATCH_HPP_
#define GREENJUDGE_CORE_BATCH_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/llm_backend.hpp"

namespace greenjudge {

enum class BatchMode { kFailFast, kCollect };

struct BatchOptions {
  std::size_t max_in_flight = 8;
  BatchMode mode = BatchMode::kFailFast;
};

struct ItemError {
  ErrorCode code = ErrorCode::kInternal;
  std::string message;
};

struct BatchOutcome {
  std::optional<CompletionResponse> response;
  std::optional<ItemError> error;

  bool ok() const { return response.has_value(); }
};

// Issues every request with at most max_in_flight outstanding and returns
// outcomes in request order. Fail-fast stops dispatching after the first
// error and rethrows it; collect mode records per-item errors.
std::vector<BatchOutcome> run_batch(Backend& backend, std::span<const CompletionRequest> requests,
                                    const BatchOptions& options);

}  // namespace greenjudge

#endif  // GREENJUDGE_CORE_BATCH_HPP_
