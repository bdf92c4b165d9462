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
#include "core/batch.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace greenjudge {

std::vector<BatchOutcome> run_batch(Backend& backend, std::span<const CompletionRequest> requests,
                                    const BatchOptions& options) {
  if (options.max_in_flight == 0) fail(ErrorCode::kInvalidArgument, "max_in_flight must be >= 1");
  std::vector<BatchOutcome> outcomes(requests.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> cancelled{false};
  std::mutex first_error_mu;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (;;) {
      if (cancelled.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= requests.size()) return;
      try {
        outcomes[i].response = backend.complete(requests[i]);
      } catch (const Error& e) {
        outcomes[i].error = ItemError{e.code(), e.what()};
        if (options.mode == BatchMode::kFailFast) {
          std::lock_guard lock(first_error_mu);
          if (!first_error) first_error = std::current_exception();
          cancelled = true;
        }
      } catch (const std::exception& e) {
        outcomes[i].error = ItemError{ErrorCode::kInternal, e.what()};
        if (options.mode == BatchMode::kFailFast) {
          std::lock_guard lock(first_error_mu);
          if (!first_error) first_error = std::current_exception();
          cancelled = true;
        }
      }
    }
  };

  const std::size_t n_workers = std::min(options.max_in_flight, requests.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);
  return outcomes;
}

}  // namespace greenjudge
