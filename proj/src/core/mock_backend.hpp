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
#ifndef GREENJUDGE_CORE_MOCK_BACKEND_HPP_
#define GREENJUDGE_CORE_MOCK_BACKEND_HPP_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "core/llm_backend.hpp"
#include "core/prompting.hpp"

namespace greenjudge {

inline constexpr std::string_view kDefaultMockModel = "mock-judge";

enum class MockJudge { kContent, kSymmetric, kPositionBias };
enum class MockMass { kPoint, kSpread };
enum class MockGreenwasher { kRewrite, kEcho, kEmpty };

// A scripted reply. The first fixture whose "contains" substring occurs in
// the request (all message contents joined) answers it.
struct MockFixture {
  std::string contains;
  std::string text;
  std::vector<TokenPosition> logprobs;
  std::string error;  // "", "provider", "auth", "rate_limited", "timeout"
};

struct MockOptions {
  MockJudge judge = MockJudge::kContent;
  MockMass mass = MockMass::kSpread;
  MockGreenwasher greenwasher = MockGreenwasher::kRewrite;
  std::vector<MockFixture> fixtures;
  std::vector<std::string> fail_on;  // substrings that trigger ProviderError
  std::chrono::milliseconds latency{0};

  static MockOptions from_json(const nlohmann::json& j);
  // Everything except latency, in canonical form.
  nlohmann::json identity() const;
};

// Deterministic offline provider: a pure function of (request, options).
//
// Unscripted requests are answered by recognizing the default prompt
// layouts: <original_response> blocks get a greenwash rewrite, <response_a>
// and <response_b> blocks get a pairwise verdict, and a <response> block
// gets a 1-5 rating derived from content_quality(). Prompts carrying the
// FINAL: directive are answered with a short explanation and a final line.
class MockBackend : public Backend {
 public:
  explicit MockBackend(MockOptions options);

  CompletionResponse complete(const CompletionRequest& request) override;
  std::string cache_namespace() const override { return namespace_; }

  std::uint64_t calls() const { return calls_.load(); }
  const MockOptions& options() const { return options_; }

 private:
  MockOptions options_;
  std::string namespace_;
  std::atomic<std::uint64_t> calls_{0};
};

// The deterministic rewrite the mock greenwasher applies under a regime.
// Looser regimes strictly add disclosure elements on top of tighter ones.
std::string mock_greenwash(std::string_view text, GreenwashConstraint constraint);

std::shared_ptr<Backend> make_mock_backend(const BackendConfig& config);

}  // namespace greenjudge

#endif  // GREENJUDGE_CORE_MOCK_BACKEND_HPP_
