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
#ifndef GREENJUDGE_CORE_LLM_BACKEND_HPP_
#define GREENJUDGE_CORE_LLM_BACKEND_HPP_

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace greenjudge {

struct Message {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;

  friend bool operator==(const Message&, const Message&) = default;
};

using MessageList = std::vector<Message>;

inline constexpr std::size_t kMaxTopLogprobs = 20;

struct CompletionRequest {
  std::string model_id;
  MessageList messages;
  double temperature = 0.0;
  std::size_t max_tokens = 16;
  bool want_logprobs = true;
  std::size_t top_logprobs = kMaxTopLogprobs;
};

// Throws InvalidArgument on negative temperature or top_logprobs > 20.
void validate_request(const CompletionRequest& request);

struct TokenProb {
  std::string token;
  double probability = 0.0;  // linear space, in (0, 1]

  friend bool operator==(const TokenProb&, const TokenProb&) = default;
};

// Top-k alternatives at one position. Providers return only the head of the
// distribution, so the entries may sum to less than one.
struct TokenDistribution {
  std::vector<TokenProb> entries;

  double total() const;
  friend bool operator==(const TokenDistribution&, const TokenDistribution&) = default;
};

// Throws InvalidArgument when a probability is outside (0, 1] or the entries
// sum past 1 + 1e-9.
void validate_distribution(const TokenDistribution& dist);

struct TokenPosition {
  std::string token;  // sampled token
  TokenDistribution alternatives;

  friend bool operator==(const TokenPosition&, const TokenPosition&) = default;
};

struct Usage {
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;

  friend bool operator==(const Usage&, const Usage&) = default;
};

struct CompletionResponse {
  std::string text;
  std::vector<TokenPosition> per_position_logprobs;
  Usage usage;
  bool cache_hit = false;

  friend bool operator==(const CompletionResponse&, const CompletionResponse&) = default;
};

nlohmann::json request_to_json(const CompletionRequest& request);
nlohmann::json response_to_json(const CompletionResponse& response);
CompletionResponse response_from_json(const nlohmann::json& j);

// Content hash over (namespace, model_id, messages, temperature, max_tokens,
// want_logprobs, top_logprobs). The namespace separates providers that share
// a model id, such as differently configured mocks.
std::string cache_key(const CompletionRequest& request, std::string_view backend_namespace);

class Backend {
 public:
  virtual ~Backend() = default;

  // Safe for concurrent callers.
  virtual CompletionResponse complete(const CompletionRequest& request) = 0;
  virtual std::string cache_namespace() const = 0;
};

// Minimum-interval request pacing plus a sliding one-minute token window.
// A zero limit disables that dimension.
class RateLimiter {
 public:
  RateLimiter(double requests_per_minute, double tokens_per_minute);

  void acquire(std::uint64_t estimated_tokens);

 private:
  using Clock = std::chrono::steady_clock;

  std::mutex mu_;
  Clock::duration min_interval_{};
  Clock::time_point next_slot_{};
  double tokens_per_minute_ = 0;
  std::deque<std::pair<Clock::time_point, std::uint64_t>> window_;
  std::uint64_t window_tokens_ = 0;
};

std::uint64_t estimate_tokens(const CompletionRequest& request);

class RateLimitedBackend : public Backend {
 public:
  RateLimitedBackend(std::shared_ptr<Backend> inner, std::shared_ptr<RateLimiter> limiter)
      : inner_(std::move(inner)), limiter_(std::move(limiter)) {}

  CompletionResponse complete(const CompletionRequest& request) override;
  std::string cache_namespace() const override { return inner_->cache_namespace(); }

 private:
  std::shared_ptr<Backend> inner_;
  std::shared_ptr<RateLimiter> limiter_;
};

struct BackendStats {
  std::uint64_t requests = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t provider_calls = 0;
  std::uint64_t prompt_tokens = 0;      // non-cached completions only
  std::uint64_t completion_tokens = 0;  // non-cached completions only
};

class ResponseCache;

// Serves repeated requests from the cache and accounts usage for the rest.
class CachedBackend : public Backend {
 public:
  CachedBackend(std::shared_ptr<Backend> inner, std::shared_ptr<ResponseCache> cache);

  CompletionResponse complete(const CompletionRequest& request) override;
  std::string cache_namespace() const override { return inner_->cache_namespace(); }

  BackendStats stats() const;
  void reset_stats();

 private:
  std::shared_ptr<Backend> inner_;
  std::shared_ptr<ResponseCache> cache_;
  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> calls_{0};
  std::atomic<std::uint64_t> prompt_tokens_{0};
  std::atomic<std::uint64_t> completion_tokens_{0};
};

struct BackendConfig {
  std::string kind = "mock";  // "mock" | "openai"
  std::string model_id;       // defaults per kind when empty
  std::string cache_dir;      // empty: in-memory cache only
  double requests_per_minute = 0;
  double tokens_per_minute = 0;
  nlohmann::json options = nlohmann::json::object();  // kind-specific keys

  static BackendConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// The bare provider for config.kind, without rate limiting or caching.
std::shared_ptr<Backend> make_provider(const BackendConfig& config);

// provider -> rate limiter -> cache, built from a BackendConfig.
class BackendStack : public Backend {
 public:
  explicit BackendStack(const BackendConfig& config);
  BackendStack(std::shared_ptr<Backend> provider, const BackendConfig& config);

  CompletionResponse complete(const CompletionRequest& request) override {
    return cached_->complete(request);
  }
  std::string cache_namespace() const override { return cached_->cache_namespace(); }

  const std::string& model_id() const { return model_id_; }
  const BackendConfig& config() const { return config_; }
  BackendStats stats() const { return cached_->stats(); }
  void reset_stats() { cached_->reset_stats(); }
  Backend& provider() { return *provider_; }

 private:
  BackendConfig config_;
  std::string model_id_;
  std::shared_ptr<Backend> provider_;
  std::shared_ptr<CachedBackend> cached_;
};

}  // namespace greenjudge

#endif  // GREENJUDGE_CORE_LLM_BACKEND_HPP_
