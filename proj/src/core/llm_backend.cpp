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
#include "core/llm_backend.hpp"

#include <cmath>
#include <thread>

#include "core/error.hpp"
#include "core/mock_backend.hpp"
#include "core/openai_backend.hpp"
#include "core/response_cache.hpp"
#include "core/util.hpp"

namespace greenjudge {

using nlohmann::json;

void validate_request(const CompletionRequest& request) {
  if (!(request.temperature >= 0.0)) fail(ErrorCode::kInvalidArgument, "temperature must be >= 0");
  if (request.top_logprobs > kMaxTopLogprobs) {
    fail(ErrorCode::kInvalidArgument, "top_logprobs must be <= 20");
  }
  if (request.max_tokens == 0) fail(ErrorCode::kInvalidArgument, "max_tokens must be positive");
  if (request.messages.empty()) fail(ErrorCode::kInvalidArgument, "request has no messages");
}

double TokenDistribution::total() const {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.probability;
  return sum;
}

void validate_distribution(const TokenDistribution& dist) {
  for (const auto& e : dist.entries) {
    if (!(e.probability > 0.0 && e.probability <= 1.0)) {
      fail(ErrorCode::kInvalidArgument, "token probability out of (0,1]: " + e.token);
    }
  }
  if (dist.total() > 1.0 + 1e-9) fail(ErrorCode::kInvalidArgument, "token probabilities sum past 1");
}

json request_to_json(const CompletionRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  return json{{"model_id", request.model_id},
              {"messages", messages},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens},
              {"want_logprobs", request.want_logprobs},
              {"top_logprobs", request.top_logprobs}};
}

json response_to_json(const CompletionResponse& response) {
  json positions = json::array();
  for (const auto& pos : response.per_position_logprobs) {
    json alts = json::array();
    for (const auto& e : pos.alternatives.entries) alts.push_back({e.token, e.probability});
    positions.push_back({{"token", pos.token}, {"top", alts}});
  }
  return json{{"text", response.text},
              {"logprobs", positions},
              {"usage",
               {{"prompt_tokens", response.usage.prompt_tokens},
                {"completion_tokens", response.usage.completion_tokens}}}};
}

CompletionResponse response_from_json(const json& j) {
  CompletionResponse r;
  r.text = j.at("text").get<std::string>();
  for (const auto& pos : j.at("logprobs")) {
    TokenPosition p;
    p.token = pos.at("token").get<std::string>();
    for (const auto& alt : pos.at("top")) {
      p.alternatives.entries.push_back({alt.at(0).get<std::string>(), alt.at(1).get<double>()});
    }
    r.per_position_logprobs.push_back(std::move(p));
  }
  r.usage.prompt_tokens = j.at("usage").at("prompt_tokens").get<std::uint64_t>();
  r.usage.completion_tokens = j.at("usage").at("completion_tokens").get<std::uint64_t>();
  return r;
}

std::string cache_key(const CompletionRequest& request, std::string_view backend_namespace) {
  json material = request_to_json(request);
  material["namespace"] = backend_namespace;
  // nlohmann::json objects are key-sorted, so the dump is canonical.
  return sha256_hex(material.dump());
}

RateLimiter::RateLimiter(double requests_per_minute, double tokens_per_minute)
    : tokens_per_minute_(tokens_per_minute) {
  if (requests_per_minute < 0 || tokens_per_minute < 0) {
    fail(ErrorCode::kInvalidArgument, "rate limits must be non-negative");
  }
  if (requests_per_minute > 0) {
    min_interval_ = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(60.0 / requests_per_minute));
  }
}

void RateLimiter::acquire(std::uint64_t estimated_tokens) {
  for (;;) {
    Clock::time_point wake;
    {
      std::lock_guard lock(mu_);
      const auto now = Clock::now();
      while (!window_.empty() && now - window_.front().first >= std::chrono::minutes(1)) {
        window_tokens_ -= window_.front().second;
        window_.pop_front();
      }
      bool tokens_ok = tokens_per_minute_ <= 0 || window_.empty() ||
                       static_cast<double>(window_tokens_ + estimated_tokens) <= tokens_per_minute_;
      if (!tokens_ok) {
        wake = window_.front().first + std::chrono::minutes(1);
      } else if (now < next_slot_) {
        wake = next_slot_;
      } else {
        next_slot_ = now + min_interval_;
        if (tokens_per_minute_ > 0) {
          window_.emplace_back(now, estimated_tokens);
          window_tokens_ += estimated_tokens;
        }
        return;
      }
    }
    std::this_thread::sleep_until(wake);
  }
}

std::uint64_t estimate_tokens(const CompletionRequest& request) {
  std::uint64_t chars = 0;
  for (const auto& m : request.messages) chars += m.content.size();
  return chars / 4 + request.max_tokens;
}

CompletionResponse RateLimitedBackend::complete(const CompletionRequest& request) {
  limiter_->acquire(estimate_tokens(request));
  return inner_->complete(request);
}

CachedBackend::CachedBackend(std::shared_ptr<Backend> inner, std::shared_ptr<ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

CompletionResponse CachedBackend::complete(const CompletionRequest& request) {
  validate_request(request);
  ++requests_;
  const std::string ns = inner_->cache_namespace();
  const std::string key = cache_key(request, ns);
  if (auto hit = cache_->lookup(key)) {
    ++hits_;
    hit->cache_hit = true;
    return *hit;
  }
  ++calls_;
  CompletionResponse response = inner_->complete(request);
  response.cache_hit = false;
  prompt_tokens_ += response.usage.prompt_tokens;
  completion_tokens_ += response.usage.completion_tokens;
  json material = request_to_json(request);
  material["namespace"] = ns;
  cache_->store(key, material, response);
  return response;
}

BackendStats CachedBackend::stats() const {
  BackendStats s;
  s.requests = requests_.load();
  s.cache_hits = hits_.load();
  s.provider_calls = calls_.load();
  s.prompt_tokens = prompt_tokens_.load();
  s.completion_tokens = completion_tokens_.load();
  return s;
}

void CachedBackend::reset_stats() {
  requests_ = 0;
  hits_ = 0;
  calls_ = 0;
  prompt_tokens_ = 0;
  completion_tokens_ = 0;
}

BackendConfig BackendConfig::from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::kConfigError, "backend config must be an object");
  BackendConfig c;
  c.options = j;
  c.kind = j.value("kind", std::string("mock"));
  if (c.kind != "mock" && c.kind != "openai") {
    fail(ErrorCode::kConfigError, "backend kind must be 'mock' or 'openai', got '" + c.kind + "'");
  }
  c.model_id = j.value("model_id", std::string());
  c.cache_dir = j.value("cache_dir", std::string());
  c.requests_per_minute = j.value("requests_per_minute", 0.0);
  if (j.contains("requests_per_second")) {
    c.requests_per_minute = 60.0 * j["requests_per_second"].get<double>();
  }
  c.tokens_per_minute = j.value("tokens_per_minute", 0.0);
  return c;
}

json BackendConfig::to_json() const {
  json j = options.is_object() ? options : json::object();
  j["kind"] = kind;
  if (!model_id.empty()) j["model_id"] = model_id;
  if (!cache_dir.empty()) j["cache_dir"] = cache_dir;
  j.erase("requests_per_second");
  if (requests_per_minute > 0) j["requests_per_minute"] = requests_per_minute;
  if (tokens_per_minute > 0) j["tokens_per_minute"] = tokens_per_minute;
  return j;
}

std::shared_ptr<Backend> make_provider(const BackendConfig& config) {
  if (config.kind == "openai") return make_openai_backend(config);
  return make_mock_backend(config);
}

namespace {

std::string default_model(const BackendConfig& config) {
  if (!config.model_id.empty()) return config.model_id;
  return config.kind == "openai" ? std::string(kDefaultOpenAIModel) : std::string(kDefaultMockModel);
}

}  // namespace

BackendStack::BackendStack(const BackendConfig& config) : BackendStack(make_provider(config), config) {}

BackendStack::BackendStack(std::shared_ptr<Backend> provider, const BackendConfig& config)
    : config_(config), model_id_(default_model(config)), provider_(std::move(provider)) {
  std::shared_ptr<Backend> layer = provider_;
  if (config.requests_per_minute > 0 || config.tokens_per_minute > 0) {
    layer = std::make_shared<RateLimitedBackend>(
        layer, std::make_shared<RateLimiter>(config.requests_per_minute, config.tokens_per_minute));
  }
  cached_ = std::make_shared<CachedBackend>(
      layer, std::make_shared<ResponseCache>(std::filesystem::path(config.cache_dir)));
}

}  // namespace greenjudge
