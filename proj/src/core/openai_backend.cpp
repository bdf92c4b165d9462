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
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "core/openai_backend.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "core/error.hpp"

namespace greenjudge {

using nlohmann::json;

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* value = std::getenv(name);
  return (value && *value) ? std::string(value) : std::move(fallback);
}

std::string excerpt(const std::string& body) {
  constexpr std::size_t kMax = 300;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

bool retryable_status(int status) {
  return status == 408 || status == 409 || status == 429 || status >= 500;
}

}  // namespace

OpenAIOptions OpenAIOptions::from_config(const BackendConfig& config) {
  const json& o = config.options;
  OpenAIOptions opts;
  opts.base_url = o.value("base_url", env_or("OPENAI_BASE_URL", std::string(kDefaultBaseUrl)));
  const std::string key_env = o.value("api_key_env", std::string("OPENAI_API_KEY"));
  opts.api_key = env_or(key_env.c_str(), "");
  opts.max_retries = o.value("max_retries", opts.max_retries);
  opts.initial_backoff = std::chrono::milliseconds(o.value("initial_backoff_ms", 500));
  opts.max_backoff = std::chrono::milliseconds(o.value("max_backoff_ms", 30000));
  opts.timeout = std::chrono::seconds(o.value("timeout_s", 60));
  if (opts.max_retries < 0) fail(ErrorCode::kConfigError, "max_retries must be >= 0");
  return opts;
}

OpenAIBackend::OpenAIBackend(OpenAIOptions options) : options_(std::move(options)) {
  const auto scheme_end = options_.base_url.find("://");
  if (scheme_end == std::string::npos) {
    fail(ErrorCode::kConfigError, "base_url must include a scheme: " + options_.base_url);
  }
  const auto path_start = options_.base_url.find('/', scheme_end + 3);
  scheme_host_ = options_.base_url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : options_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string OpenAIBackend::cache_namespace() const { return "openai:" + options_.base_url; }

json build_chat_request_body(const CompletionRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  json body{{"model", request.model_id},
            {"messages", messages},
            {"temperature", request.temperature},
            {"max_tokens", request.max_tokens}};
  if (request.want_logprobs) {
    body["logprobs"] = true;
    body["top_logprobs"] = request.top_logprobs;
  }
  return body;
}

CompletionResponse parse_chat_completion(const json& body, bool want_logprobs) {
  CompletionResponse r;
  try {
    const auto& choice = body.at("choices").at(0);
    const auto& content = choice.at("message").at("content");
    r.text = content.is_null() ? std::string() : content.get<std::string>();
    if (want_logprobs && choice.contains("logprobs") && !choice["logprobs"].is_null()) {
      for (const auto& pos : choice["logprobs"].at("content")) {
        TokenPosition p;
        p.token = pos.at("token").get<std::string>();
        const auto& top = pos.value("top_logprobs", json::array());
        for (const auto& alt : top) {
          const double prob = std::exp(alt.at("logprob").get<double>());
          if (prob > 0.0) p.alternatives.entries.push_back({alt.at("token").get<std::string>(), std::min(prob, 1.0)});
        }
        if (p.alternatives.entries.empty()) {
          p.alternatives.entries.push_back({p.token, std::min(std::exp(pos.at("logprob").get<double>()), 1.0)});
        }
        r.per_position_logprobs.push_back(std::move(p));
      }
    }
    if (body.contains("usage") && body["usage"].is_object()) {
      r.usage.prompt_tokens = body["usage"].value("prompt_tokens", std::uint64_t{0});
      r.usage.completion_tokens = body["usage"].value("completion_tokens", std::uint64_t{0});
    }
  } catch (const json::exception& e) {
    throw ProviderFailure(ErrorCode::kProviderError,
                          std::string("malformed chat completion: ") + e.what(), 200);
  }
  return r;
}

namespace {

// Retry-After in delta-seconds; HTTP dates and junk are ignored.
std::chrono::milliseconds retry_after(const httplib::Response& res) {
  if (!res.has_header("Retry-After")) return std::chrono::milliseconds{0};
  const auto value = res.get_header_value("Retry-After");
  double seconds = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), seconds);
  if (ec != std::errc() || ptr != value.data() + value.size() || !(seconds > 0.0)) {
    return std::chrono::milliseconds{0};
  }
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::min(seconds, 86400.0) * 1000.0));
}

}  // namespace

CompletionResponse OpenAIBackend::complete(const CompletionRequest& request) {
  validate_request(request);
  if (options_.api_key.empty()) {
    throw ProviderFailure(ErrorCode::kAuthError, "no API key configured", 0);
  }
  const std::string payload = build_chat_request_body(request).dump();
  httplib::Headers headers{{"Authorization", "Bearer " + options_.api_key}};

  ErrorCode last_code = ErrorCode::kProviderError;
  std::string last_message;
  int last_status = 0;
  std::chrono::milliseconds server_delay{0};  // from Retry-After
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      auto delay = options_.initial_backoff * (1LL << std::min(attempt - 1, 20));
      delay = std::max<std::chrono::milliseconds>(delay, server_delay);
      delay = std::min<std::chrono::milliseconds>(delay, options_.max_backoff);
      std::this_thread::sleep_for(delay);
    }
    server_delay = std::chrono::milliseconds{0};
    httplib::Client client(scheme_host_);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    client.set_write_timeout(options_.timeout);
    auto res = client.Post(path_prefix_ + "/chat/completions", headers, payload, "application/json");
    if (!res) {
      const auto err = res.error();
      last_status = 0;
      last_code = (err == httplib::Error::Read || err == httplib::Error::Write ||
                   err == httplib::Error::ConnectionTimeout)
                      ? ErrorCode::kTimeout
                      : ErrorCode::kProviderError;
      last_message = "transport error: " + httplib::to_string(err);
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw ProviderFailure(ErrorCode::kAuthError,
                            "authentication rejected (" + std::to_string(res->status) +
                                "): " + excerpt(res->body),
                            res->status);
    }
    if (res->status >= 200 && res->status < 300) {
      json body;
      try {
        body = json::parse(res->body);
      } catch (const json::exception&) {
        throw ProviderFailure(ErrorCode::kProviderError, "non-JSON body: " + excerpt(res->body), res->status);
      }
      return parse_chat_completion(body, request.want_logprobs);
    }
    last_status = res->status;
    last_code = res->status == 429 ? ErrorCode::kRateLimited : ErrorCode::kProviderError;
    last_message = "HTTP " + std::to_string(res->status) + ": " + excerpt(res->body);
    server_delay = retry_after(*res);
    if (!retryable_status(res->status)) break;
  }
  throw ProviderFailure(last_code, last_message, last_status);
}

std::shared_ptr<Backend> make_openai_backend(const BackendConfig& config) {
  return std::make_shared<OpenAIBackend>(OpenAIOptions::from_config(config));
}

}  // namespace greenjudge
