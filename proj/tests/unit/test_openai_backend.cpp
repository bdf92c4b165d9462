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
// Must match the core library's httplib configuration.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "core/openai_backend.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <gtest/gtest.h>

#include "test_support.hpp"

namespace greenjudge {
namespace {

using nlohmann::json;

// Local OpenAI-compatible server driven by a handler.
class FakeServer {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  explicit FakeServer(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      {
        std::lock_guard lock(mu_);
        bodies_.push_back(req.body);
        auth_.push_back(req.get_header_value("Authorization"));
      }
      ++hits_;
      handler_(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  OpenAIOptions options() const {
    OpenAIOptions o;
    o.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    o.api_key = "sk-test";
    o.max_retries = 3;
    o.initial_backoff = std::chrono::milliseconds(10);
    o.max_backoff = std::chrono::milliseconds(40);
    o.timeout = std::chrono::seconds(5);
    return o;
  }
  int hits() const { return hits_.load(); }
  std::string body(std::size_t i) {
    std::lock_guard lock(mu_);
    return bodies_.at(i);
  }
  std::string auth(std::size_t i) {
    std::lock_guard lock(mu_);
    return auth_.at(i);
  }

 private:
  Handler handler_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> hits_{0};
  std::mutex mu_;
  std::vector<std::string> bodies_;
  std::vector<std::string> auth_;
};

json digit_completion() {
  return json{
      {"choices",
       json::array({{{"message", {{"role", "assistant"}, {"content", "4"}}},
                     {"logprobs",
                      {{"content",
                        json::array({{{"token", "4"},
                                      {"logprob", std::log(0.7)},
                                      {"top_logprobs",
                                       json::array({{{"token", "4"}, {"logprob", std::log(0.7)}},
                                                    {{"token", "3"}, {"logprob", std::log(0.3)}}})}}})}}}}})},
      {"usage", {{"prompt_tokens", 120}, {"completion_tokens", 1}}}};
}

CompletionRequest rating_request() {
  CompletionRequest r;
  r.model_id = "gpt-4o-mini-2024-07-18";
  r.messages = {{"system", "You are a judge."}, {"user", "Rate it."}};
  r.max_tokens = 1;
  return r;
}

TEST(OpenAIBackendTest, WireFormatAndLinearProbabilities) {
  FakeServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(digit_completion().dump(), "application/json");
  });
  OpenAIBackend backend(server.options());
  const auto r = backend.complete(rating_request());
  EXPECT_EQ(r.text, "4");
  ASSERT_EQ(r.per_position_logprobs.size(), 1u);
  const auto& entries = r.per_position_logprobs[0].alternatives.entries;
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].token, "4");
  EXPECT_NEAR(entries[0].probability, 0.7, 1e-12);
  EXPECT_NEAR(entries[1].probability, 0.3, 1e-12);
  EXPECT_EQ(r.usage.prompt_tokens, 120u);

  const auto sent = json::parse(server.body(0));
  EXPECT_EQ(sent.at("model"), "gpt-4o-mini-2024-07-18");
  EXPECT_EQ(sent.at("temperature"), 0.0);
  EXPECT_EQ(sent.at("max_tokens"), 1);
  EXPECT_EQ(sent.at("logprobs"), true);
  EXPECT_EQ(sent.at("top_logprobs"), 20);
  EXPECT_EQ(sent.at("messages").at(1).at("content"), "Rate it.");
  EXPECT_EQ(server.auth(0), "Bearer sk-test");
}

TEST(OpenAIBackendTest, LogprobsOmittedWhenNotWanted) {
  FakeServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(digit_completion().dump(), "application/json");
  });
  OpenAIBackend backend(server.options());
  auto request = rating_request();
  request.want_logprobs = false;
  const auto r = backend.complete(request);
  EXPECT_TRUE(r.per_position_logprobs.empty());
  const auto sent = json::parse(server.body(0));
  EXPECT_FALSE(sent.contains("logprobs"));
  EXPECT_FALSE(sent.contains("top_logprobs"));
}

TEST(OpenAIBackendTest, UnauthorizedIsAuthErrorWithoutRetry) {
  FakeServer server([](const httplib::Request&, httplib::Response& res) {
    res.status = 401;
    res.set_content(R"({"error":{"message":"Incorrect API key"}})", "application/json");
  });
  OpenAIBackend backend(server.options());
  EXPECT_GJ_ERROR(backend.complete(rating_request()), ErrorCode::kAuthError);
  EXPECT_EQ(server.hits(), 1);
}

TEST(OpenAIBackendTest, RetriesTransientThenSucceeds) {
  std::atomic<int> n{0};
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    if (++n <= 2) {
      res.status = 429;
      res.set_content("slow down", "text/plain");
      return;
    }
    res.set_content(digit_completion().dump(), "application/json");
  });
  OpenAIBackend backend(server.options());
  EXPECT_EQ(backend.complete(rating_request()).text, "4");
  EXPECT_EQ(server.hits(), 3);
}

TEST(OpenAIBackendTest, RetryAfterStretchesBackoffUpToCap) {
  std::atomic<int> n{0};
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    if (++n == 1) {
      res.status = 503;
      res.set_header("Retry-After", "0.3");
      return;
    }
    res.set_content(digit_completion().dump(), "application/json");
  });
  auto options = server.options();
  options.max_backoff = std::chrono::milliseconds(2000);
  OpenAIBackend backend(options);
  auto t0 = std::chrono::steady_clock::now();
  EXPECT_EQ(backend.complete(rating_request()).text, "4");
  EXPECT_GE(std::chrono::steady_clock::now() - t0, std::chrono::milliseconds(300));

  // The cap wins over a long Retry-After.
  n = 0;
  options.max_backoff = std::chrono::milliseconds(40);
  OpenAIBackend capped(options);
  t0 = std::chrono::steady_clock::now();
  EXPECT_EQ(capped.complete(rating_request()).text, "4");
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::milliseconds(250));
}

TEST(OpenAIBackendTest, ExhaustedRetriesReportLastFailure) {
  FakeServer rate_limited([](const httplib::Request&, httplib::Response& res) { res.status = 429; });
  OpenAIBackend a(rate_limited.options());
  EXPECT_GJ_ERROR(a.complete(rating_request()), ErrorCode::kRateLimited);
  EXPECT_EQ(rate_limited.hits(), 4);

  FakeServer broken([](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("internal oops", "text/plain");
  });
  OpenAIBackend b(broken.options());
  try {
    b.complete(rating_request());
    FAIL();
  } catch (const ProviderFailure& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProviderError);
    EXPECT_EQ(e.status(), 500);
    EXPECT_NE(std::string(e.what()).find("internal oops"), std::string::npos);
  }
}

TEST(OpenAIBackendTest, ClientErrorIsNotRetried) {
  FakeServer server([](const httplib::Request&, httplib::Response& res) { res.status = 400; });
  OpenAIBackend backend(server.options());
  EXPECT_GJ_ERROR(backend.complete(rating_request()), ErrorCode::kProviderError);
  EXPECT_EQ(server.hits(), 1);
}

TEST(OpenAIBackendTest, MalformedBodyIsProviderError) {
  FakeServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices":[]})", "application/json");
  });
  OpenAIBackend backend(server.options());
  EXPECT_GJ_ERROR(backend.complete(rating_request()), ErrorCode::kProviderError);
}

TEST(OpenAIBackendTest, SlowServerTimesOut) {
  FakeServer server([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(2500));
    res.set_content(digit_completion().dump(), "application/json");
  });
  auto options = server.options();
  options.timeout = std::chrono::seconds(1);
  options.max_retries = 0;
  OpenAIBackend backend(options);
  EXPECT_GJ_ERROR(backend.complete(rating_request()), ErrorCode::kTimeout);
}

TEST(OpenAIBackendTest, MissingKeyIsAuthError) {
  OpenAIOptions options;
  options.api_key.clear();
  OpenAIBackend backend(options);
  EXPECT_GJ_ERROR(backend.complete(rating_request()), ErrorCode::kAuthError);
}

TEST(OpenAIBackendTest, ConfigReadsKeyFromNamedVariable) {
  ::setenv("GREENJUDGE_TEST_KEY", "sk-from-env", 1);
  BackendConfig config;
  config.kind = "openai";
  config.options = json{{"api_key_env", "GREENJUDGE_TEST_KEY"}, {"base_url", "http://localhost:1/v1"},
                        {"max_retries", 2}};
  const auto options = OpenAIOptions::from_config(config);
  EXPECT_EQ(options.api_key, "sk-from-env");
  EXPECT_EQ(options.base_url, "http://localhost:1/v1");
  EXPECT_EQ(options.max_retries, 2);
  OpenAIOptions bad;
  bad.base_url = "no-scheme";
  EXPECT_GJ_ERROR(OpenAIBackend{bad}, ErrorCode::kConfigError);
}

}  // namespace
}  // namespace greenjudge
