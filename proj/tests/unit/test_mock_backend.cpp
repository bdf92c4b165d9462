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
#include "core/mock_backend.hpp"

#include <gtest/gtest.h>

#include "core/batch.hpp"
#include "core/content_features.hpp"
#include "core/scoring.hpp"
#include "core/synthetic.hpp"
#include "core/util.hpp"
#include "test_support.hpp"

namespace greenjudge {
namespace {

using nlohmann::json;
using testing::make_response;

CompletionRequest user_request(std::string content) {
  CompletionRequest r;
  r.model_id = "mock-judge";
  r.messages = {{"user", std::move(content)}};
  return r;
}

TEST(MockBackendTest, ScriptedDistributionIsExact) {
  const auto options = MockOptions::from_json(
      json{{"fixtures", json::array({{{"contains", "rate me"}, {"top", json::array({{"4", 0.7}, {"3", 0.3}})}}})}});
  MockBackend backend(options);
  const auto r = backend.complete(user_request("please rate me"));
  EXPECT_EQ(r.text, "4");
  ASSERT_EQ(r.per_position_logprobs.size(), 1u);
  const TokenDistribution expected{{{"4", 0.7}, {"3", 0.3}}};
  EXPECT_EQ(r.per_position_logprobs[0].alternatives, expected);
  auto no_logprobs = user_request("please rate me");
  no_logprobs.want_logprobs = false;
  EXPECT_TRUE(backend.complete(no_logprobs).per_position_logprobs.empty());
}

TEST(MockBackendTest, FixtureFileAndErrors) {
  testing::TempDir dir;
  write_file_atomic(dir / "fx.json", json{{"fixtures", json::array({{{"contains", "AUTH"}, {"error", "auth"}},
                                                                     {{"contains", "SLOW"}, {"error", "timeout"}},
                                                                     {{"contains", "MANY"}, {"error", "rate_limited"}},
                                                                     {{"contains", "TEXT"}, {"text", "Score: 2"}}})}}
                                         .dump());
  MockBackend backend(MockOptions::from_json(json{{"fixtures", (dir / "fx.json").string()}}));
  EXPECT_GJ_ERROR(backend.complete(user_request("AUTH")), ErrorCode::kAuthError);
  EXPECT_GJ_ERROR(backend.complete(user_request("SLOW")), ErrorCode::kTimeout);
  EXPECT_GJ_ERROR(backend.complete(user_request("MANY")), ErrorCode::kRateLimited);
  const auto r = backend.complete(user_request("TEXT"));
  EXPECT_EQ(r.text, "Score: 2");
  EXPECT_TRUE(r.per_position_logprobs.empty());
  EXPECT_GJ_ERROR(backend.complete(user_request("unrecognised")), ErrorCode::kProviderError);
  EXPECT_GJ_ERROR(MockOptions::from_json(json{{"judge", "oracle"}}), ErrorCode::kConfigError);
  EXPECT_GJ_ERROR(MockOptions::from_json(json{{"fixtures", json::array({{{"top", json::array({{"4", 1.5}})}}})}}),
                  ErrorCode::kInvalidArgument);
}

TEST(MockBackendTest, NamespaceTracksBehaviour) {
  MockOptions a;
  MockOptions b;
  b.mass = MockMass::kPoint;
  MockOptions c = a;
  c.latency = std::chrono::milliseconds(5);
  EXPECT_NE(MockBackend(a).cache_namespace(), MockBackend(b).cache_namespace());
  EXPECT_EQ(MockBackend(a).cache_namespace(), MockBackend(c).cache_namespace());
}

TEST(MockBackendTest, PropertyPureFunctionOfRequest) {
  const auto corpus = generate_synthetic_corpus({20, 20, 6});
  const auto config = JudgePromptConfig::from_variant("rating.zero.scale");
  std::vector<CompletionRequest> requests;
  for (const auto& r : corpus) requests.push_back(make_rating_request(config, {}, r, ScoringContext{}));
  MockBackend first(MockOptions{});
  MockBackend second(MockOptions{});
  const auto x = run_batch(first, requests, {1, BatchMode::kFailFast});
  const auto y = run_batch(second, requests, {8, BatchMode::kFailFast});
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(response_to_json(*x[i].response).dump(), response_to_json(*y[i].response).dump());
  }
}

TEST(MockBackendTest, ContentJudgeSeparatesTiers) {
  const auto corpus = generate_synthetic_corpus({25, 25, 13});
  double min_high = 10;
  double max_low = 0;
  for (const auto& r : corpus) {
    const double q = content_quality(r.text);
    EXPECT_GE(q, 1.0);
    EXPECT_LE(q, 5.0);
    if (r.a_list) {
      min_high = std::min(min_high, q);
    } else {
      max_low = std::max(max_low, q);
    }
  }
  EXPECT_GT(min_high, max_low);
}

TEST(MockBackendTest, SpreadMassSplitsAdjacentDigits) {
  MockBackend backend(MockOptions{});
  const auto corpus = generate_synthetic_corpus({5, 5, 2});
  for (const auto& r : corpus) {
    const auto req =
        make_rating_request(JudgePromptConfig::from_variant("rating.zero"), {}, r, ScoringContext{});
    const auto mass = extract_digit_distribution(backend.complete(req), AnswerLocator::last_token());
    EXPECT_LE(mass.size(), 2u);
    EXPECT_NEAR(weighted_rating(mass), content_quality(r.text), 1e-9) << r.text;
  }
}

TEST(MockBackendTest, TopLogprobsTruncates) {
  const auto options = MockOptions::from_json(json{
      {"fixtures",
       json::array({{{"contains", "x"}, {"top", json::array({{"1", 0.1}, {"2", 0.2}, {"3", 0.3}, {"4", 0.4}})}}})}});
  MockBackend backend(options);
  auto req = user_request("x");
  req.top_logprobs = 2;
  // Fixtures are returned verbatim; truncation applies to generated answers.
  EXPECT_EQ(backend.complete(req).per_position_logprobs[0].alternatives.entries.size(), 4u);
  MockBackend content(MockOptions{});
  auto judged = make_rating_request(JudgePromptConfig::from_variant("rating.zero"), {},
                                    make_response("c", QuestionId::kQ4_1a, "We reduced emissions by 12%.", false),
                                    ScoringContext{});
  judged.top_logprobs = 1;
  EXPECT_EQ(content.complete(judged).per_position_logprobs.back().alternatives.entries.size(), 1u);
}

TEST(MockGreenwasherTest, ModesAndRegimes) {
  const auto original = make_response("c", QuestionId::kQ4_1a, "We aim to reduce emissions.", false);
  std::map<GreenwashConstraint, std::string> outputs;
  MockBackend rewrite(MockOptions{});
  for (auto c : kAllConstraints) {
    CompletionRequest req;
    req.model_id = "mock-judge";
    req.messages = build_greenwash_prompt({c}, original);
    req.want_logprobs = false;
    req.top_logprobs = 0;
    req.max_tokens = 1024;
    outputs[c] = rewrite.complete(req).text;
    EXPECT_EQ(outputs[c], mock_greenwash(original.text, c));
  }
  EXPECT_GT(count_words(outputs[GreenwashConstraint::kUnconstrained]),
            count_words(outputs[GreenwashConstraint::kFixedAccuracy]));
  EXPECT_GT(count_words(outputs[GreenwashConstraint::kFixedAccuracy]),
            count_words(outputs[GreenwashConstraint::kFixedAccuracyAndLength]));
  EXPECT_TRUE(detect_content_features(outputs[GreenwashConstraint::kFixedAccuracyAndLength]).commitment_language);

  CompletionRequest req;
  req.model_id = "mock-judge";
  req.messages = build_greenwash_prompt({GreenwashConstraint::kUnconstrained}, original);
  MockOptions echo;
  echo.greenwasher = MockGreenwasher::kEcho;
  EXPECT_EQ(MockBackend(echo).complete(req).text, original.text);
  MockOptions empty;
  empty.greenwasher = MockGreenwasher::kEmpty;
  EXPECT_EQ(MockBackend(empty).complete(req).text, "");
}

}  // namespace
}  // namespace greenjudge
