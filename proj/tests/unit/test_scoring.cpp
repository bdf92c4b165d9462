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
#include "core/scoring.hpp"

#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "core/mock_backend.hpp"
#include "core/synthetic.hpp"
#include "test_support.hpp"

namespace greenjudge {
namespace {

using testing::completion;
using testing::FnBackend;
using testing::make_response;
using testing::position;

const auto kLast = AnswerLocator::last_token();
const auto kFinal = AnswerLocator::after_marker(kFinalMarker);

JudgePromptConfig variant(const char* name) { return JudgePromptConfig::from_variant(name); }

std::vector<DisclosureResponse> numbered_pool(std::size_t n) {
  std::vector<DisclosureResponse> pool;
  for (std::size_t i = 0; i < n; ++i) {
    pool.push_back(make_response("opp" + std::to_string(100 + i), QuestionId::kQ4_1a,
                                 "opponent " + std::to_string(i) + " text", i % 2 == 0));
  }
  return pool;
}

TEST(ExtractDigitsTest, FiltersToDigits) {
  const auto r = completion("4", {position({{"4", 0.80}, {"3", 0.15}, {"5", 0.04}, {".", 0.01}})});
  const DigitMass expected{{3, 0.15}, {4, 0.80}, {5, 0.04}};
  EXPECT_EQ(extract_digit_distribution(r, kLast), expected);
}

TEST(ExtractDigitsTest, LeadingSpaceTokenCounts) {
  const auto r = completion(" 4", {position({{" 4", 0.6}, {"4", 0.2}, {"4.", 0.1}})});
  const auto mass = extract_digit_distribution(r, kLast);
  ASSERT_EQ(mass.size(), 1u);
  EXPECT_DOUBLE_EQ(mass.at(4), 0.8);
}

TEST(ExtractDigitsTest, Errors) {
  EXPECT_GJ_ERROR(extract_digit_distribution(completion("4"), kLast), ErrorCode::kNoLogprobs);
  EXPECT_GJ_ERROR(extract_digit_distribution(completion("x", {position({{"x", 0.9}, {"6", 0.1}})}), kLast),
                  ErrorCode::kNoDigitMass);
}

TEST(ExtractDigitsTest, AfterFinalMarker) {
  const auto r = completion("Good targets.\nFINAL: 4",
                            {position({{"Good", 1.0}}), position({{" targets", 1.0}}), position({{".\n", 1.0}}),
                             position({{"FINAL", 1.0}}), position({{":", 1.0}}),
                             position({{" 4", 0.7}, {" 5", 0.3}}), position({{"\n", 1.0}})});
  const DigitMass expected{{4, 0.7}, {5, 0.3}};
  EXPECT_EQ(extract_digit_distribution(r, kFinal), expected);
  const auto straddling = completion("FINAL: 3", {position({{"FINAL:", 1.0}}), position({{" 3", 1.0}})});
  EXPECT_EQ(extract_digit_distribution(straddling, kFinal), (DigitMass{{3, 1.0}}));
  const auto missing = completion("no marker", {position({{"no", 1.0}})});
  EXPECT_GJ_ERROR(extract_digit_distribution(missing, kFinal), ErrorCode::kNoDigitMass);
}

TEST(WeightedRatingTest, Examples) {
  EXPECT_DOUBLE_EQ(weighted_rating({{3, 1.0}}), 3.0);
  EXPECT_DOUBLE_EQ(weighted_rating({{2, 0.5}, {4, 0.5}}), 3.0);
  EXPECT_NEAR(weighted_rating({{1, 0.2}, {3, 0.3}, {5, 0.5}}), 3.6, 1e-12);
  EXPECT_NEAR(weighted_rating({{4, 0.8}, {3, 0.15}, {5, 0.04}}), (3.2 + 0.45 + 0.2) / 0.99, 1e-12);
  EXPECT_GJ_ERROR(weighted_rating({}), ErrorCode::kEmptyMass);
  EXPECT_GJ_ERROR(weighted_rating({{3, 0.0}}), ErrorCode::kEmptyMass);
}

DigitMass random_mass(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DigitMass m;
  for (int d = 1; d <= 5; ++d) {
    if (gen() % 3 != 0) m[d] = u(gen);
  }
  if (m.empty()) m[1 + static_cast<int>(gen() % 5)] = 0.5;
  return m;
}

TEST(WeightedRatingTest, PropertyScaleInvariantAndBounded) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int trial = 0; trial < 500; ++trial) {
    const auto m = random_mass(gen);
    double total = 0.0;
    for (const auto& [d, p] : m) total += p;
    if (total <= 0.0) continue;
    const double v = weighted_rating(m);
    EXPECT_GE(v, m.begin()->first - 1e-12);
    EXPECT_LE(v, m.rbegin()->first + 1e-12);
    auto scaled = m;
    const double s = scale(gen);
    for (auto& [d, p] : scaled) p *= s;
    EXPECT_NEAR(weighted_rating(scaled), v, 1e-12);
  }
}

TEST(WeightedRatingTest, PropertyMonotoneUnderUpwardShift) {
  std::mt19937_64 gen(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    auto m = random_mass(gen);
    double total = 0.0;
    for (const auto& [d, p] : m) total += p;
    if (total <= 0.0) continue;
    const int from = m.begin()->first + static_cast<int>(gen() % m.size());
    if (!m.count(from) || from == 5) continue;
    const int to = from + 1 + static_cast<int>(gen() % (5 - from));
    const double moved = m[from] * u(gen);
    auto shifted = m;
    shifted[from] -= moved;
    shifted[to] += moved;
    EXPECT_GE(weighted_rating(shifted), weighted_rating(m) - 1e-12);
  }
}

TEST(ParseRatingTextTest, FindsStandaloneDigit) {
  EXPECT_EQ(parse_rating_text("Score: 4"), 4);
  EXPECT_EQ(parse_rating_text("In 2030 the target... FINAL: 3"), 3);
  EXPECT_EQ(parse_rating_text("2019 baseline, rated 5"), 5);
  EXPECT_FALSE(parse_rating_text("rated 7 of 10").has_value());
  EXPECT_FALSE(parse_rating_text("excellent").has_value());
}

TEST(ScoreRatingTest, PointMassOnFive) {
  FnBackend backend([](const CompletionRequest&) { return completion("5", {position({{"5", 1.0}})}); });
  const auto score = score_rating(make_response("c", QuestionId::kQ4_1a, "t", true), variant("rating.zero"), {},
                                  backend);
  EXPECT_DOUBLE_EQ(score.value, 5.0);
  EXPECT_FALSE(score.fallback_used);
  EXPECT_EQ(score.sampled_digit, 5);
  EXPECT_EQ(score.variant, "rating.zero");
}

TEST(ScoreRatingTest, TextFallbackWithoutLogprobs) {
  FnBackend backend([](const CompletionRequest&) { return completion("Score: 4"); });
  const auto response = make_response("c", QuestionId::kQ4_1a, "t", true);
  const auto score = score_rating(response, variant("rating.zero"), {}, backend);
  EXPECT_DOUBLE_EQ(score.value, 4.0);
  EXPECT_TRUE(score.fallback_used);
  EXPECT_TRUE(score.digit_mass.empty());
  ScoringContext strict;
  strict.allow_fallback = false;
  EXPECT_GJ_ERROR(score_rating(response, variant("rating.zero"), {}, backend, strict), ErrorCode::kNoLogprobs);
}

TEST(ScoreRatingTest, ProseWithoutDigitIsUnparseable) {
  FnBackend backend([](const CompletionRequest&) { return completion("This is a fine response."); });
  EXPECT_GJ_ERROR(score_rating(make_response("c", QuestionId::kQ4_1a, "t", true), variant("rating.zero"), {},
                               backend),
                  ErrorCode::kUnparseableVerdict);
}

TEST(ScoreRatingTest, RequestShape) {
  CompletionRequest seen;
  FnBackend backend([&](const CompletionRequest& r) {
    seen = r;
    return completion("3", {position({{"3", 1.0}})});
  });
  ScoringContext ctx;
  ctx.model_id = "judge-x";
  score_rating(make_response("c", QuestionId::kQ4_1a, "t", true), variant("rating.zero"), {}, backend, ctx);
  EXPECT_EQ(seen.model_id, "judge-x");
  EXPECT_EQ(seen.temperature, 0.0);
  EXPECT_TRUE(seen.want_logprobs);
  EXPECT_EQ(seen.top_logprobs, 20u);
}

TEST(ScoreRatingTest, PropertyPointMassWeightedEqualsSampled) {
  MockOptions options;
  options.mass = MockMass::kPoint;
  MockBackend backend(options);
  const auto corpus = generate_synthetic_corpus({15, 15, 3});
  ScoringContext ctx;
  ctx.allow_fallback = false;
  for (const char* v : {"rating.zero", "rating.zero.scale", "rating.one.cot"}) {
    const auto config = variant(v);
    const auto examples = select_reference_examples(config.shots, synthetic_reference_examples(1));
    for (const auto& r : corpus) {
      const auto score = score_rating(r, config, examples, backend, ctx);
      ASSERT_TRUE(score.sampled_digit.has_value());
      EXPECT_DOUBLE_EQ(score.value, *score.sampled_digit) << v << " " << r.key();
    }
  }
}

TEST(PairwisePWinTest, Examples) {
  const auto r = completion("A", {position({{"A", 0.75}, {"B", 0.25}})});
  EXPECT_DOUBLE_EQ(pairwise_p_win(r, kLast, Slot::kA), 0.75);
  EXPECT_DOUBLE_EQ(pairwise_p_win(r, kLast, Slot::kB), 0.25);
  const auto noisy = completion("A", {position({{"A", 0.6}, {"B", 0.2}, {"The", 0.2}})});
  EXPECT_NEAR(pairwise_p_win(noisy, kLast, Slot::kA), 0.75, 1e-12);
}

TEST(PairwisePWinTest, TextFallbackAndErrors) {
  EXPECT_DOUBLE_EQ(pairwise_p_win(completion("B"), kLast, Slot::kB), 1.0);
  EXPECT_DOUBLE_EQ(pairwise_p_win(completion("Response A is vague.\nFINAL: B"), kFinal, Slot::kA), 0.0);
  EXPECT_GJ_ERROR(pairwise_p_win(completion("Neither"), kLast, Slot::kA), ErrorCode::kUnparseableVerdict);
}

TEST(ExpectedWinRateTest, Examples) {
  const std::vector<double> mixed{1.0, 0.0, 0.5, 0.5};
  EXPECT_DOUBLE_EQ(expected_win_rate(mixed), 50.0);
  std::vector<double> hard(20, 0.0);
  std::fill(hard.begin(), hard.begin() + 15, 1.0);
  EXPECT_DOUBLE_EQ(expected_win_rate(hard), 75.0);
  EXPECT_GJ_ERROR(expected_win_rate({}), ErrorCode::kEmptyInput);
}

// Candidate wins against opponents numbered below the threshold.
FnBackend threshold_judge(int threshold) {
  return FnBackend([threshold](const CompletionRequest& r) {
    const auto& user = r.messages.back().content;
    const auto a = user.find("<response_a>");
    const auto cand = user.find("CANDIDATE");
    const bool cand_in_a = cand < user.find("<response_b>");
    const auto opp = user.find("opponent ", a);
    const int number = std::stoi(user.substr(opp + 9));
    const bool cand_wins = number < threshold;
    const bool a_wins = cand_in_a == cand_wins;
    return completion(a_wins ? "A" : "B");
  });
}

TEST(ScorePairwiseTest, HardVerdictsFifteenOfTwenty) {
  const auto candidate = make_response("cand", QuestionId::kQ4_1a, "CANDIDATE text", true);
  const auto pool = numbered_pool(20);
  auto judge = threshold_judge(15);
  for (bool both : {false, true}) {
    ScoringContext ctx;
    ctx.both_orders = both;
    const auto score = score_pairwise(candidate, pool, 20, 1, variant("pairwise"), judge, ctx);
    EXPECT_DOUBLE_EQ(score.value, 75.0);
    EXPECT_EQ(score.k, 20u);
    ASSERT_EQ(score.outcomes.size(), 20u);
    EXPECT_EQ(score.outcomes[0].orders_evaluated, both ? 2 : 1);
    EXPECT_EQ(score.outcomes[0].raw_texts.size(), both ? 2u : 1u);
  }
}

TEST(ScorePairwiseTest, SymmetricJudgeGivesFifty) {
  MockOptions options;
  options.judge = MockJudge::kSymmetric;
  MockBackend backend(options);
  const auto corpus = generate_synthetic_corpus({10, 10, 4});
  ScoringContext ctx;
  ctx.both_orders = false;
  const auto scored = score_pairwise_all(corpus.responses(), corpus.responses(), 6, 9, variant("pairwise"), backend, ctx);
  for (const auto& s : scored) {
    ASSERT_TRUE(s.ok());
    EXPECT_DOUBLE_EQ(s.score->value, 50.0);
  }
}

TEST(ScorePairwiseTest, PropertyPositionBiasCancelsWithBothOrders) {
  for (auto mass : {MockMass::kPoint, MockMass::kSpread}) {
    MockOptions options;
    options.judge = MockJudge::kPositionBias;
    options.mass = mass;
    MockBackend backend(options);
    const auto corpus = generate_synthetic_corpus({8, 12, 5});
    for (const char* v : {"pairwise", "pairwise.cot"}) {
      const auto scored =
          score_pairwise_all(corpus.responses(), corpus.responses(), 5, 3, variant(v), backend, ScoringContext{});
      for (const auto& s : scored) {
        ASSERT_TRUE(s.ok());
        for (const auto& o : s.score->outcomes) EXPECT_DOUBLE_EQ(o.p_win, 0.5);
        EXPECT_DOUBLE_EQ(s.score->value, 50.0);
      }
    }
    ScoringContext single;
    single.both_orders = false;
    const auto biased = score_pairwise(corpus.responses()[0], corpus.responses(), 5, 3, variant("pairwise"), backend, single);
    EXPECT_DOUBLE_EQ(biased.value, mass == MockMass::kPoint ? 100.0 : 90.0);
  }
}

TEST(ScorePairwiseTest, PropertyScoresBounded) {
  MockBackend backend(MockOptions{});
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 5; ++trial) {
    const auto corpus = generate_synthetic_corpus({1 + gen() % 10, 1 + gen() % 10, gen()});
    const std::size_t k = 1 + gen() % (corpus.size() - 1);
    const auto scored = score_pairwise_all(corpus.responses(), corpus.responses(), k, gen(), variant("pairwise"),
                                           backend, ScoringContext{});
    for (const auto& s : scored) {
      ASSERT_TRUE(s.ok());
      EXPECT_GE(s.score->value, 0.0);
      EXPECT_LE(s.score->value, 100.0);
      EXPECT_EQ(s.score->outcomes.size(), k);
    }
  }
}

TEST(SampleOpponentsTest, ExcludesCandidateAndIsDeterministic) {
  auto pool = numbered_pool(30);
  const auto candidate = pool[7];
  const auto a = sample_opponents(candidate, pool, 29, 5);
  std::set<std::string> keys;
  for (const auto& o : a) keys.insert(o.key());
  EXPECT_EQ(keys.size(), 29u);
  EXPECT_FALSE(keys.count(candidate.key()));

  const auto first = sample_opponents(candidate, pool, 10, 5);
  std::shuffle(pool.begin(), pool.end(), std::mt19937_64(1));
  const auto again = sample_opponents(candidate, pool, 10, 5);
  ASSERT_EQ(first.size(), again.size());
  for (std::size_t i = 0; i < first.size(); ++i) EXPECT_EQ(first[i].key(), again[i].key());
  EXPECT_GJ_ERROR(sample_opponents(candidate, pool, 30, 5), ErrorCode::kInsufficientPool);
  EXPECT_GJ_ERROR(sample_opponents(candidate, pool, 0, 5), ErrorCode::kInsufficientPool);
}

TEST(SampleOpponentsTest, UniformOverPool) {
  const auto pool = numbered_pool(10);
  const auto candidate = make_response("cand", QuestionId::kQ4_1a, "CANDIDATE", true);
  std::map<std::string, int> counts;
  for (std::uint64_t seed = 0; seed < 5000; ++seed) {
    for (const auto& o : sample_opponents(candidate, pool, 3, seed)) ++counts[o.key()];
  }
  ASSERT_EQ(counts.size(), 10u);
  for (const auto& [key, c] : counts) EXPECT_NEAR(c, 1500, 150) << key;
}

TEST(ScoreBatchTest, CollectModeIsolatesFailures) {
  MockOptions options;
  options.fail_on = {"BROKEN"};
  MockBackend backend(options);
  std::vector<DisclosureResponse> rows{
      make_response("a", QuestionId::kQ4_1a, "We reduced emissions 20% against a 2019 baseline.", true),
      make_response("b", QuestionId::kQ4_1a, "BROKEN response", false),
      make_response("c", QuestionId::kQ4_1a, "We care about climate.", false)};
  ScoringContext ctx;
  ctx.batch.mode = BatchMode::kCollect;
  const auto rated = score_ratings(rows, variant("rating.zero"), {}, backend, ctx);
  EXPECT_TRUE(rated[0].ok());
  ASSERT_FALSE(rated[1].ok());
  EXPECT_EQ(rated[1].error->code, ErrorCode::kProviderError);
  EXPECT_TRUE(rated[2].ok());

  const auto paired = score_pairwise_all(rows, rows, 1, 2, variant("pairwise"), backend, ctx);
  ASSERT_FALSE(paired[1].ok());
  for (std::size_t i : {0u, 2u}) {
    // A comparison against the failing response fails the candidate too.
    const auto opponents = sample_opponents(rows[i], rows, 1, 2);
    EXPECT_EQ(paired[i].ok(), opponents[0].key() != "b/Q4_1a") << i;
  }
  ctx.batch.mode = BatchMode::kFailFast;
  EXPECT_GJ_ERROR(score_ratings(rows, variant("rating.zero"), {}, backend, ctx), ErrorCode::kProviderError);
}

}  // namespace
}  // namespace greenjudge
