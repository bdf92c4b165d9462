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
#ifndef GREENJUDGE_CORE_SCORING_HPP_
#define GREENJUDGE_CORE_SCORING_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/batch.hpp"
#include "core/corpus.hpp"
#include "core/llm_backend.hpp"
#include "core/prompting.hpp"

namespace greenjudge {

// Where the verdict token sits in a completion: the last non-whitespace
// token, or the first non-whitespace token after a marker ("FINAL:").
struct AnswerLocator {
  enum class Kind { kLastToken, kAfterMarker };
  Kind kind = Kind::kLastToken;
  std::string marker;

  static AnswerLocator last_token() { return {}; }
  static AnswerLocator after_marker(std::string_view marker) {
    return {Kind::kAfterMarker, std::string(marker)};
  }
  static AnswerLocator for_config(const JudgePromptConfig& config);
};

// Index into per_position_logprobs, or nullopt if the locator finds nothing.
std::optional<std::size_t> locate_answer(const CompletionResponse& response, const AnswerLocator& locator);

// Digit (1..5) -> probability.
using DigitMass = std::map<int, double>;

// Mass of the top alternatives whose whitespace-stripped text is exactly one
// of "1".."5"; duplicates after stripping add up. Not renormalized.
DigitMass extract_digit_distribution(const CompletionResponse& response, const AnswerLocator& locator);

// sum(d * p_d / sum(p)).
double weighted_rating(const DigitMass& digit_mass);

// First standalone digit 1-5, searched after the last "FINAL:" when present.
std::optional<int> parse_rating_text(std::string_view text);

struct RatingScore {
  double value = 0.0;
  DigitMass digit_mass;
  bool fallback_used = false;
  std::string variant;
  std::string raw_text;
  // The digit actually sampled at the answer position (or parsed from the
  // text); the "sampled output" score.
  std::optional<int> sampled_digit;
};

struct ScoringContext {
  std::string model_id = "mock-judge";
  const PromptTemplates* templates = nullptr;  // null: compiled-in defaults
  std::size_t top_logprobs = kMaxTopLogprobs;
  bool allow_fallback = true;
  bool both_orders = true;
  BatchOptions batch;

  const PromptTemplates& prompt_templates() const {
    return templates ? *templates : PromptTemplates::defaults();
  }
};

CompletionRequest make_rating_request(const JudgePromptConfig& config, std::span<const ReferenceExample> examples,
                                      const DisclosureResponse& response, const ScoringContext& ctx);

// Turns one completion into a score; falls back to the sampled text when the
// logprobs carry no digit mass (if allowed).
RatingScore rating_from_completion(const CompletionResponse& completion, const JudgePromptConfig& config,
                                   bool allow_fallback);

RatingScore score_rating(const DisclosureResponse& response, const JudgePromptConfig& config,
                         std::span<const ReferenceExample> examples, Backend& backend,
                         const ScoringContext& ctx = {});

enum class Slot { kA, kB };

// p(slot token) / (p(A) + p(B)) at the verdict position; 1.0 / 0.0 from the
// sampled text when logprobs are missing.
double pairwise_p_win(const CompletionResponse& response, const AnswerLocator& locator, Slot candidate_slot);

struct PairwiseOutcome {
  std::string opponent_id;
  double p_win = 0.0;
  int orders_evaluated = 1;
  std::vector<std::string> raw_texts;
};

struct PairwiseScore {
  double value = 0.0;  // expected win rate in [0, 100]
  std::size_t k = 0;
  std::vector<PairwiseOutcome> outcomes;
  std::string variant;
};

// 100 * mean(p_wins).
double expected_win_rate(std::span<const double> p_wins);

// k opponents drawn uniformly without replacement from pool minus the
// candidate. Seeded per candidate key so the draw does not depend on which
// other candidates are scored.
std::vector<DisclosureResponse> sample_opponents(const DisclosureResponse& candidate,
                                                 std::span<const DisclosureResponse> pool, std::size_t k,
                                                 std::uint64_t seed);

CompletionRequest make_pairwise_request(const JudgePromptConfig& config, const DisclosureResponse& a,
                                        const DisclosureResponse& b, const ScoringContext& ctx);

PairwiseScore score_pairwise(const DisclosureResponse& candidate, std::span<const DisclosureResponse> pool,
                             std::size_t k, std::uint64_t seed, const JudgePromptConfig& config,
                             Backend& backend, const ScoringContext& ctx = {});

template <typename T>
struct Scored {
  DisclosureResponse response;
  std::optional<T> score;
  std::optional<ItemError> error;

  bool ok() const { return score.has_value(); }
};

// Batched forms: every backend call goes through run_batch. In collect mode
// failed items carry an error; in fail-fast mode the first error is thrown.
std::vector<Scored<RatingScore>> score_ratings(std::span<const DisclosureResponse> responses,
                                               const JudgePromptConfig& config,
                                               std::span<const ReferenceExample> examples, Backend& backend,
                                               const ScoringContext& ctx);

std::vector<Scored<PairwiseScore>> score_pairwise_all(std::span<const DisclosureResponse> candidates,
                                                      std::span<const DisclosureResponse> pool, std::size_t k,
                                                      std::uint64_t seed, const JudgePromptConfig& config,
                                                      Backend& backend, const ScoringContext& ctx);

}  // namespace greenjudge

#endif  // GREENJUDGE_CORE_SCORING_HPP_
