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

#include <cctype>
#include <numeric>

#include "core/error.hpp"
#include "core/util.hpp"

namespace greenjudge {
namespace {

constexpr std::size_t kDirectMaxTokens = 5;
constexpr std::size_t kExplainedMaxTokens = 160;

std::optional<int> as_digit(std::string_view token) {
  const auto t = trim(token);
  if (t.size() == 1 && t[0] >= '1' && t[0] <= '5') return t[0] - '0';
  return std::nullopt;
}

std::optional<Slot> as_slot(std::string_view token) {
  const auto t = trim(token);
  if (t == "A") return Slot::kA;
  if (t == "B") return Slot::kB;
  return std::nullopt;
}

// The region of the text that holds the answer: after the last marker if
// present, otherwise all of it.
std::string_view answer_region(std::string_view text) {
  const auto pos = text.rfind(kFinalMarker);
  return pos == std::string_view::npos ? text : text.substr(pos + kFinalMarker.size());
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::optional<Slot> parse_verdict_text(std::string_view text) {
  const auto region = answer_region(text);
  for (std::size_t i = 0; i < region.size(); ++i) {
    const char c = region[i];
    if (c != 'A' && c != 'B') continue;
    const bool left_ok = i == 0 || !is_word_char(region[i - 1]);
    const bool right_ok = i + 1 == region.size() || !is_word_char(region[i + 1]);
    if (left_ok && right_ok) return c == 'A' ? Slot::kA : Slot::kB;
  }
  return std::nullopt;
}

std::size_t max_tokens_for(const JudgePromptConfig& config) {
  return config.chain_of_thought ? kExplainedMaxTokens : kDirectMaxTokens;
}

[[noreturn]] void rethrow_item(const ItemError& e) { throw Error(e.code, e.message); }

}  // namespace

AnswerLocator AnswerLocator::for_config(const JudgePromptConfig& config) {
  return config.chain_of_thought ? after_marker(kFinalMarker) : last_token();
}

std::optional<std::size_t> locate_answer(const CompletionResponse& response, const AnswerLocator& locator) {
  const auto& positions = response.per_position_logprobs;
  if (locator.kind == AnswerLocator::Kind::kLastToken) {
    for (std::size_t i = positions.size(); i-- > 0;) {
      if (!trim(positions[i].token).empty()) return i;
    }
    return std::nullopt;
  }
  std::string joined;
  std::vector<std::size_t> starts;
  for (const auto& p : positions) {
    starts.push_back(joined.size());
    joined += p.token;
  }
  const auto marker = joined.rfind(locator.marker);
  if (marker == std::string::npos) return std::nullopt;
  const std::size_t marker_end = marker + locator.marker.size();
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const std::size_t end = starts[i] + positions[i].token.size();
    if (end <= marker_end) continue;
    // A token straddling the marker end counts only if its tail is the answer.
    std::string_view tail(positions[i].token);
    if (starts[i] < marker_end) tail.remove_prefix(marker_end - starts[i]);
    if (!trim(tail).empty()) return i;
  }
  return std::nullopt;
}

DigitMass extract_digit_distribution(const CompletionResponse& response, const AnswerLocator& locator) {
  if (response.per_position_logprobs.empty()) fail(ErrorCode::kNoLogprobs, "completion carries no logprobs");
  const auto index = locate_answer(response, locator);
  if (!index) fail(ErrorCode::kNoDigitMass, "answer position not found");
  DigitMass mass;
  for (const auto& e : response.per_position_logprobs[*index].alternatives.entries) {
    if (auto d = as_digit(e.token)) mass[*d] += e.probability;
  }
  if (mass.empty()) fail(ErrorCode::kNoDigitMass, "no digit 1-5 among the top alternatives");
  return mass;
}

double weighted_rating(const DigitMass& digit_mass) {
  double total = 0.0;
  for (const auto& [digit, p] : digit_mass) {
    if (digit < 1 || digit > 5) fail(ErrorCode::kInvalidArgument, "digit outside 1..5");
    if (p < 0.0) fail(ErrorCode::kInvalidArgument, "negative digit mass");
    total += p;
  }
  if (!(total > 0.0)) fail(ErrorCode::kEmptyMass, "digit mass is empty");
  // Renormalize first so a single-digit mass gives exactly that digit.
  double weighted = 0.0;
  for (const auto& [digit, p] : digit_mass) weighted += digit * (p / total);
  return weighted;
}

std::optional<int> parse_rating_text(std::string_view text) {
  const auto region = answer_region(text);
  for (std::size_t i = 0; i < region.size(); ++i) {
    const char c = region[i];
    if (c < '1' || c > '5') continue;
    const bool left_ok = i == 0 || !std::isdigit(static_cast<unsigned char>(region[i - 1]));
    const bool right_ok = i + 1 == region.size() || !std::isdigit(static_cast<unsigned char>(region[i + 1]));
    if (left_ok && right_ok) return c - '0';
  }
  return std::nullopt;
}

CompletionRequest make_rating_request(const JudgePromptConfig& config, std::span<const ReferenceExample> examples,
                                      const DisclosureResponse& response, const ScoringContext& ctx) {
  CompletionRequest req;
  req.model_id = ctx.model_id;
  req.messages = build_rating_prompt(config, examples, response, ctx.prompt_templates());
  req.temperature = 0.0;
  req.max_tokens = max_tokens_for(config);
  req.want_logprobs = true;
  req.top_logprobs = ctx.top_logprobs;
  return req;
}

RatingScore rating_from_completion(const CompletionResponse& completion, const JudgePromptConfig& config,
                                   bool allow_fallback) {
  RatingScore score;
  score.variant = config.variant_name();
  score.raw_text = completion.text;
  const auto locator = AnswerLocator::for_config(config);
  if (auto index = locate_answer(completion, locator)) {
    score.sampled_digit = as_digit(completion.per_position_logprobs[*index].token);
  }
  if (!score.sampled_digit) score.sampled_digit = parse_rating_text(completion.text);
  try {
    score.digit_mass = extract_digit_distribution(completion, locator);
    score.value = weighted_rating(score.digit_mass);
    return score;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoLogprobs && e.code() != ErrorCode::kNoDigitMass) throw;
    if (!allow_fallback) throw;
  }
  const auto parsed = parse_rating_text(completion.text);
  if (!parsed) fail(ErrorCode::kUnparseableVerdict, "no digit 1-5 in judge output: " + completion.text.substr(0, 120));
  score.digit_mass.clear();
  score.value = *parsed;
  score.fallback_used = true;
  return score;
}

RatingScore score_rating(const DisclosureResponse& response, const JudgePromptConfig& config,
                         std::span<const ReferenceExample> examples, Backend& backend, const ScoringContext& ctx) {
  const auto completion = backend.complete(make_rating_request(config, examples, response, ctx));
  return rating_from_completion(completion, config, ctx.allow_fallback);
}

double pairwise_p_win(const CompletionResponse& response, const AnswerLocator& locator, Slot candidate_slot) {
  if (!response.per_position_logprobs.empty()) {
    if (auto index = locate_answer(response, locator)) {
      double pa = 0.0;
      double pb = 0.0;
      for (const auto& e : response.per_position_logprobs[*index].alternatives.entries) {
        if (auto slot = as_slot(e.token)) (*slot == Slot::kA ? pa : pb) += e.probability;
      }
      if (pa + pb > 0.0) return (candidate_slot == Slot::kA ? pa : pb) / (pa + pb);
    }
  }
  const auto verdict = parse_verdict_text(response.text);
  if (!verdict) fail(ErrorCode::kUnparseableVerdict, "no A/B verdict in judge output: " + response.text.substr(0, 120));
  return *verdict == candidate_slot ? 1.0 : 0.0;
}

double expected_win_rate(std::span<const double> p_wins) {
  if (p_wins.empty()) fail(ErrorCode::kEmptyInput, "no comparisons");
  return 100.0 * std::accumulate(p_wins.begin(), p_wins.end(), 0.0) / static_cast<double>(p_wins.size());
}

std::vector<DisclosureResponse> sample_opponents(const DisclosureResponse& candidate,
                                                 std::span<const DisclosureResponse> pool, std::size_t k,
                                                 std::uint64_t seed) {
  std::vector<const DisclosureResponse*> eligible;
  for (const auto& r : pool) {
    if (r.key() != candidate.key()) eligible.push_back(&r);
  }
  if (eligible.size() < k || k == 0) {
    fail(ErrorCode::kInsufficientPool, "need " + std::to_string(k) + " opponents for " + candidate.key() +
                                           ", pool offers " + std::to_string(eligible.size()));
  }
  std::sort(eligible.begin(), eligible.end(), [](auto* a, auto* b) { return a->key() < b->key(); });
  Rng rng(mix_seed(seed, "opponents:" + candidate.key()));
  std::vector<DisclosureResponse> out;
  for (std::size_t idx : sample_without_replacement(eligible.size(), k, rng)) out.push_back(*eligible[idx]);
  return out;
}

CompletionRequest make_pairwise_request(const JudgePromptConfig& config, const DisclosureResponse& a,
                                        const DisclosureResponse& b, const ScoringContext& ctx) {
  CompletionRequest req;
  req.model_id = ctx.model_id;
  req.messages = build_pairwise_prompt(config, a, b, ctx.prompt_templates());
  req.temperature = 0.0;
  req.max_tokens = max_tokens_for(config);
  req.want_logprobs = true;
  req.top_logprobs = ctx.top_logprobs;
  return req;
}

PairwiseScore score_pairwise(const DisclosureResponse& candidate, std::span<const DisclosureResponse> pool,
                             std::size_t k, std::uint64_t seed, const JudgePromptConfig& config, Backend& backend,
                             const ScoringContext& ctx) {
  ScoringContext strict = ctx;
  strict.batch.mode = BatchMode::kFailFast;
  auto scored = score_pairwise_all(std::span(&candidate, 1), pool, k, seed, config, backend, strict);
  return std::move(*scored.front().score);
}

std::vector<Scored<RatingScore>> score_ratings(std::span<const DisclosureResponse> responses,
                                               const JudgePromptConfig& config,
                                               std::span<const ReferenceExample> examples, Backend& backend,
                                               const ScoringContext& ctx) {
  std::vector<CompletionRequest> requests;
  requests.reserve(responses.size());
  for (const auto& r : responses) requests.push_back(make_rating_request(config, examples, r, ctx));
  const auto outcomes = run_batch(backend, requests, ctx.batch);
  std::vector<Scored<RatingScore>> out(responses.size());
  for (std::size_t i = 0; i < responses.size(); ++i) {
    out[i].response = responses[i];
    if (!outcomes[i].ok()) {
      out[i].error = outcomes[i].error;
      continue;
    }
    try {
      out[i].score = rating_from_completion(*outcomes[i].response, config, ctx.allow_fallback);
    } catch (const Error& e) {
      if (ctx.batch.mode == BatchMode::kFailFast) throw;
      out[i].error = ItemError{e.code(), responses[i].key() + ": " + e.what()};
    }
  }
  return out;
}

std::vector<Scored<PairwiseScore>> score_pairwise_all(std::span<const DisclosureResponse> candidates,
                                                      std::span<const DisclosureResponse> pool, std::size_t k,
                                                      std::uint64_t seed, const JudgePromptConfig& config,
                                                      Backend& backend, const ScoringContext& ctx) {
  const std::size_t orders = ctx.both_orders ? 2 : 1;
  std::vector<std::vector<DisclosureResponse>> opponents;
  std::vector<CompletionRequest> requests;
  opponents.reserve(candidates.size());
  for (const auto& cand : candidates) {
    opponents.push_back(sample_opponents(cand, pool, k, seed));
    for (const auto& opp : opponents.back()) {
      requests.push_back(make_pairwise_request(config, cand, opp, ctx));
      if (orders == 2) requests.push_back(make_pairwise_request(config, opp, cand, ctx));
    }
  }
  const auto outcomes = run_batch(backend, requests, ctx.batch);
  const auto locator = AnswerLocator::for_config(config);

  std::vector<Scored<PairwiseScore>> out(candidates.size());
  std::size_t cursor = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    out[c].response = candidates[c];
    PairwiseScore score;
    score.k = k;
    score.variant = config.variant_name();
    std::vector<double> p_wins;
    try {
      for (const auto& opp : opponents[c]) {
        PairwiseOutcome outcome;
        outcome.opponent_id = opp.key();
        outcome.orders_evaluated = static_cast<int>(orders);
        double sum = 0.0;
        for (std::size_t o = 0; o < orders; ++o) {
          const auto& result = outcomes[cursor + o];
          if (!result.ok()) rethrow_item(*result.error);
          outcome.raw_texts.push_back(result.response->text);
          sum += pairwise_p_win(*result.response, locator, o == 0 ? Slot::kA : Slot::kB);
        }
        cursor += orders;
        outcome.p_win = sum / static_cast<double>(orders);
        p_wins.push_back(outcome.p_win);
        score.outcomes.push_back(std::move(outcome));
      }
      score.value = expected_win_rate(p_wins);
      out[c].score = std::move(score);
    } catch (const Error& e) {
      if (ctx.batch.mode == BatchMode::kFailFast) throw;
      out[c].error = ItemError{e.code(), candidates[c].key() + ": " + e.what()};
      cursor = 0;
      for (std::size_t prev = 0; prev <= c; ++prev) cursor += opponents[prev].size() * orders;
    }
  }
  return out;
}

}  // namespace greenjudge
