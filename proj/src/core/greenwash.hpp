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
#ifndef GREENJUDGE_CORE_GREENWASH_HPP_
#define GREENJUDGE_CORE_GREENWASH_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "core/batch.hpp"
#include "core/corpus.hpp"
#include "core/llm_backend.hpp"
#include "core/prompting.hpp"
#include "core/scoring.hpp"
#include "core/separation_metrics.hpp"

namespace greenjudge {

enum class LengthUnit { kWords, kCharacters };

// variant length / original length, in whitespace-separated words by default.
double length_ratio(std::string_view original, std::string_view variant, LengthUnit unit = LengthUnit::kWords);

struct GreenwashVariant {
  std::string original_id;  // DisclosureResponse::key() of the original
  GreenwashConstraint constraint = GreenwashConstraint::kUnconstrained;
  std::string text;
  double length_ratio = 1.0;
};

struct GenerationFailure {
  std::string original_id;
  ItemError error;
};

struct GenerationResult {
  std::vector<GreenwashVariant> variants;
  std::vector<GenerationFailure> failures;
};

struct GreenwashContext {
  std::string model_id = "mock-judge";
  const PromptTemplates* templates = nullptr;
  std::size_t max_tokens = 1024;
  LengthUnit length_unit = LengthUnit::kWords;
  BatchOptions batch{8, BatchMode::kCollect};
};

// One rewrite per input. Inputs must all be non-A-List (InvalidArgument
// otherwise). Empty outputs and provider errors become failure records.
GenerationResult generate_greenwashed(std::span<const DisclosureResponse> sample, GreenwashConstraint regime,
                                      Backend& backend, const GreenwashContext& ctx = {});

// Variants as a corpus that keeps each original's company/question/label, so
// the scoring and metrics tools run on it unchanged.
Corpus variants_as_corpus(std::span<const GreenwashVariant> variants, const Corpus& originals);

// JSONL corpus rows plus original_id, constraint, and length_ratio keys.
std::string serialize_variants(std::span<const GreenwashVariant> variants, const Corpus& originals);
std::vector<GreenwashVariant> load_variants(const std::filesystem::path& path);

struct DeltaRecord {
  std::string id;
  double original_score = 0.0;
  double variant_score = 0.0;
  double delta = 0.0;  // variant_score - original_score
  ScoringSystem system = ScoringSystem::kNumericalRating;
  std::optional<GreenwashConstraint> constraint;  // nullopt for the length control
  std::optional<double> length_ratio;
};

struct DeltaSummary {
  std::size_t n = 0;
  double mean_original = 0.0;
  double mean_variant = 0.0;
  double mean_delta = 0.0;
  std::vector<std::pair<double, double>> share_at_least;  // (threshold, share)
};

struct DeltaAnalysis {
  std::vector<DeltaRecord> records;
  DeltaSummary summary;
};

// Rating: 0.5, 1.0, 1.5 points. Pairwise: 40 points.
std::vector<double> delta_thresholds(ScoringSystem system);

using ScoreMap = std::map<std::string, double>;

// Pairs scores by id; the id sets must match exactly (IdMismatch).
DeltaAnalysis delta_analysis(const ScoreMap& originals, const ScoreMap& variants, ScoringSystem system,
                             std::optional<GreenwashConstraint> constraint,
                             const std::map<std::string, double>& length_ratios = {});

struct RobustnessReport {
  SeparationReport baseline;  // A-List vs original responses
  std::vector<std::pair<GreenwashConstraint, SeparationReport>> per_regime;
};

RobustnessReport robustness_report(std::span<const double> a_list_scores, std::span<const double> original_scores,
                                   const std::vector<std::pair<GreenwashConstraint, std::vector<double>>>& greenwashed,
                                   const SeparationOptions& options);

// The response repeated twice with a single space between the copies.
DisclosureResponse double_response(const DisclosureResponse& response);

// Scores each response and its doubled copy with a rating judge; one record
// per input with the doubled score as the variant score. The first item
// failure throws unless failures is given; then failed items are reported
// there and left out of the result.
std::vector<DeltaRecord> length_doubling_control(std::span<const DisclosureResponse> sample,
                                                 const JudgePromptConfig& judge_config,
                                                 std::span<const ReferenceExample> examples, Backend& backend,
                                                 const ScoringContext& ctx,
                                                 std::vector<GenerationFailure>* failures = nullptr);

// Least-squares slope of delta against length_ratio, expressed per 10%
// length increase (0.1 * slope). Records without a ratio are ignored.
double length_delta_regression(std::span<const DeltaRecord> deltas);

// Heuristic count of green buzzwords; not a classifier.
std::size_t count_buzzwords(std::string_view text);

}  // namespace greenjudge

#endif  // GREENJUDGE_CORE_GREENWASH_HPP_
