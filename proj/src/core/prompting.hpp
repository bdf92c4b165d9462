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
#ifndef GREENJUDGE_CORE_PROMPTING_HPP_
#define GREENJUDGE_CORE_PROMPTING_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/corpus.hpp"
#include "core/llm_backend.hpp"

namespace greenjudge {

enum class ScoringSystem { kNumericalRating, kPairwiseComparison };
enum class Shots { kZero = 0, kOne = 1, kTwo = 2 };

// Chain-of-thought answers end with a line "FINAL: <answer>".
inline constexpr std::string_view kFinalMarker = "FINAL:";

struct JudgePromptConfig {
  ScoringSystem scoring_system = ScoringSystem::kNumericalRating;
  Shots shots = Shots::kZero;
  bool indicative_scale = false;
  bool chain_of_thought = false;
  std::size_t explanation_word_limit = 40;
  // Empty means the template defaults (criteria / exclusions files).
  std::string criteria_block;
  std::string exclusion_block;

  // Variant names: "rating.<zero|one|two>[.scale][.cot]" or "pairwise[.cot]".
  static JudgePromptConfig from_variant(std::string_view name);
  std::string variant_name() const;
  // Row label for the separation table, e.g. "one-shot, indicative scale".
  std::string display_label() const;
};

// Throws ConfigMismatch when shots or the scale are set on a pairwise config.
void validate_judge_config(const JudgePromptConfig& config);

struct ReferenceExample {
  std::string text;
  int anchor_score = 5;
};

enum class GreenwashConstraint { kUnconstrained, kFixedAccuracy, kFixedAccuracyAndLength };

std::string_view constraint_name(GreenwashConstraint c);
std::optional<GreenwashConstraint> parse_constraint(std::string_view name);
inline constexpr GreenwashConstraint kAllConstraints[] = {
    GreenwashConstraint::kUnconstrained, GreenwashConstraint::kFixedAccuracy,
    GreenwashConstraint::kFixedAccuracyAndLength};

struct GreenwashPromptConfig {
  GreenwashConstraint constraint = GreenwashConstraint::kUnconstrained;
};

// Named text blocks with {{placeholder}} slots. load() starts from the
// compiled-in defaults and overrides every block that has a <name>.txt file
// in the directory.
class PromptTemplates {
 public:
  static const PromptTemplates& defaults();
  static PromptTemplates load(const std::filesystem::path& dir);

  const std::string& get(std::string_view name) const;
  void set(std::string name, std::string text);
  std::vector<std::string> names() const;

 private:
  std::map<std::string, std::string, std::less<>> blocks_;
};

// Replaces every {{key}}; unknown keys throw ConfigError.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars);

std::string_view question_text(QuestionId id);

MessageList build_rating_prompt(const JudgePromptConfig& config,
                                std::span<const ReferenceExample> examples,
                                const DisclosureResponse& response,
                                const PromptTemplates& templates = PromptTemplates::defaults());

MessageList build_pairwise_prompt(const JudgePromptConfig& config, const DisclosureResponse& response_a,
                                  const DisclosureResponse& response_b,
                                  const PromptTemplates& templates = PromptTemplates::defaults());

MessageList build_greenwash_prompt(const GreenwashPromptConfig& config,
                                   const DisclosureResponse& response,
                                   const PromptTemplates& templates = PromptTemplates::defaults());

// JSONL rows {"text": ..., "anchor_score": n}.
std::vector<ReferenceExample> load_reference_examples(const std::filesystem::path& path);
// Anchors 3 and 5 built from the synthetic fixture generator.
std::vector<ReferenceExample> synthetic_reference_examples(std::uint64_t seed);
// The examples a shot setting uses: none, {5}, or {3, 5}, taken from the pool
// in that order. Throws ConfigMismatch when an anchor is missing.
std::vector<ReferenceExample> select_reference_examples(Shots shots,
                                                        std::span<const ReferenceExample> pool);

}  // namespace greenjudge

#endif  // GREENJUDGE_CORE_PROMPTING_HPP_
