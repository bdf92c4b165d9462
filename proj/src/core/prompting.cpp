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
#include "core/prompting.hpp"

#include <json.hpp>

#include "core/error.hpp"
#include "core/synthetic.hpp"
#include "core/util.hpp"

namespace greenjudge {
namespace {

constexpr std::pair<const char*, const char*> kDefaultTemplates[] = {
#include "default_templates.inc"
};

std::string strip_trailing_newlines(std::string text) {
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return text;
}

std::string join_blocks(const std::vector<std::string>& blocks) {
  std::string out;
  for (const auto& b : blocks) {
    if (b.empty()) continue;
    if (!out.empty()) out += "\n\n";
    out += b;
  }
  return out;
}

std::string_view shots_name(Shots shots) {
  switch (shots) {
    case Shots::kZero: return "zero";
    case Shots::kOne: return "one";
    case Shots::kTwo: return "two";
  }
  return "?";
}

}  // namespace

JudgePromptConfig JudgePromptConfig::from_variant(std::string_view name) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= name.size()) {
    const auto dot = name.find('.', start);
    const auto end = dot == std::string_view::npos ? name.size() : dot;
    parts.emplace_back(name.substr(start, end - start));
    start = end + 1;
  }
  const auto bad = [&] { fail(ErrorCode::kConfigError, "unknown judge variant '" + std::string(name) + "'"); };
  JudgePromptConfig c;
  std::size_t i = 1;
  if (parts[0] == "rating") {
    c.scoring_system = ScoringSystem::kNumericalRating;
    if (parts.size() < 2) bad();
    if (parts[1] == "zero") c.shots = Shots::kZero;
    else if (parts[1] == "one") c.shots = Shots::kOne;
    else if (parts[1] == "two") c.shots = Shots::kTwo;
    else bad();
    i = 2;
  } else if (parts[0] == "pairwise") {
    c.scoring_system = ScoringSystem::kPairwiseComparison;
  } else {
    bad();
  }
  for (; i < parts.size(); ++i) {
    if (parts[i] == "scale" && c.scoring_system == ScoringSystem::kNumericalRating && !c.indicative_scale &&
        !c.chain_of_thought) {
      c.indicative_scale = true;
    } else if (parts[i] == "cot" && !c.chain_of_thought) {
      c.chain_of_thought = true;
    } else {
      bad();
    }
  }
  return c;
}

std::string JudgePromptConfig::variant_name() const {
  std::string name;
  if (scoring_system == ScoringSystem::kNumericalRating) {
    name = "rating." + std::string(shots_name(shots));
    if (indicative_scale) name += ".scale";
  } else {
    name = "pairwise";
  }
  if (chain_of_thought) name += ".cot";
  return name;
}

std::string JudgePromptConfig::display_label() const {
  if (scoring_system == ScoringSystem::kPairwiseComparison) {
    return chain_of_thought ? "chain-of-thought prompting" : "no chain-of-thought";
  }
  std::string label = std::string(shots_name(shots)) + "-shot";
  if (indicative_scale) label += ", indicative scale";
  if (chain_of_thought) label += ", chain-of-thought";
  return label;
}

void validate_judge_config(const JudgePromptConfig& config) {
  if (config.scoring_system == ScoringSystem::kPairwiseComparison &&
      (config.shots != Shots::kZero || config.indicative_scale)) {
    fail(ErrorCode::kConfigMismatch, "shots and indicative scale apply to numerical rating only");
  }
  if (config.chain_of_thought && config.explanation_word_limit == 0) {
    fail(ErrorCode::kConfigMismatch, "chain-of-thought needs a positive explanation word limit");
  }
}

std::string_view constraint_name(GreenwashConstraint c) {
  switch (c) {
    case GreenwashConstraint::kUnconstrained: return "unconstrained";
    case GreenwashConstraint::kFixedAccuracy: return "fixed_accuracy";
    case GreenwashConstraint::kFixedAccuracyAndLength: return "fixed_accuracy_and_length";
  }
  return "?";
}

std::optional<GreenwashConstraint> parse_constraint(std::string_view name) {
  for (auto c : kAllConstraints) {
    if (constraint_name(c) == name) return c;
  }
  return std::nullopt;
}

const PromptTemplates& PromptTemplates::defaults() {
  static const PromptTemplates instance = [] {
    PromptTemplates t;
    for (const auto& [name, text] : kDefaultTemplates) t.set(name, text);
    return t;
  }();
  return instance;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    fail(ErrorCode::kConfigError, "template directory not found: " + dir.string());
  }
  PromptTemplates t = defaults();
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    const auto name = entry.path().stem().string();
    if (!t.blocks_.count(name)) {
      fail(ErrorCode::kConfigError, "unknown template block '" + name + "' in " + dir.string());
    }
    t.set(name, read_file(entry.path()));
  }
  return t;
}

const std::string& PromptTemplates::get(std::string_view name) const {
  auto it = blocks_.find(name);
  if (it == blocks_.end()) fail(ErrorCode::kConfigError, "missing template block '" + std::string(name) + "'");
  return it->second;
}

void PromptTemplates::set(std::string name, std::string text) {
  blocks_[std::move(name)] = strip_trailing_newlines(std::move(text));
}

std::vector<std::string> PromptTemplates::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : blocks_) out.push_back(name);
  return out;
}

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) fail(ErrorCode::kConfigError, "unterminated {{ in template");
    out.append(tmpl.substr(pos, open - pos));
    const std::string key(trim(tmpl.substr(open + 2, close - open - 2)));
    auto it = vars.find(key);
    if (it == vars.end()) fail(ErrorCode::kConfigError, "template references unknown key '" + key + "'");
    out.append(it->second);
    pos = close + 2;
  }
  return out;
}

std::string_view question_text(QuestionId id) {
  switch (id) {
    case QuestionId::kQ4_1a:
      return "Provide details of your absolute emissions target(s) and progress made against those target(s).";
    case QuestionId::kQ4_1b:
      return "Provide details of your emissions intensity target(s) and progress made against those target(s).";
    case QuestionId::kCombined:
      return "Provide details of your absolute emissions target(s) and progress made against those "
             "target(s). Provide details of your emissions intensity target(s) and progress made "
             "against those target(s).";
  }
  return "";
}

MessageList build_rating_prompt(const JudgePromptConfig& config, std::span<const ReferenceExample> examples,
                                const DisclosureResponse& response, const PromptTemplates& templates) {
  if (config.scoring_system != ScoringSystem::kNumericalRating) {
    fail(ErrorCode::kConfigMismatch, "build_rating_prompt needs a numerical rating config");
  }
  validate_judge_config(config);
  const auto expected = static_cast<std::size_t>(config.shots);
  if (examples.size() != expected) {
    fail(ErrorCode::kConfigMismatch, "variant " + config.variant_name() + " needs " +
                                         std::to_string(expected) + " reference example(s), got " +
                                         std::to_string(examples.size()));
  }
  if (config.shots == Shots::kOne && examples[0].anchor_score != 5) {
    fail(ErrorCode::kConfigMismatch, "one-shot reference example must be anchored at 5");
  }
  if (config.shots == Shots::kTwo && (examples[0].anchor_score != 3 || examples[1].anchor_score != 5)) {
    fail(ErrorCode::kConfigMismatch, "two-shot reference examples must be anchored at 3 and 5");
  }
  const std::map<std::string, std::string> vars{
      {"question", std::string(question_text(response.question_id))},
      {"word_limit", std::to_string(config.explanation_word_limit)}};

  std::vector<std::string> blocks;
  blocks.push_back(render_template(templates.get("rating_task"), vars));
  blocks.push_back(config.criteria_block.empty() ? templates.get("criteria") : config.criteria_block);
  blocks.push_back(config.exclusion_block.empty() ? templates.get("exclusions") : config.exclusion_block);
  if (config.indicative_scale) blocks.push_back(templates.get("indicative_scale"));
  if (!examples.empty()) {
    std::string refs = templates.get("reference_header");
    for (const auto& ex : examples) {
      refs += "\n" + render_template(templates.get("reference_example"),
                                     {{"score", std::to_string(ex.anchor_score)}, {"text", ex.text}});
    }
    blocks.push_back(refs);
  }
  blocks.push_back(render_template(templates.get("response_block"), {{"text", response.text}}));
  blocks.push_back(render_template(
      templates.get(config.chain_of_thought ? "rating_answer_cot" : "rating_answer"), vars));
  return {{"system", templates.get("rating_system")}, {"user", join_blocks(blocks)}};
}

MessageList build_pairwise_prompt(const JudgePromptConfig& config, const DisclosureResponse& response_a,
                                  const DisclosureResponse& response_b, const PromptTemplates& templates) {
  if (config.scoring_system != ScoringSystem::kPairwiseComparison) {
    fail(ErrorCode::kConfigMismatch, "build_pairwise_prompt needs a pairwise comparison config");
  }
  validate_judge_config(config);
  if (response_a.key() == response_b.key()) {
    fail(ErrorCode::kSelfComparison, "cannot compare " + response_a.key() + " with itself");
  }
  // Both responses answer the same question in the protocol; when they do
  // not, the combined wording covers both.
  const QuestionId q = response_a.question_id == response_b.question_id ? response_a.question_id
                                                                         : QuestionId::kCombined;
  const std::map<std::string, std::string> vars{
      {"question", std::string(question_text(q))},
      {"word_limit", std::to_string(config.explanation_word_limit)}};
  std::vector<std::string> blocks;
  blocks.push_back(render_template(templates.get("pairwise_task"), vars));
  blocks.push_back(config.criteria_block.empty() ? templates.get("criteria") : config.criteria_block);
  blocks.push_back(config.exclusion_block.empty() ? templates.get("exclusions") : config.exclusion_block);
  blocks.push_back(render_template(templates.get("pairwise_block"),
                                   {{"text_a", response_a.text}, {"text_b", response_b.text}}));
  blocks.push_back(render_template(
      templates.get(config.chain_of_thought ? "pairwise_answer_cot" : "pairwise_answer"), vars));
  return {{"system", templates.get("pairwise_system")}, {"user", join_blocks(blocks)}};
}

MessageList build_greenwash_prompt(const GreenwashPromptConfig& config, const DisclosureResponse& response,
                                   const PromptTemplates& templates) {
  const std::map<std::string, std::string> vars{{"question", std::string(question_text(response.question_id))},
                                                {"text", response.text}};
  std::vector<std::string> blocks;
  blocks.push_back(render_template(templates.get("greenwash_task"), vars));
  if (config.constraint != GreenwashConstraint::kUnconstrained) {
    blocks.push_back(templates.get("greenwash_accuracy"));
  }
  if (config.constraint == GreenwashConstraint::kFixedAccuracyAndLength) {
    blocks.push_back(templates.get("greenwash_length"));
  }
  blocks.push_back(render_template(templates.get("greenwash_output"), vars));
  return {{"system", templates.get("greenwash_system")}, {"user", join_blocks(blocks)}};
}

std::vector<ReferenceExample> load_reference_examples(const std::filesystem::path& path) {
  std::vector<ReferenceExample> out;
  const std::string contents = read_file(path);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    auto end = contents.find('\n', pos);
    if (end == std::string::npos) end = contents.size();
    const std::string_view line(contents.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ReferenceExample ex{j.at("text").get<std::string>(), j.at("anchor_score").get<int>()};
      if (ex.anchor_score < 1 || ex.anchor_score > 5) throw std::out_of_range("anchor_score");
      if (trim(ex.text).empty()) throw std::out_of_range("text");
      out.push_back(std::move(ex));
    } catch (const std::exception& e) {
      fail(ErrorCode::kParseError, path.string() + ":" + std::to_string(line_no) +
                                       ": bad reference example (" + e.what() + ")");
    }
  }
  return out;
}

std::vector<ReferenceExample> synthetic_reference_examples(std::uint64_t seed) {
  return {{synthetic_exemplar_text(3, seed), 3}, {synthetic_exemplar_text(5, seed), 5}};
}

std::vector<ReferenceExample> select_reference_examples(Shots shots, std::span<const ReferenceExample> pool) {
  const auto find = [&](int anchor) {
    for (const auto& ex : pool) {
      if (ex.anchor_score == anchor) return ex;
    }
    fail(ErrorCode::kConfigMismatch, "no reference example with anchor score " + std::to_string(anchor));
  };
  switch (shots) {
    case Shots::kZero: return {};
    case Shots::kOne: return {find(5)};
    case Shots::kTwo: return {find(3), find(5)};
  }
  return {};
}

}  // namespace greenjudge
