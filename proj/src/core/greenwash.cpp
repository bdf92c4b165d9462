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
#include "core/greenwash.hpp"

#include <array>
#include <set>

#include <json.hpp>

#include "core/error.hpp"
#include "core/util.hpp"

namespace greenjudge {

double length_ratio(std::string_view original, std::string_view variant, LengthUnit unit) {
  const auto measure = [unit](std::string_view s) {
    return static_cast<double>(unit == LengthUnit::kWords ? count_words(s) : s.size());
  };
  const double base = measure(original);
  if (base == 0.0) fail(ErrorCode::kDegenerateInput, "original response has zero length");
  return measure(variant) / base;
}

GenerationResult generate_greenwashed(std::span<const DisclosureResponse> sample, GreenwashConstraint regime,
                                      Backend& backend, const GreenwashContext& ctx) {
  const auto& templates = ctx.templates ? *ctx.templates : PromptTemplates::defaults();
  std::vector<CompletionRequest> requests;
  for (const auto& r : sample) {
    if (r.a_list) fail(ErrorCode::kInvalidArgument, "greenwash sample must be non-A-List: " + r.key());
    CompletionRequest req;
    req.model_id = ctx.model_id;
    req.messages = build_greenwash_prompt({regime}, r, templates);
    req.max_tokens = ctx.max_tokens;
    req.want_logprobs = false;
    req.top_logprobs = 0;
    requests.push_back(std::move(req));
  }
  const auto outcomes = run_batch(backend, requests, ctx.batch);
  GenerationResult result;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto id = sample[i].key();
    if (!outcomes[i].ok()) {
      result.failures.push_back({id, *outcomes[i].error});
      continue;
    }
    const auto& text = outcomes[i].response->text;
    if (trim(text).empty()) {
      result.failures.push_back({id, {ErrorCode::kGenerationFailure, "empty rewrite for " + id}});
      continue;
    }
    result.variants.push_back({id, regime, text, length_ratio(sample[i].text, text, ctx.length_unit)});
  }
  return result;
}

Corpus variants_as_corpus(std::span<const GreenwashVariant> variants, const Corpus& originals) {
  std::vector<DisclosureResponse> rows;
  for (const auto& v : variants) {
    const auto* original = originals.find(v.original_id);
    if (!original) fail(ErrorCode::kIdMismatch, "variant references unknown response " + v.original_id);
    DisclosureResponse row = *original;
    row.text = v.text;
    rows.push_back(std::move(row));
  }
  return Corpus(std::move(rows));
}

std::string serialize_variants(std::span<const GreenwashVariant> variants, const Corpus& originals) {
  std::string out;
  for (const auto& v : variants) {
    const auto* original = originals.find(v.original_id);
    if (!original) fail(ErrorCode::kIdMismatch, "variant references unknown response " + v.original_id);
    nlohmann::ordered_json row;
    row["company_id"] = original->company_id;
    row["question_id"] = question_id_name(original->question_id);
    row["text"] = v.text;
    row["a_list"] = original->a_list;
    if (original->region_year) row["region_year"] = *original->region_year;
    row["original_id"] = v.original_id;
    row["constraint"] = constraint_name(v.constraint);
    row["length_ratio"] = v.length_ratio;
    out += row.dump() + "\n";
  }
  return out;
}

std::vector<GreenwashVariant> load_variants(const std::filesystem::path& path) {
  std::vector<GreenwashVariant> out;
  const auto contents = read_file(path);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < contents.size()) {
    auto end = contents.find('\n', pos);
    if (end == std::string::npos) end = contents.size();
    const std::string_view line(contents.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      GreenwashVariant v;
      v.original_id = j.at("original_id").get<std::string>();
      auto c = parse_constraint(j.at("constraint").get<std::string>());
      if (!c) throw std::invalid_argument("unknown constraint");
      v.constraint = *c;
      v.text = j.at("text").get<std::string>();
      v.length_ratio = j.at("length_ratio").get<double>();
      out.push_back(std::move(v));
    } catch (const std::exception& e) {
      fail(ErrorCode::kParseError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<double> delta_thresholds(ScoringSystem system) {
  if (system == ScoringSystem::kNumericalRating) return {0.5, 1.0, 1.5};
  return {40.0};
}

DeltaAnalysis delta_analysis(const ScoreMap& originals, const ScoreMap& variants, ScoringSystem system,
                             std::optional<GreenwashConstraint> constraint,
                             const std::map<std::string, double>& length_ratios) {
  if (originals.size() != variants.size()) {
    fail(ErrorCode::kIdMismatch, std::to_string(originals.size()) + " originals vs " +
                                     std::to_string(variants.size()) + " variants");
  }
  DeltaAnalysis out;
  for (const auto& [id, original] : originals) {
    auto it = variants.find(id);
    if (it == variants.end()) fail(ErrorCode::kIdMismatch, "no variant score for " + id);
    DeltaRecord rec;
    rec.id = id;
    rec.original_score = original;
    rec.variant_score = it->second;
    rec.delta = it->second - original;
    rec.system = system;
    rec.constraint = constraint;
    if (auto lr = length_ratios.find(id); lr != length_ratios.end()) rec.length_ratio = lr->second;
    out.records.push_back(rec);
  }
  auto& s = out.summary;
  s.n = out.records.size();
  const auto thresholds = delta_thresholds(system);
  std::vector<std::size_t> hits(thresholds.size(), 0);
  for (const auto& rec : out.records) {
    s.mean_original += rec.original_score;
    s.mean_variant += rec.variant_score;
    s.mean_delta += rec.delta;
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      if (rec.delta >= thresholds[t]) ++hits[t];
    }
  }
  const double n = s.n == 0 ? 1.0 : static_cast<double>(s.n);
  s.mean_original /= n;
  s.mean_variant /= n;
  s.mean_delta /= n;
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    s.share_at_least.emplace_back(thresholds[t], static_cast<double>(hits[t]) / n);
  }
  return out;
}

RobustnessReport robustness_report(std::span<const double> a_list_scores, std::span<const double> original_scores,
                                   const std::vector<std::pair<GreenwashConstraint, std::vector<double>>>& greenwashed,
                                   const SeparationOptions& options) {
  RobustnessReport out;
  out.baseline = separation_report(a_list_scores, original_scores, options);
  for (const auto& [regime, scores] : greenwashed) {
    out.per_regime.emplace_back(regime, separation_report(a_list_scores, scores, options));
  }
  return out;
}

DisclosureResponse double_response(const DisclosureResponse& response) {
  DisclosureResponse doubled = response;
  doubled.text = response.text + " " + response.text;
  return doubled;
}

std::vector<DeltaRecord> length_doubling_control(std::span<const DisclosureResponse> sample,
                                                 const JudgePromptConfig& judge_config,
                                                 std::span<const ReferenceExample> examples, Backend& backend,
                                                 const ScoringContext& ctx,
                                                 std::vector<GenerationFailure>* failures) {
  if (judge_config.scoring_system != ScoringSystem::kNumericalRating) {
    fail(ErrorCode::kConfigMismatch, "the length control uses a numerical rating judge");
  }
  std::vector<DisclosureResponse> doubled;
  doubled.reserve(sample.size());
  for (const auto& r : sample) doubled.push_back(double_response(r));
  ScoringContext run_ctx = ctx;
  run_ctx.batch.mode = failures ? BatchMode::kCollect : BatchMode::kFailFast;
  const auto before = score_ratings(sample, judge_config, examples, backend, run_ctx);
  const auto after = score_ratings(doubled, judge_config, examples, backend, run_ctx);
  std::vector<DeltaRecord> out;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (!before[i].ok() || !after[i].ok()) {
      failures->push_back({sample[i].key(), before[i].ok() ? *after[i].error : *before[i].error});
      continue;
    }
    DeltaRecord rec;
    rec.id = sample[i].key();
    rec.original_score = before[i].score->value;
    rec.variant_score = after[i].score->value;
    rec.delta = rec.variant_score - rec.original_score;
    rec.system = ScoringSystem::kNumericalRating;
    rec.length_ratio = length_ratio(sample[i].text, doubled[i].text);
    out.push_back(rec);
  }
  return out;
}

double length_delta_regression(std::span<const DeltaRecord> deltas) {
  std::vector<std::pair<double, double>> points;
  for (const auto& d : deltas) {
    if (d.length_ratio) points.emplace_back(*d.length_ratio, d.delta);
  }
  if (points.size() < 2) fail(ErrorCode::kDegenerateInput, "need at least two records with a length ratio");
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& [x, y] : points) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  if (!(sxx > 0.0)) fail(ErrorCode::kDegenerateInput, "all length ratios are equal");
  return 0.1 * sxy / sxx;
}

std::size_t count_buzzwords(std::string_view text) {
  static constexpr std::array<std::string_view, 12> kBuzzwords = {
      "greener future",     "environmental stewardship", "sustainable future", "strongly committed",
      "firmly committed",   "intensely focused",         "decisively",         "net-zero journey",
      "planet",             "green transition",          "eco-friendly",       "climate leadership"};
  const std::string lower = to_lower(text);
  std::size_t count = 0;
  for (auto word : kBuzzwords) {
    for (auto pos = lower.find(word); pos != std::string::npos; pos = lower.find(word, pos + word.size())) ++count;
  }
  return count;
}

}  // namespace greenjudge
