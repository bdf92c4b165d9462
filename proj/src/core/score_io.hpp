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
#ifndef GREENJUDGE_CORE_SCORE_IO_HPP_
#define GREENJUDGE_CORE_SCORE_IO_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "core/corpus.hpp"
#include "core/prompting.hpp"
#include "core/scoring.hpp"
#include "core/separation_metrics.hpp"

namespace greenjudge {

// One line of a score file. Rating records carry the digit mass and the
// sampled digit; pairwise records carry k and the per-opponent outcomes.
struct ScoreRecord {
  std::string company_id;
  QuestionId question_id = QuestionId::kQ4_1a;
  bool a_list = false;
  ScoringSystem system = ScoringSystem::kNumericalRating;
  std::string variant;
  double value = 0.0;

  std::optional<double> sampled_value;
  DigitMass digit_mass;
  bool fallback_used = false;
  std::string raw_text;

  std::size_t k = 0;
  std::vector<PairwiseOutcome> outcomes;

  std::string key() const;
};

ScoreRecord make_score_record(const DisclosureResponse& response, const RatingScore& score);
ScoreRecord make_score_record(const DisclosureResponse& response, const PairwiseScore& score);

nlohmann::ordered_json score_record_to_json(const ScoreRecord& record);
ScoreRecord score_record_from_json(const nlohmann::json& j);

std::string serialize_scores(std::span<const ScoreRecord> records);
std::vector<ScoreRecord> parse_scores(std::string_view contents, std::string_view source_name = "<memory>");
std::vector<ScoreRecord> load_scores(const std::filesystem::path& path);
void save_scores(std::span<const ScoreRecord> records, const std::filesystem::path& path);

// Values in file order, optionally restricted to one label class.
std::vector<double> score_values(std::span<const ScoreRecord> records,
                                 std::optional<bool> a_list = std::nullopt);
// key -> value; duplicate keys throw DuplicateKey.
std::map<std::string, double> score_map(std::span<const ScoreRecord> records);

ScoreRange range_for(ScoringSystem system);
std::string_view system_name(ScoringSystem system);
std::optional<ScoringSystem> parse_system(std::string_view name);

// Per-bin share of each population: bin_lo,bin_hi,<label_a>,<label_b>.
std::string histogram_csv(const Histogram& a, const Histogram& b, ScoreRange range, std::string_view label_a,
                          std::string_view label_b);

nlohmann::ordered_json separation_report_to_json(const SeparationReport& report);

}  // namespace greenjudge

#endif  // GREENJUDGE_CORE_SCORE_IO_HPP_
