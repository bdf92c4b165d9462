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
#include "core/score_io.hpp"

#include <stdexcept>

#include "core/error.hpp"
#include "core/util.hpp"

namespace greenjudge {

using ojson = nlohmann::ordered_json;

std::string ScoreRecord::key() const {
  return company_id + "/" + std::string(question_id_name(question_id));
}

namespace {

ScoreRecord base_record(const DisclosureResponse& response) {
  ScoreRecord r;
  r.company_id = response.company_id;
  r.question_id = response.question_id;
  r.a_list = response.a_list;
  return r;
}

}  // namespace

ScoreRecord make_score_record(const DisclosureResponse& response, const RatingScore& score) {
  auto r = base_record(response);
  r.system = ScoringSystem::kNumericalRating;
  r.variant = score.variant;
  r.value = score.value;
  if (score.sampled_digit) r.sampled_value = *score.sampled_digit;
  r.digit_mass = score.digit_mass;
  r.fallback_used = score.fallback_used;
  r.raw_text = score.raw_text;
  return r;
}

ScoreRecord make_score_record(const DisclosureResponse& response, const PairwiseScore& score) {
  auto r = base_record(response);
  r.system = ScoringSystem::kPairwiseComparison;
  r.variant = score.variant;
  r.value = score.value;
  r.k = score.k;
  r.outcomes = score.outcomes;
  return r;
}

std::string_view system_name(ScoringSystem system) {
  return system == ScoringSystem::kNumericalRating ? "rating" : "pairwise";
}

std::optional<ScoringSystem> parse_system(std::string_view name) {
  if (name == "rating") return ScoringSystem::kNumericalRating;
  if (name == "pairwise") return ScoringSystem::kPairwiseComparison;
  return std::nullopt;
}

ScoreRange range_for(ScoringSystem system) {
  return system == ScoringSystem::kNumericalRating ? kRatingRange : kPairwiseRange;
}

ojson score_record_to_json(const ScoreRecord& r) {
  ojson j;
  j["company_id"] = r.company_id;
  j["question_id"] = question_id_name(r.question_id);
  j["a_list"] = r.a_list;
  j["system"] = system_name(r.system);
  j["variant"] = r.variant;
  j["value"] = r.value;
  if (r.system == ScoringSystem::kNumericalRating) {
    j["sampled_value"] = r.sampled_value ? ojson(*r.sampled_value) : ojson(nullptr);
    ojson mass = ojson::object();
    for (const auto& [digit, p] : r.digit_mass) mass[std::to_string(digit)] = p;
    j["digit_mass"] = std::move(mass);
    j["fallback_used"] = r.fallback_used;
    j["raw_text"] = r.raw_text;
  } else {
    j["k"] = r.k;
    ojson outcomes = ojson::array();
    for (const auto& o : r.outcomes) {
      ojson row;
      row["opponent_id"] = o.opponent_id;
      row["p_win"] = o.p_win;
      row["orders"] = o.orders_evaluated;
      row["raw_texts"] = o.raw_texts;
      outcomes.push_back(std::move(row));
    }
    j["outcomes"] = std::move(outcomes);
  }
  return j;
}

ScoreRecord score_record_from_json(const nlohmann::json& j) {
  ScoreRecord r;
  r.company_id = j.at("company_id").get<std::string>();
  auto q = parse_question_id(j.at("question_id").get<std::string>());
  if (!q) throw std::invalid_argument("unknown question_id");
  r.question_id = *q;
  r.a_list = j.at("a_list").get<bool>();
  auto system = parse_system(j.at("system").get<std::string>());
  if (!system) throw std::invalid_argument("system must be 'rating' or 'pairwise'");
  r.system = *system;
  r.variant = j.value("variant", std::string());
  r.value = j.at("value").get<double>();
  if (r.system == ScoringSystem::kNumericalRating) {
    if (j.contains("sampled_value") && !j["sampled_value"].is_null()) {
      r.sampled_value = j["sampled_value"].get<double>();
    }
    if (j.contains("digit_mass")) {
      for (const auto& [digit, p] : j["digit_mass"].items()) r.digit_mass[std::stoi(digit)] = p.get<double>();
    }
    r.fallback_used = j.value("fallback_used", false);
    r.raw_text = j.value("raw_text", std::string());
  } else {
    r.k = j.value("k", std::size_t{0});
    if (j.contains("outcomes")) {
      for (const auto& row : j["outcomes"]) {
        PairwiseOutcome o;
        o.opponent_id = row.at("opponent_id").get<std::string>();
        o.p_win = row.at("p_win").get<double>();
        o.orders_evaluated = row.value("orders", 1);
        o.raw_texts = row.value("raw_texts", std::vector<std::string>{});
        r.outcomes.push_back(std::move(o));
      }
    }
  }
  return r;
}

std::string serialize_scores(std::span<const ScoreRecord> records) {
  std::string out;
  for (const auto& r : records) out += score_record_to_json(r).dump() + "\n";
  return out;
}

std::vector<ScoreRecord> parse_scores(std::string_view contents, std::string_view source_name) {
  std::vector<ScoreRecord> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < contents.size()) {
    auto end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    const auto line = contents.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(score_record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      fail(ErrorCode::kParseError, std::string(source_name) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ScoreRecord> load_scores(const std::filesystem::path& path) {
  return parse_scores(read_file(path), path.string());
}

void save_scores(std::span<const ScoreRecord> records, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_scores(records));
}

std::vector<double> score_values(std::span<const ScoreRecord> records, std::optional<bool> a_list) {
  std::vector<double> out;
  for (const auto& r : records) {
    if (!a_list || r.a_list == *a_list) out.push_back(r.value);
  }
  return out;
}

std::map<std::string, double> score_map(std::span<const ScoreRecord> records) {
  std::map<std::string, double> out;
  for (const auto& r : records) {
    if (!out.emplace(r.key(), r.value).second) fail(ErrorCode::kDuplicateKey, "duplicate score for " + r.key());
  }
  return out;
}

std::string histogram_csv(const Histogram& a, const Histogram& b, ScoreRange range, std::string_view label_a,
                          std::string_view label_b) {
  if (a.size() != b.size()) fail(ErrorCode::kBinMismatch, "histograms have different bin counts");
  std::string out = "bin_lo,bin_hi," + std::string(label_a) + "," + std::string(label_b) + "\n";
  const double width = (range.max - range.min) / static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double lo = range.min + width * static_cast<double>(i);
    const double hi = i + 1 == a.size() ? range.max : lo + width;
    out += format_double(lo) + "," + format_double(hi) + "," + format_double(a[i]) + "," + format_double(b[i]) + "\n";
  }
  return out;
}

ojson separation_report_to_json(const SeparationReport& report) {
  ojson j;
  j["tvd"] = report.tvd;
  j["ks"] = report.ks;
  j["emd_normalized"] = report.emd_normalized;
  j["n_a"] = report.n_a;
  j["n_b"] = report.n_b;
  return j;
}

}  // namespace greenjudge
