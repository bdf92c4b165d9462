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
#include "core/corpus.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "core/error.hpp"
#include "core/util.hpp"

namespace greenjudge {
namespace {

using ordered_json = nlohmann::ordered_json;

struct CsvRecord {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// RFC 4180 reader. Accepts LF or CRLF record separators; quoted fields may
// span lines.
std::vector<CsvRecord> parse_csv(std::string_view text, std::string_view source) {
  std::vector<CsvRecord> records;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::size_t i = 0;
  std::size_t line = 1;
  while (i < text.size()) {
    CsvRecord record;
    record.line = line;
    std::string field;
    bool record_done = false;
    while (!record_done) {
      field.clear();
      if (i < text.size() && text[i] == '"') {
        ++i;
        bool closed = false;
        while (i < text.size()) {
          const char c = text[i];
          if (c == '"') {
            if (i + 1 < text.size() && text[i + 1] == '"') {
              field.push_back('"');
              i += 2;
            } else {
              ++i;
              closed = true;
              break;
            }
          } else {
            if (c == '\n') ++line;
            field.push_back(c);
            ++i;
          }
        }
        if (!closed) {
          fail(ErrorCode::kParseError, std::string(source) + ":" + std::to_string(record.line) +
                                           ": unterminated quoted field");
        }
        if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          fail(ErrorCode::kParseError, std::string(source) + ":" + std::to_string(line) +
                                           ": unexpected character after closing quote");
        }
      } else {
        while (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          if (text[i] == '"') {
            fail(ErrorCode::kParseError, std::string(source) + ":" + std::to_string(line) +
                                             ": stray quote in unquoted field");
          }
          field.push_back(text[i]);
          ++i;
        }
      }
      record.fields.push_back(field);
      if (i >= text.size()) {
        record_done = true;
      } else if (text[i] == ',') {
        ++i;
      } else {
        if (text[i] == '\r') ++i;
        if (i < text.size() && text[i] == '\n') ++i;
        ++line;
        record_done = true;
      }
    }
    const bool blank = record.fields.size() == 1 && record.fields[0].empty();
    if (!blank) records.push_back(std::move(record));
  }
  return records;
}

bool csv_needs_quotes(std::string_view field) {
  return field.find_first_of(",\"\r\n") != std::string_view::npos;
}

void append_csv_field(std::string& out, std::string_view field) {
  if (!csv_needs_quotes(field)) {
    out.append(field);
    return;
  }
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

[[noreturn]] void parse_fail(std::string_view source, std::size_t line, const std::string& what) {
  fail(ErrorCode::kParseError, std::string(source) + ":" + std::to_string(line) + ": " + what);
}

bool parse_a_list_csv(std::string_view value, std::string_view source, std::size_t line) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  parse_fail(source, line, "a_list must be one of true,false,0,1 (got '" + std::string(value) + "')");
}

QuestionId parse_question(std::string_view value, std::string_view source, std::size_t line) {
  auto id = parse_question_id(value);
  if (!id) parse_fail(source, line, "unknown question_id '" + std::string(value) + "'");
  return *id;
}

// Validates row-level invariants with line context before the Corpus
// constructor sees the data.
void check_rows(const std::vector<DisclosureResponse>& rows, const std::vector<std::size_t>& lines,
                std::string_view source) {
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (trim(rows[r].text).empty()) {
      fail(ErrorCode::kEmptyText, std::string(source) + ":" + std::to_string(lines[r]) +
                                      ": empty text for " + rows[r].key());
    }
    auto [it, inserted] = seen.emplace(rows[r].key(), lines[r]);
    if (!inserted) {
      fail(ErrorCode::kDuplicateKey, std::string(source) + ":" + std::to_string(lines[r]) +
                                         ": duplicate key " + rows[r].key() +
                                         " (first seen at line " + std::to_string(it->second) + ")");
    }
  }
}

Corpus parse_csv_corpus(std::string_view contents, std::string_view source) {
  const auto records = parse_csv(contents, source);
  if (records.empty()) parse_fail(source, 1, "missing header row");
  const auto& header = records.front().fields;
  std::map<std::string, std::size_t> column;
  for (std::size_t c = 0; c < header.size(); ++c) column.emplace(header[c], c);
  for (const char* required : {"company_id", "question_id", "text", "a_list"}) {
    if (!column.count(required)) {
      parse_fail(source, 1, std::string("missing required column '") + required + "'");
    }
  }
  const auto region = column.find("region_year");
  std::vector<DisclosureResponse> rows;
  std::vector<std::size_t> lines;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      parse_fail(source, rec.line, "expected " + std::to_string(header.size()) + " fields, got " +
                                       std::to_string(rec.fields.size()));
    }
    DisclosureResponse row;
    row.company_id = rec.fields[column["company_id"]];
    if (row.company_id.empty()) parse_fail(source, rec.line, "empty company_id");
    row.question_id = parse_question(rec.fields[column["question_id"]], source, rec.line);
    row.text = rec.fields[column["text"]];
    row.a_list = parse_a_list_csv(rec.fields[column["a_list"]], source, rec.line);
    if (region != column.end() && !rec.fields[region->second].empty()) {
      row.region_year = rec.fields[region->second];
    }
    rows.push_back(std::move(row));
    lines.push_back(rec.line);
  }
  check_rows(rows, lines, source);
  return Corpus(std::move(rows));
}

Corpus parse_jsonl_corpus(std::string_view contents, std::string_view source) {
  std::vector<DisclosureResponse> rows;
  std::vector<std::size_t> lines;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      parse_fail(source, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) parse_fail(source, line_no, "expected a JSON object");
    for (const char* required : {"company_id", "question_id", "text", "a_list"}) {
      if (!obj.contains(required)) {
        parse_fail(source, line_no, std::string("missing required key '") + required + "'");
      }
    }
    DisclosureResponse row;
    const auto& cid = obj["company_id"];
    if (cid.is_string()) {
      row.company_id = cid.get<std::string>();
    } else if (cid.is_number_integer()) {
      row.company_id = cid.dump();
    } else {
      parse_fail(source, line_no, "company_id must be a string");
    }
    if (row.company_id.empty()) parse_fail(source, line_no, "empty company_id");
    if (!obj["question_id"].is_string()) parse_fail(source, line_no, "question_id must be a string");
    row.question_id = parse_question(obj["question_id"].get<std::string>(), source, line_no);
    if (!obj["text"].is_string()) parse_fail(source, line_no, "text must be a string");
    row.text = obj["text"].get<std::string>();
    const auto& al = obj["a_list"];
    if (al.is_boolean()) {
      row.a_list = al.get<bool>();
    } else if (al.is_number_integer() && (al.get<long long>() == 0 || al.get<long long>() == 1)) {
      row.a_list = al.get<long long>() == 1;
    } else {
      parse_fail(source, line_no, "a_list must be a boolean");
    }
    if (obj.contains("region_year") && !obj["region_year"].is_null()) {
      if (!obj["region_year"].is_string()) parse_fail(source, line_no, "region_year must be a string");
      auto value = obj["region_year"].get<std::string>();
      if (!value.empty()) row.region_year = std::move(value);
    }
    rows.push_back(std::move(row));
    lines.push_back(line_no);
  }
  check_rows(rows, lines, source);
  return Corpus(std::move(rows));
}

std::vector<DisclosureResponse> sorted_by_key(std::vector<DisclosureResponse> rows) {
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.key() < b.key(); });
  return rows;
}

std::vector<DisclosureResponse> draw(std::vector<DisclosureResponse> population, std::size_t n,
                                     Rng& rng) {
  population = sorted_by_key(std::move(population));
  std::vector<DisclosureResponse> out;
  out.reserve(n);
  for (std::size_t idx : sample_without_replacement(population.size(), n, rng)) {
    out.push_back(population[idx]);
  }
  return sorted_by_key(std::move(out));
}

}  // namespace

std::string_view question_id_name(QuestionId id) {
  switch (id) {
    case QuestionId::kQ4_1a: return "Q4_1a";
    case QuestionId::kQ4_1b: return "Q4_1b";
    case QuestionId::kCombined: return "Q4_1ab";
  }
  return "?";
}

std::optional<QuestionId> parse_question_id(std::string_view name) {
  if (name == "Q4_1a") return QuestionId::kQ4_1a;
  if (name == "Q4_1b") return QuestionId::kQ4_1b;
  if (name == "Q4_1ab") return QuestionId::kCombined;
  return std::nullopt;
}

std::string DisclosureResponse::key() const {
  return company_id + "/" + std::string(question_id_name(question_id));
}

std::optional<CorpusFormat> parse_corpus_format(std::string_view name) {
  if (name == "csv") return CorpusFormat::kCsv;
  if (name == "jsonl") return CorpusFormat::kJsonl;
  return std::nullopt;
}

CorpusFormat corpus_format_for(const std::filesystem::path& path) {
  return to_lower(path.extension().string()) == ".csv" ? CorpusFormat::kCsv : CorpusFormat::kJsonl;
}

Corpus::Corpus(std::vector<DisclosureResponse> responses, std::optional<std::uint64_t> seed)
    : responses_(std::move(responses)), seed_(seed) {
  index_.reserve(responses_.size());
  for (std::size_t i = 0; i < responses_.size(); ++i) {
    auto& r = responses_[i];
    if (r.region_year && r.region_year->empty()) r.region_year.reset();
    if (trim(r.text).empty()) fail(ErrorCode::kEmptyText, "empty text for " + r.key());
    if (!index_.emplace(r.key(), i).second) {
      fail(ErrorCode::kDuplicateKey, "duplicate key " + r.key() + " at row " + std::to_string(i + 1));
    }
    if (r.a_list) ++a_list_count_;
  }
}

const DisclosureResponse* Corpus::find(std::string_view key) const {
  auto it = index_.find(std::string(key));
  return it == index_.end() ? nullptr : &responses_[it->second];
}

Corpus parse_corpus(std::string_view contents, CorpusFormat format, std::string_view source_name) {
  return format == CorpusFormat::kCsv ? parse_csv_corpus(contents, source_name)
                                      : parse_jsonl_corpus(contents, source_name);
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  if (!std::filesystem::exists(path)) fail(ErrorCode::kIoError, "no such file: " + path.string());
  return parse_corpus(read_file(path), format, path.string());
}

Corpus load_corpus(const std::filesystem::path& path) {
  return load_corpus(path, corpus_format_for(path));
}

std::string serialize_corpus(const Corpus& corpus, CorpusFormat format) {
  std::string out;
  if (format == CorpusFormat::kCsv) {
    out = "company_id,question_id,text,a_list,region_year\n";
    for (const auto& r : corpus) {
      append_csv_field(out, r.company_id);
      out.push_back(',');
      out.append(question_id_name(r.question_id));
      out.push_back(',');
      append_csv_field(out, r.text);
      out.append(r.a_list ? ",true," : ",false,");
      if (r.region_year) append_csv_field(out, *r.region_year);
      out.push_back('\n');
    }
    return out;
  }
  for (const auto& r : corpus) {
    ordered_json obj;
    obj["company_id"] = r.company_id;
    obj["question_id"] = question_id_name(r.question_id);
    obj["text"] = r.text;
    obj["a_list"] = r.a_list;
    if (r.region_year) obj["region_year"] = *r.region_year;
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format) {
  write_file_atomic(path, serialize_corpus(corpus, format));
}

Subpopulations sample_subpopulations(const Corpus& corpus, std::size_t n_per_group,
                                     std::uint64_t seed) {
  if (n_per_group == 0) fail(ErrorCode::kInvalidArgument, "n_per_group must be positive");
  std::vector<DisclosureResponse> a_list;
  std::vector<DisclosureResponse> others;
  for (const auto& r : corpus) (r.a_list ? a_list : others).push_back(r);
  if (a_list.size() < n_per_group || others.size() < n_per_group) {
    fail(ErrorCode::kInsufficientPopulation,
         "need " + std::to_string(n_per_group) + " per group, have " +
             std::to_string(a_list.size()) + " A-List and " + std::to_string(others.size()) +
             " non-A-List");
  }
  Rng rng(mix_seed(seed, "subpopulations"));
  Subpopulations out;
  out.a_list = draw(std::move(a_list), n_per_group, rng);
  out.non_a_list = draw(std::move(others), n_per_group, rng);
  return out;
}

std::vector<DisclosureResponse> sample_non_a_list(const Corpus& corpus, std::size_t n,
                                                  std::uint64_t seed) {
  std::vector<DisclosureResponse> others;
  for (const auto& r : corpus) {
    if (!r.a_list) others.push_back(r);
  }
  if (others.size() < n) {
    fail(ErrorCode::kInsufficientPopulation, "need " + std::to_string(n) +
                                                 " non-A-List responses, have " +
                                                 std::to_string(others.size()));
  }
  Rng rng(mix_seed(seed, "non_a_list"));
  return draw(std::move(others), n, rng);
}

Corpus combine_questions(const Corpus& corpus) {
  std::vector<DisclosureResponse> out;
  std::unordered_map<std::string, std::size_t> by_company;
  for (const auto& r : corpus) {
    auto it = by_company.find(r.company_id);
    if (it == by_company.end()) {
      by_company.emplace(r.company_id, out.size());
      DisclosureResponse unit = r;
      unit.question_id = QuestionId::kCombined;
      out.push_back(std::move(unit));
      continue;
    }
    auto& unit = out[it->second];
    const bool this_first = r.question_id == QuestionId::kQ4_1a;
    unit.text = this_first ? r.text + "\n\n" + unit.text : unit.text + "\n\n" + r.text;
    unit.a_list = unit.a_list || r.a_list;
    if (!unit.region_year) unit.region_year = r.region_year;
  }
  return Corpus(std::move(out), corpus.seed());
}

}  // namespace greenjudge
