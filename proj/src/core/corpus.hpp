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
#ifndef GREENJUDGE_CORE_CORPUS_HPP_
#define GREENJUDGE_CORE_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace greenjudge {

// kCombined marks a unit built by concatenating a company's 4.1a and 4.1b
// answers (see combine_questions).
enum class QuestionId { kQ4_1a, kQ4_1b, kCombined };

std::string_view question_id_name(QuestionId id);
std::optional<QuestionId> parse_question_id(std::string_view name);

struct DisclosureResponse {
  std::string company_id;
  QuestionId question_id = QuestionId::kQ4_1a;
  std::string text;
  bool a_list = false;
  std::optional<std::string> region_year;

  // "<company_id>/<question_id>", unique within a corpus.
  std::string key() const;

  friend bool operator==(const DisclosureResponse&, const DisclosureResponse&) = default;
};

enum class CorpusFormat { kCsv, kJsonl };

std::optional<CorpusFormat> parse_corpus_format(std::string_view name);
// Infers from the extension; .csv is CSV, anything else JSONL.
CorpusFormat corpus_format_for(const std::filesystem::path& path);

// Immutable after construction; the constructor enforces the schema
// invariants (non-blank text, unique keys).
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<DisclosureResponse> responses,
                  std::optional<std::uint64_t> seed = std::nullopt);

  const std::vector<DisclosureResponse>& responses() const { return responses_; }
  std::size_t size() const { return responses_.size(); }
  bool empty() const { return responses_.empty(); }
  std::size_t count_a_list() const { return a_list_count_; }
  std::size_t count_non_a_list() const { return responses_.size() - a_list_count_; }
  std::optional<std::uint64_t> seed() const { return seed_; }

  const DisclosureResponse* find(std::string_view key) const;

  auto begin() const { return responses_.begin(); }
  auto end() const { return responses_.end(); }

 private:
  std::vector<DisclosureResponse> responses_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t a_list_count_ = 0;
  std::optional<std::uint64_t> seed_;
};

Corpus parse_corpus(std::string_view contents, CorpusFormat format,
                    std::string_view source_name = "<memory>");
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
Corpus load_corpus(const std::filesystem::path& path);

std::string serialize_corpus(const Corpus& corpus, CorpusFormat format);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format);

struct Subpopulations {
  std::vector<DisclosureResponse> a_list;
  std::vector<DisclosureResponse> non_a_list;
};

// Draws n_per_group from each label class without replacement. Sampling runs
// over key-sorted responses, so the result does not depend on row order.
Subpopulations sample_subpopulations(const Corpus& corpus, std::size_t n_per_group,
                                     std::uint64_t seed);

// Uniform sample of n non-A-List responses, key-sorted.
std::vector<DisclosureResponse> sample_non_a_list(const Corpus& corpus, std::size_t n,
                                                  std::uint64_t seed);

// One unit per company: 4.1a and 4.1b texts joined with a blank line.
Corpus combine_questions(const Corpus& corpus);

}  // namespace greenjudge

#endif  // GREENJUDGE_CORE_CORPUS_HPP_
