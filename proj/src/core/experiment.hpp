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
#ifndef GREENJUDGE_CORE_EXPERIMENT_HPP_
#define GREENJUDGE_CORE_EXPERIMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/batch.hpp"
#include "core/corpus.hpp"
#include "core/error.hpp"
#include "core/greenwash.hpp"
#include "core/llm_backend.hpp"
#include "core/prompting.hpp"
#include "core/score_io.hpp"
#include "core/separation_metrics.hpp"
#include "core/synthetic.hpp"

namespace greenjudge {

struct CorpusSource {
  std::filesystem::path path;
  std::optional<CorpusFormat> format;
  std::optional<SyntheticSpec> synthetic;  // used instead of path when set
  bool combine_questions = false;
};

struct PairwiseSettings {
  std::vector<std::string> variants;
  std::size_t k = 24;
  // Responses evaluated per label class; nullopt evaluates everything.
  std::optional<std::size_t> n_per_group = 147;
  std::uint64_t seed = 0;
  bool both_orders = true;
};

struct GreenwashSettings {
  bool enabled = false;
  std::vector<GreenwashConstraint> regimes{std::begin(kAllConstraints), std::end(kAllConstraints)};
  std::size_t n = 100;
  std::uint64_t seed = 0;
  std::string rating_variant = "rating.one";
  std::optional<std::string> pairwise_variant;
  LengthUnit length_unit = LengthUnit::kWords;
};

struct BudgetSettings {
  std::optional<std::uint64_t> max_provider_calls;
  std::optional<double> max_cost_usd;
  double prompt_usd_per_million = 0.0;
  double completion_usd_per_million = 0.0;

  double cost(std::uint64_t prompt_tokens, std::uint64_t completion_tokens) const;
};

struct ExperimentConfig {
  std::string name = "experiment";
  CorpusSource corpus;
  std::optional<std::filesystem::path> reference_examples;
  std::uint64_t reference_seed = 0;  // synthetic examples when no file is given
  std::optional<std::filesystem::path> template_dir;
  BackendConfig backend;
  std::size_t max_in_flight = 8;
  std::vector<std::string> rating_variants;
  bool allow_fallback = true;
  PairwiseSettings pairwise;
  std::size_t bins = kDefaultBins;
  bool ks_binned = false;
  GreenwashSettings greenwash;
  std::optional<std::string> weighting_comparison;  // rating variant
  std::optional<std::string> length_control;        // rating variant
  std::optional<std::pair<std::string, std::string>> correlation;  // (rating, pairwise)
  BudgetSettings budget;

  nlohmann::json source = nlohmann::json::object();  // as parsed, for hashing

  // Relative paths resolve against base_dir.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);
  std::string hash() const;
};

// Everything a run needs, resolved up front: corpus, templates, reference
// examples, and parsed variants. Throws ConfigError (or the loader's error)
// before any backend call is made.
void validate_experiment_config(const ExperimentConfig& config);

struct ExperimentResult {
  std::filesystem::path output_dir;
  std::size_t item_failures = 0;
  nlohmann::ordered_json manifest;
};

// provider replaces the one config.backend would build (tests inject mocks).
ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& output_dir,
                                std::shared_ptr<Backend> provider = nullptr);

struct WeightingComparison {
  SeparationReport sampled;
  SeparationReport weighted;
};

// Both reports come from the same rating records: sampled_value vs value.
WeightingComparison compare_weighting_modes(std::span<const ScoreRecord> records,
                                            const SeparationOptions& options);

std::string weighting_table_csv(const WeightingComparison& comparison);

// 0 ok, 2 config, 3 provider, 4 item failures, 1 internal.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitProvider = 3;
inline constexpr int kExitItemFailures = 4;
int exit_code_for(ErrorCode code);

}  // namespace greenjudge

#endif  // GREENJUDGE_CORE_EXPERIMENT_HPP_
