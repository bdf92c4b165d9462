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
#include "greenjudge/greenjudge.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include <json.hpp>

#include "core/corpus.hpp"
#include "core/error.hpp"
#include "core/experiment.hpp"
#include "core/greenwash.hpp"
#include "core/llm_backend.hpp"
#include "core/prompting.hpp"
#include "core/score_io.hpp"
#include "core/scoring.hpp"
#include "core/separation_metrics.hpp"
#include "core/synthetic.hpp"
#include "core/util.hpp"

struct gj_corpus {
  greenjudge::Corpus corpus;
};

struct gj_backend {
  std::unique_ptr<greenjudge::BackendStack> stack;
};

namespace {

using greenjudge::ErrorCode;
using greenjudge::fail;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

thread_local std::string g_last_error;

template <typename F>
gj_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return GJ_OK;
  } catch (const greenjudge::Error& e) {
    g_last_error = e.what();
    return static_cast<gj_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return GJ_INTERNAL;
}

void require(bool condition, const char* what) {
  if (!condition) fail(ErrorCode::kInvalidArgument, what);
}

char* dup_string(std::string_view s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

void set_out(char** out, std::string_view s) {
  if (out) *out = dup_string(s);
}

std::optional<greenjudge::CorpusFormat> format_arg(const char* format) {
  if (!format || !*format) return std::nullopt;
  auto f = greenjudge::parse_corpus_format(format);
  if (!f) fail(ErrorCode::kInvalidArgument, std::string("unknown corpus format '") + format + "'");
  return f;
}

struct JudgeOptions {
  std::size_t max_in_flight = 8;
  bool both_orders = true;
  bool allow_fallback = true;
  bool fail_fast = false;
  std::optional<std::string> reference_examples;
  std::uint64_t reference_seed = 0;
  std::optional<greenjudge::PromptTemplates> templates;
};

JudgeOptions parse_options(const char* options_json) {
  JudgeOptions o;
  if (!options_json || !*options_json) return o;
  try {
    const auto j = json::parse(options_json);
    if (!j.is_object()) fail(ErrorCode::kConfigError, "options must be a JSON object");
    o.max_in_flight = j.value("max_in_flight", o.max_in_flight);
    o.both_orders = j.value("both_orders", true);
    o.allow_fallback = j.value("allow_fallback", true);
    o.fail_fast = j.value("fail_fast", false);
    if (j.contains("reference_examples") && !j["reference_examples"].is_null()) {
      o.reference_examples = j["reference_examples"].get<std::string>();
    }
    o.reference_seed = j.value("reference_seed", std::uint64_t{0});
    if (j.contains("template_dir") && !j["template_dir"].is_null()) {
      o.templates = greenjudge::PromptTemplates::load(j["template_dir"].get<std::string>());
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfigError, std::string("bad options: ") + e.what());
  }
  return o;
}

std::vector<greenjudge::ReferenceExample> examples_for(const greenjudge::JudgePromptConfig& config,
                                                       const JudgeOptions& o) {
  if (config.shots == greenjudge::Shots::kZero) return {};
  const auto pool = o.reference_examples ? greenjudge::load_reference_examples(*o.reference_examples)
                                         : greenjudge::synthetic_reference_examples(o.reference_seed);
  return greenjudge::select_reference_examples(config.shots, pool);
}

greenjudge::ScoringContext scoring_context(const gj_backend* backend, const JudgeOptions& o) {
  greenjudge::ScoringContext ctx;
  ctx.model_id = backend->stack->model_id();
  ctx.templates = o.templates ? &*o.templates : nullptr;
  ctx.both_orders = o.both_orders;
  ctx.allow_fallback = o.allow_fallback;
  ctx.batch = {o.max_in_flight,
               o.fail_fast ? greenjudge::BatchMode::kFailFast : greenjudge::BatchMode::kCollect};
  return ctx;
}

std::string error_line(const std::string& id, const greenjudge::ItemError& e) {
  ojson row;
  row["id"] = id;
  row["code"] = greenjudge::error_code_name(e.code);
  row["message"] = e.message;
  return row.dump() + "\n";
}

template <typename T>
void emit_scored(const std::vector<greenjudge::Scored<T>>& scored, char** out_scores, char** out_errors,
                 size_t* out_failed) {
  std::vector<greenjudge::ScoreRecord> records;
  std::string errors;
  std::size_t failed = 0;
  for (const auto& item : scored) {
    if (item.ok()) {
      records.push_back(greenjudge::make_score_record(item.response, *item.score));
    } else {
      // A rejected key or a dead provider is not an item problem.
      const auto code = item.error->code;
      if (code == ErrorCode::kAuthError || code == ErrorCode::kCancelled) fail(code, item.error->message);
      errors += error_line(item.response.key(), *item.error);
      ++failed;
    }
  }
  if (failed > 0 && failed == scored.size() &&
      greenjudge::exit_code_for(scored.front().error->code) == greenjudge::kExitProvider) {
    fail(scored.front().error->code, scored.front().error->message);
  }
  set_out(out_scores, greenjudge::serialize_scores(records));
  set_out(out_errors, errors);
  if (out_failed) *out_failed = failed;
}

greenjudge::ExperimentConfig load_experiment(const char* config_path, const char* backend_kind) {
  require(config_path != nullptr, "config_path is null");
  const std::filesystem::path path(config_path);
  if (!std::filesystem::exists(path)) fail(ErrorCode::kConfigError, "config file not found: " + path.string());
  json j;
  try {
    j = json::parse(greenjudge::read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfigError, path.string() + ": " + e.what());
  }
  if (backend_kind && *backend_kind && j.is_object()) {
    auto& backend = j["backend"];
    if (!backend.is_object()) backend = json::object();
    if (backend.value("kind", std::string("mock")) != backend_kind) {
      backend["kind"] = backend_kind;
      backend.erase("model_id");
    }
  }
  return greenjudge::ExperimentConfig::from_json(j, path.parent_path());
}

}  // namespace

extern "C" {

const char* gj_version(void) { return "0.1.0"; }

const char* gj_status_name(gj_status status) {
  return greenjudge::error_code_name(static_cast<ErrorCode>(status)).data();
}

const char* gj_last_error(void) { return g_last_error.c_str(); }

void gj_string_free(char* s) { std::free(s); }

int gj_exit_code(gj_status status) { return greenjudge::exit_code_for(static_cast<ErrorCode>(status)); }

gj_status gj_corpus_load(const char* path, const char* format, gj_corpus** out) {
  return guarded([&] {
    require(path && out, "path and out must be non-null");
    const auto f = format_arg(format);
    auto corpus = f ? greenjudge::load_corpus(path, *f) : greenjudge::load_corpus(path);
    *out = new gj_corpus{std::move(corpus)};
  });
}

gj_status gj_corpus_synthesize(size_t high, size_t low, uint64_t seed, gj_corpus** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new gj_corpus{greenjudge::generate_synthetic_corpus({high, low, seed})};
  });
}

gj_status gj_corpus_save(const gj_corpus* corpus, const char* path, const char* format) {
  return guarded([&] {
    require(corpus && path, "corpus and path must be non-null");
    const auto f = format_arg(format);
    greenjudge::save_corpus(corpus->corpus, path, f ? *f : greenjudge::corpus_format_for(path));
  });
}

gj_status gj_corpus_sample_non_a_list(const gj_corpus* corpus, size_t n, uint64_t seed, gj_corpus** out) {
  return guarded([&] {
    require(corpus && out, "corpus and out must be non-null");
    *out = new gj_corpus{greenjudge::Corpus(greenjudge::sample_non_a_list(corpus->corpus, n, seed))};
  });
}

gj_status gj_corpus_combine_questions(const gj_corpus* corpus, gj_corpus** out) {
  return guarded([&] {
    require(corpus && out, "corpus and out must be non-null");
    *out = new gj_corpus{greenjudge::combine_questions(corpus->corpus)};
  });
}

size_t gj_corpus_size(const gj_corpus* corpus) { return corpus ? corpus->corpus.size() : 0; }

size_t gj_corpus_count_a_list(const gj_corpus* corpus) { return corpus ? corpus->corpus.count_a_list() : 0; }

void gj_corpus_free(gj_corpus* corpus) { delete corpus; }

gj_status gj_backend_create(const char* config_json, gj_backend** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    json j = json::object();
    if (config_json && *config_json) {
      try {
        j = json::parse(config_json);
      } catch (const json::exception& e) {
        fail(ErrorCode::kConfigError, std::string("bad backend config: ") + e.what());
      }
    }
    auto stack = std::make_unique<greenjudge::BackendStack>(greenjudge::BackendConfig::from_json(j));
    *out = new gj_backend{std::move(stack)};
  });
}

gj_status gj_backend_stats_json(const gj_backend* backend, char** out_json) {
  return guarded([&] {
    require(backend && out_json, "backend and out_json must be non-null");
    const auto st = backend->stack->stats();
    ojson j;
    j["model_id"] = backend->stack->model_id();
    j["requests"] = st.requests;
    j["cache_hits"] = st.cache_hits;
    j["provider_calls"] = st.provider_calls;
    j["prompt_tokens"] = st.prompt_tokens;
    j["completion_tokens"] = st.completion_tokens;
    set_out(out_json, j.dump());
  });
}

void gj_backend_free(gj_backend* backend) { delete backend; }

gj_status gj_prompt_render(const char* variant, const gj_corpus* corpus, size_t index, size_t opponent_index,
                           const char* options_json, char** out_json) {
  return guarded([&] {
    require(variant && corpus && out_json, "variant, corpus, and out_json must be non-null");
    const auto& responses = corpus->corpus.responses();
    if (index >= responses.size()) fail(ErrorCode::kInvalidArgument, "response index out of range");
    const auto o = parse_options(options_json);
    const auto& templates = o.templates ? *o.templates : greenjudge::PromptTemplates::defaults();
    const std::string_view name(variant);
    greenjudge::MessageList messages;
    if (name.starts_with("greenwash.")) {
      auto regime = greenjudge::parse_constraint(name.substr(10));
      if (!regime) fail(ErrorCode::kConfigError, "unknown greenwash regime in '" + std::string(name) + "'");
      messages = greenjudge::build_greenwash_prompt({*regime}, responses[index], templates);
    } else {
      const auto config = greenjudge::JudgePromptConfig::from_variant(name);
      if (config.scoring_system == greenjudge::ScoringSystem::kNumericalRating) {
        messages = greenjudge::build_rating_prompt(config, examples_for(config, o), responses[index], templates);
      } else {
        if (opponent_index >= responses.size()) fail(ErrorCode::kInvalidArgument, "opponent index out of range");
        messages = greenjudge::build_pairwise_prompt(config, responses[index], responses[opponent_index], templates);
      }
    }
    ojson arr = ojson::array();
    for (const auto& m : messages) arr.push_back(ojson{{"role", m.role}, {"content", m.content}});
    set_out(out_json, arr.dump(2));
  });
}

gj_status gj_judge_rate(gj_backend* backend, const gj_corpus* corpus, const char* variant,
                        const char* options_json, char** out_scores, char** out_errors, size_t* out_failed) {
  return guarded([&] {
    require(backend && corpus && variant && out_scores, "backend, corpus, variant, out_scores must be non-null");
    const auto config = greenjudge::JudgePromptConfig::from_variant(variant);
    if (config.scoring_system != greenjudge::ScoringSystem::kNumericalRating) {
      fail(ErrorCode::kConfigMismatch, std::string(variant) + " is not a rating variant");
    }
    const auto o = parse_options(options_json);
    const auto examples = examples_for(config, o);
    const auto scored = greenjudge::score_ratings(corpus->corpus.responses(), config, examples, *backend->stack,
                                                  scoring_context(backend, o));
    emit_scored(scored, out_scores, out_errors, out_failed);
  });
}

gj_status gj_judge_pairwise(gj_backend* backend, const gj_corpus* candidates, const gj_corpus* pool,
                            const char* variant, size_t k, uint64_t seed, const char* options_json,
                            char** out_scores, char** out_errors, size_t* out_failed) {
  return guarded([&] {
    require(backend && candidates && variant && out_scores,
            "backend, candidates, variant, out_scores must be non-null");
    const auto config = greenjudge::JudgePromptConfig::from_variant(variant);
    if (config.scoring_system != greenjudge::ScoringSystem::kPairwiseComparison) {
      fail(ErrorCode::kConfigMismatch, std::string(variant) + " is not a pairwise variant");
    }
    const auto o = parse_options(options_json);
    const auto& pool_corpus = pool ? pool->corpus : candidates->corpus;
    const auto scored =
        greenjudge::score_pairwise_all(candidates->corpus.responses(), pool_corpus.responses(), k, seed, config,
                                       *backend->stack, scoring_context(backend, o));
    emit_scored(scored, out_scores, out_errors, out_failed);
  });
}

gj_status gj_weighted_rating(const double mass[5], double* out) {
  return guarded([&] {
    require(mass && out, "mass and out must be non-null");
    greenjudge::DigitMass m;
    for (int d = 1; d <= 5; ++d) {
      if (mass[d - 1] < 0.0) fail(ErrorCode::kInvalidArgument, "negative probability");
      if (mass[d - 1] > 0.0) m[d] = mass[d - 1];
    }
    *out = greenjudge::weighted_rating(m);
  });
}

gj_status gj_expected_win_rate(const double* p_wins, size_t n, double* out) {
  return guarded([&] {
    require(out != nullptr && (p_wins || n == 0), "p_wins and out must be non-null");
    *out = greenjudge::expected_win_rate(std::span<const double>(p_wins, n));
  });
}

gj_status gj_histogram(const double* scores, size_t n, double lo, double hi, size_t bins, double* out_bins) {
  return guarded([&] {
    require(out_bins != nullptr && (scores || n == 0), "scores and out_bins must be non-null");
    const auto h = greenjudge::bin_scores(std::span<const double>(scores, n), {lo, hi}, bins);
    std::copy(h.begin(), h.end(), out_bins);
  });
}

gj_status gj_separation(const double* a, size_t n_a, const double* b, size_t n_b, double lo, double hi,
                        size_t bins, int ks_binned, gj_separation_report* out) {
  return guarded([&] {
    require(out != nullptr && (a || n_a == 0) && (b || n_b == 0), "inputs must be non-null");
    const auto r = greenjudge::separation_report(std::span<const double>(a, n_a), std::span<const double>(b, n_b),
                                                 {{lo, hi}, bins, ks_binned != 0});
    *out = {r.tvd, r.ks, r.emd_normalized, r.n_a, r.n_b};
  });
}

gj_status gj_separation_files(const char* a_scores_path, const char* b_scores_path, double lo, double hi,
                              size_t bins, int ks_binned, const char* hist_csv_path, char** out_json) {
  return guarded([&] {
    require(a_scores_path && b_scores_path && out_json, "paths and out_json must be non-null");
    const auto a = greenjudge::score_values(greenjudge::load_scores(a_scores_path));
    const auto b = greenjudge::score_values(greenjudge::load_scores(b_scores_path));
    const greenjudge::SeparationOptions options{{lo, hi}, bins, ks_binned != 0};
    const auto report = greenjudge::separation_report(a, b, options);
    if (hist_csv_path && *hist_csv_path) {
      greenjudge::write_file_atomic(
          hist_csv_path, greenjudge::histogram_csv(greenjudge::bin_scores(a, options.range, bins),
                                                   greenjudge::bin_scores(b, options.range, bins), options.range,
                                                   "a", "b"));
    }
    auto j = greenjudge::separation_report_to_json(report);
    j["range"] = {lo, hi};
    j["bins"] = bins;
    j["ks_mode"] = ks_binned ? "binned" : "raw";
    set_out(out_json, j.dump(2));
  });
}

gj_status gj_greenwash_generate(gj_backend* backend, const gj_corpus* corpus, const char* regime, size_t n,
                                uint64_t seed, const char* options_json, char** out_variants,
                                char** out_summary_json) {
  return guarded([&] {
    require(backend && corpus && regime && out_variants, "backend, corpus, regime, out_variants must be non-null");
    const auto constraint = greenjudge::parse_constraint(regime);
    if (!constraint) fail(ErrorCode::kInvalidArgument, std::string("unknown regime '") + regime + "'");
    const auto o = parse_options(options_json);
    const auto sample = greenjudge::sample_non_a_list(corpus->corpus, n, seed);
    greenjudge::GreenwashContext ctx;
    ctx.model_id = backend->stack->model_id();
    ctx.templates = o.templates ? &*o.templates : nullptr;
    ctx.batch = {o.max_in_flight, greenjudge::BatchMode::kCollect};
    const auto result = greenjudge::generate_greenwashed(sample, *constraint, *backend->stack, ctx);
    set_out(out_variants, greenjudge::serialize_variants(result.variants, corpus->corpus));
    ojson summary;
    summary["regime"] = regime;
    summary["seed"] = seed;
    summary["requested"] = sample.size();
    summary["generated"] = result.variants.size();
    double ratio_sum = 0.0;
    for (const auto& v : result.variants) ratio_sum += v.length_ratio;
    summary["mean_length_ratio"] =
        result.variants.empty() ? ojson(nullptr) : ojson(ratio_sum / static_cast<double>(result.variants.size()));
    ojson failures = ojson::array();
    for (const auto& f : result.failures) {
      failures.push_back(ojson{{"id", f.original_id},
                               {"code", greenjudge::error_code_name(f.error.code)},
                               {"message", f.error.message}});
    }
    summary["failures"] = std::move(failures);
    set_out(out_summary_json, summary.dump(2));
  });
}

gj_status gj_greenwash_report(const char* originals_scores_path, const char* variants_scores_path,
                              const char* alist_scores_path, const char* variants_path, size_t bins,
                              char** out_json) {
  return guarded([&] {
    require(originals_scores_path && variants_scores_path && alist_scores_path && out_json,
            "score paths and out_json must be non-null");
    const auto originals = greenjudge::load_scores(originals_scores_path);
    const auto variants = greenjudge::load_scores(variants_scores_path);
    const auto alist = greenjudge::load_scores(alist_scores_path);
    if (originals.empty() || variants.empty() || alist.empty()) {
      fail(ErrorCode::kEmptyInput, "score files must be non-empty");
    }
    const auto system = originals.front().system;
    for (const auto* set : {&originals, &variants, &alist}) {
      for (const auto& r : *set) {
        if (r.system != system) fail(ErrorCode::kInvalidArgument, "score files mix rating and pairwise records");
      }
    }
    std::optional<greenjudge::GreenwashConstraint> constraint;
    std::map<std::string, double> ratios;
    if (variants_path && *variants_path) {
      for (const auto& v : greenjudge::load_variants(variants_path)) {
        ratios[v.original_id] = v.length_ratio;
        constraint = v.constraint;
      }
    }
    const auto analysis = greenjudge::delta_analysis(greenjudge::score_map(originals),
                                                     greenjudge::score_map(variants), system, constraint, ratios);
    const greenjudge::SeparationOptions options{greenjudge::range_for(system), bins, false};
    const auto report = greenjudge::robustness_report(
        greenjudge::score_values(alist), greenjudge::score_values(originals),
        {{constraint.value_or(greenjudge::GreenwashConstraint::kUnconstrained), greenjudge::score_values(variants)}},
        options);

    ojson j;
    j["system"] = greenjudge::system_name(system);
    j["regime"] = constraint ? ojson(greenjudge::constraint_name(*constraint)) : ojson(nullptr);
    j["n"] = analysis.summary.n;
    j["mean_original"] = analysis.summary.mean_original;
    j["mean_variant"] = analysis.summary.mean_variant;
    j["mean_delta"] = analysis.summary.mean_delta;
    ojson shares = ojson::array();
    for (const auto& [t, s] : analysis.summary.share_at_least) shares.push_back(ojson{{"threshold", t}, {"share", s}});
    j["shares"] = std::move(shares);
    j["baseline_vs_alist"] = greenjudge::separation_report_to_json(report.baseline);
    j["variants_vs_alist"] = greenjudge::separation_report_to_json(report.per_regime.front().second);
    try {
      j["length_slope_per_10_percent"] = greenjudge::length_delta_regression(analysis.records);
    } catch (const greenjudge::Error& e) {
      if (e.code() != ErrorCode::kDegenerateInput) throw;
      j["length_slope_per_10_percent"] = nullptr;
    }
    ojson records = ojson::array();
    for (const auto& r : analysis.records) {
      records.push_back(ojson{{"id", r.id},
                              {"original", r.original_score},
                              {"variant", r.variant_score},
                              {"delta", r.delta},
                              {"length_ratio", r.length_ratio ? ojson(*r.length_ratio) : ojson(nullptr)}});
    }
    j["records"] = std::move(records);
    set_out(out_json, j.dump(2));
  });
}

gj_status gj_greenwash_double(gj_backend* backend, const gj_corpus* corpus, const char* variant,
                              const char* options_json, char** out_csv, char** out_summary_json) {
  return guarded([&] {
    require(backend && corpus && variant && out_csv, "backend, corpus, variant, out_csv must be non-null");
    const auto config = greenjudge::JudgePromptConfig::from_variant(variant);
    const auto o = parse_options(options_json);
    const auto examples = examples_for(config, o);
    const auto records = greenjudge::length_doubling_control(corpus->corpus.responses(), config, examples,
                                                             *backend->stack, scoring_context(backend, o));
    std::string csv = "id,original,doubled,delta\n";
    double mean_delta = 0.0;
    std::size_t lower = 0;
    std::size_t equal = 0;
    for (const auto& r : records) {
      csv += r.id + "," + greenjudge::format_double(r.original_score) + "," +
             greenjudge::format_double(r.variant_score) + "," + greenjudge::format_double(r.delta) + "\n";
      mean_delta += r.delta;
      if (r.delta < 0) ++lower;
      if (r.delta == 0) ++equal;
    }
    const double n = records.empty() ? 1.0 : static_cast<double>(records.size());
    set_out(out_csv, csv);
    ojson summary;
    summary["variant"] = variant;
    summary["n"] = records.size();
    summary["mean_delta"] = mean_delta / n;
    summary["share_lower"] = static_cast<double>(lower) / n;
    summary["share_equal"] = static_cast<double>(equal) / n;
    set_out(out_summary_json, summary.dump(2));
  });
}

gj_status gj_length_delta_regression(const double* length_ratios, const double* deltas, size_t n,
                                     double* out_slope) {
  return guarded([&] {
    require(out_slope != nullptr && ((length_ratios && deltas) || n == 0), "inputs must be non-null");
    std::vector<greenjudge::DeltaRecord> records(n);
    for (size_t i = 0; i < n; ++i) {
      records[i].delta = deltas[i];
      records[i].length_ratio = length_ratios[i];
    }
    *out_slope = greenjudge::length_delta_regression(records);
  });
}

gj_status gj_experiment_run(const char* config_path, const char* output_dir, const char* backend_kind,
                            char** out_manifest_json, size_t* out_item_failures) {
  return guarded([&] {
    require(output_dir != nullptr, "output_dir is null");
    const auto config = load_experiment(config_path, backend_kind);
    const auto result = greenjudge::run_experiment(config, output_dir);
    set_out(out_manifest_json, result.manifest.dump(2));
    if (out_item_failures) *out_item_failures = result.item_failures;
  });
}

gj_status gj_experiment_validate(const char* config_path, const char* backend_kind) {
  return guarded([&] { greenjudge::validate_experiment_config(load_experiment(config_path, backend_kind)); });
}

}  // extern "C"
