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
// greenjudge command-line tool. Talks to the library only through the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "greenjudge/greenjudge.h"

namespace {

constexpr int kExitItemFailures = 4;

struct CliError {
  gj_status status;
};

void check(gj_status status) {
  if (status != GJ_OK) throw CliError{status};
}

struct CString {
  char* p = nullptr;
  ~CString() { gj_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

struct CorpusHandle {
  gj_corpus* p = nullptr;
  ~CorpusHandle() { gj_corpus_free(p); }
};

struct BackendHandle {
  gj_backend* p = nullptr;
  ~BackendHandle() { gj_backend_free(p); }
};

void emit(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
    if (!contents.empty() && contents.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    throw CliError{GJ_IO_ERROR};
  }
  out << contents;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read " << path << "\n";
    throw CliError{GJ_IO_ERROR};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void load_corpus(const std::string& path, const std::string& format, CorpusHandle& out) {
  check(gj_corpus_load(path.c_str(), format.empty() ? nullptr : format.c_str(), &out.p));
}

struct BackendArgs {
  std::string kind;
  std::string config_path;
  std::string cache_dir;
  std::string model;

  void add_to(CLI::App* app) {
    app->add_option("--backend", kind, "Backend kind: mock or openai");
    app->add_option("--backend-config", config_path, "Backend config JSON file");
    app->add_option("--cache-dir", cache_dir, "Response cache directory");
    app->add_option("--model", model, "Model id");
  }

  void create(BackendHandle& out) const {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
      try {
        j = nlohmann::json::parse(slurp(config_path));
      } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << config_path << ": " << e.what() << "\n";
        throw CliError{GJ_CONFIG_ERROR};
      }
    }
    if (!kind.empty()) j["kind"] = kind;
    if (!cache_dir.empty()) j["cache_dir"] = cache_dir;
    if (!model.empty()) j["model_id"] = model;
    check(gj_backend_create(j.dump().c_str(), &out.p));
  }
};

struct JudgeArgs {
  std::size_t max_in_flight = 8;
  std::string examples;
  std::uint64_t reference_seed = 0;
  std::string templates;
  bool single_order = false;
  bool no_fallback = false;

  void add_to(CLI::App* app) {
    app->add_option("--max-in-flight", max_in_flight, "Concurrent requests");
    app->add_option("--examples", examples, "Reference examples JSONL");
    app->add_option("--reference-seed", reference_seed, "Seed for synthetic reference examples");
    app->add_option("--templates", templates, "Template override directory");
    app->add_flag("--single-order", single_order, "Pairwise: evaluate only candidate-first order");
    app->add_flag("--no-fallback", no_fallback, "Fail items whose logprobs carry no digit mass");
  }

  std::string json() const {
    nlohmann::json j;
    j["max_in_flight"] = max_in_flight;
    j["reference_seed"] = reference_seed;
    j["both_orders"] = !single_order;
    j["allow_fallback"] = !no_fallback;
    if (!examples.empty()) j["reference_examples"] = examples;
    if (!templates.empty()) j["template_dir"] = templates;
    return j.dump();
  }
};

int report_item_errors(const CString& errors, std::size_t failed, const std::string& errors_path) {
  if (failed == 0) return 0;
  if (!errors_path.empty()) {
    emit(errors_path, errors.str());
  } else {
    std::cerr << errors.str();
  }
  std::cerr << failed << " item(s) failed\n";
  return kExitItemFailures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Score disclosure responses with LLM judges and measure label separation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(gj_version()));
  int exit_code = 0;

  // corpus
  auto* corpus_cmd = app.add_subcommand("corpus", "Corpus tools");
  corpus_cmd->require_subcommand(1);
  std::string validate_path;
  std::string validate_format;
  auto* validate_cmd = corpus_cmd->add_subcommand("validate", "Check a corpus file against the schema");
  validate_cmd->add_option("path", validate_path)->required();
  validate_cmd->add_option("--format", validate_format, "csv or jsonl (default: from extension)");
  validate_cmd->callback([&] {
    CorpusHandle c;
    load_corpus(validate_path, validate_format, c);
    const auto n = gj_corpus_size(c.p);
    const auto a = gj_corpus_count_a_list(c.p);
    std::cout << validate_path << ": " << n << " responses (" << a << " A-List, " << n - a << " other)\n";
  });

  std::size_t synth_high = 0;
  std::size_t synth_low = 0;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  auto* synth_cmd = corpus_cmd->add_subcommand("synth", "Generate a synthetic two-tier corpus");
  synth_cmd->add_option("--high", synth_high, "High-tier (A-List) responses")->required();
  synth_cmd->add_option("--low", synth_low, "Low-tier responses")->required();
  synth_cmd->add_option("--seed", synth_seed, "Seed");
  synth_cmd->add_option("-o,--output", synth_out, "Output path (.csv or .jsonl)")->required();
  synth_cmd->callback([&] {
    CorpusHandle c;
    check(gj_corpus_synthesize(synth_high, synth_low, synth_seed, &c.p));
    check(gj_corpus_save(c.p, synth_out.c_str(), nullptr));
  });

  // prompts
  auto* prompts_cmd = app.add_subcommand("prompts", "Prompt inspection");
  prompts_cmd->require_subcommand(1);
  std::string render_variant;
  std::string render_response;
  std::size_t render_index = 0;
  std::size_t render_opponent = 1;
  JudgeArgs render_args;
  auto* render_cmd = prompts_cmd->add_subcommand("render", "Print the messages a variant sends");
  render_cmd->add_option("--variant", render_variant, "Judge variant or greenwash.<regime>")->required();
  render_cmd->add_option("--response", render_response, "Corpus file holding the response")->required();
  render_cmd->add_option("--index", render_index, "Row of the response in the file");
  render_cmd->add_option("--opponent-index", render_opponent, "Row of the slot-B response (pairwise)");
  render_args.add_to(render_cmd);
  render_cmd->callback([&] {
    CorpusHandle c;
    load_corpus(render_response, "", c);
    CString out;
    check(gj_prompt_render(render_variant.c_str(), c.p, render_index, render_opponent, render_args.json().c_str(),
                           &out.p));
    std::cout << out.str() << "\n";
  });

  // judge
  auto* judge_cmd = app.add_subcommand("judge", "Score a corpus");
  judge_cmd->require_subcommand(1);
  std::string rate_variant = "rating.one";
  std::string rate_corpus;
  std::string rate_out;
  std::string rate_errors;
  BackendArgs rate_backend;
  JudgeArgs rate_args;
  auto* rate_cmd = judge_cmd->add_subcommand("rate", "Numerical rating judge");
  rate_cmd->add_option("--variant", rate_variant, "rating.<zero|one|two>[.scale][.cot]");
  rate_cmd->add_option("--corpus", rate_corpus, "Corpus file")->required();
  rate_cmd->add_option("-o,--output", rate_out, "Score JSONL (default stdout)");
  rate_cmd->add_option("--errors", rate_errors, "Per-item error JSONL");
  rate_backend.add_to(rate_cmd);
  rate_args.add_to(rate_cmd);
  rate_cmd->callback([&] {
    CorpusHandle c;
    load_corpus(rate_corpus, "", c);
    BackendHandle b;
    rate_backend.create(b);
    CString scores;
    CString errors;
    std::size_t failed = 0;
    check(gj_judge_rate(b.p, c.p, rate_variant.c_str(), rate_args.json().c_str(), &scores.p, &errors.p, &failed));
    emit(rate_out, scores.str());
    exit_code = report_item_errors(errors, failed, rate_errors);
  });

  std::string pw_variant = "pairwise";
  std::string pw_corpus;
  std::string pw_pool;
  std::size_t pw_k = 24;
  std::uint64_t pw_seed = 0;
  std::string pw_out;
  std::string pw_errors;
  BackendArgs pw_backend;
  JudgeArgs pw_args;
  auto* pw_cmd = judge_cmd->add_subcommand("pairwise", "Pairwise comparison judge (expected win rate)");
  pw_cmd->add_option("--variant", pw_variant, "pairwise[.cot]");
  pw_cmd->add_option("--corpus", pw_corpus, "Candidates")->required();
  pw_cmd->add_option("--pool", pw_pool, "Opponent pool (default: the candidates)");
  pw_cmd->add_option("--k", pw_k, "Opponents per candidate");
  pw_cmd->add_option("--seed", pw_seed, "Opponent sampling seed");
  pw_cmd->add_option("-o,--output", pw_out, "Score JSONL (default stdout)");
  pw_cmd->add_option("--errors", pw_errors, "Per-item error JSONL");
  pw_backend.add_to(pw_cmd);
  pw_args.add_to(pw_cmd);
  pw_cmd->callback([&] {
    CorpusHandle c;
    load_corpus(pw_corpus, "", c);
    CorpusHandle pool;
    if (!pw_pool.empty()) load_corpus(pw_pool, "", pool);
    BackendHandle b;
    pw_backend.create(b);
    CString scores;
    CString errors;
    std::size_t failed = 0;
    check(gj_judge_pairwise(b.p, c.p, pool.p, pw_variant.c_str(), pw_k, pw_seed, pw_args.json().c_str(), &scores.p,
                            &errors.p, &failed));
    emit(pw_out, scores.str());
    exit_code = report_item_errors(errors, failed, pw_errors);
  });

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "Distribution separation");
  metrics_cmd->require_subcommand(1);
  std::string sep_a;
  std::string sep_b;
  std::vector<double> sep_range = {1.0, 5.0};
  std::size_t sep_bins = 25;
  bool sep_ks_binned = false;
  std::string sep_hist;
  std::string sep_out;
  auto* sep_cmd = metrics_cmd->add_subcommand("separate", "TVD, KS, and normalized EMD between two score files");
  sep_cmd->add_option("--a", sep_a, "Scores of population A")->required();
  sep_cmd->add_option("--b", sep_b, "Scores of population B")->required();
  sep_cmd->add_option("--range", sep_range, "Score range: lo hi")->expected(2);
  sep_cmd->add_option("--bins", sep_bins, "Histogram bins");
  sep_cmd->add_flag("--ks-binned", sep_ks_binned, "KS on histograms instead of raw scores");
  sep_cmd->add_option("--hist-csv", sep_hist, "Per-bin shares CSV");
  sep_cmd->add_option("-o,--output", sep_out, "Report JSON (default stdout)");
  sep_cmd->callback([&] {
    CString out;
    check(gj_separation_files(sep_a.c_str(), sep_b.c_str(), sep_range[0], sep_range[1], sep_bins,
                              sep_ks_binned ? 1 : 0, sep_hist.empty() ? nullptr : sep_hist.c_str(), &out.p));
    emit(sep_out, out.str());
  });

  // greenwash
  auto* gw_cmd = app.add_subcommand("greenwash", "Greenwashing robustness tools");
  gw_cmd->require_subcommand(1);
  std::string gen_corpus;
  std::string gen_regime;
  std::size_t gen_n = 100;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  std::string gen_summary;
  BackendArgs gen_backend;
  JudgeArgs gen_args;
  auto* gen_cmd = gw_cmd->add_subcommand("generate", "Rewrite a non-A-List sample under a regime");
  gen_cmd->add_option("--corpus", gen_corpus, "Source corpus")->required();
  gen_cmd->add_option("--regime", gen_regime, "unconstrained | fixed_accuracy | fixed_accuracy_and_length")
      ->required();
  gen_cmd->add_option("--n", gen_n, "Sample size");
  gen_cmd->add_option("--seed", gen_seed, "Sampling seed");
  gen_cmd->add_option("-o,--output", gen_out, "Variant JSONL (default stdout)");
  gen_cmd->add_option("--summary", gen_summary, "Summary JSON (default stderr)");
  gen_backend.add_to(gen_cmd);
  gen_args.add_to(gen_cmd);
  gen_cmd->callback([&] {
    CorpusHandle c;
    load_corpus(gen_corpus, "", c);
    BackendHandle b;
    gen_backend.create(b);
    CString variants;
    CString summary;
    check(gj_greenwash_generate(b.p, c.p, gen_regime.c_str(), gen_n, gen_seed, gen_args.json().c_str(),
                                &variants.p, &summary.p));
    emit(gen_out, variants.str());
    if (gen_summary.empty()) {
      std::cerr << summary.str() << "\n";
    } else {
      emit(gen_summary, summary.str());
    }
    if (nlohmann::json::parse(summary.str())["failures"].size() > 0) exit_code = kExitItemFailures;
  });

  std::string rep_originals;
  std::string rep_variants;
  std::string rep_alist;
  std::string rep_variant_corpus;
  std::size_t rep_bins = 25;
  std::string rep_out;
  auto* rep_cmd = gw_cmd->add_subcommand("report", "Score deltas and EMD against the A-List");
  rep_cmd->add_option("--originals", rep_originals, "Scores of the original responses")->required();
  rep_cmd->add_option("--variants", rep_variants, "Scores of the greenwashed responses")->required();
  rep_cmd->add_option("--alist", rep_alist, "Scores of A-List responses")->required();
  rep_cmd->add_option("--variant-corpus", rep_variant_corpus, "Variant JSONL from generate (length ratios)");
  rep_cmd->add_option("--bins", rep_bins, "Histogram bins");
  rep_cmd->add_option("-o,--output", rep_out, "Summary JSON (default stdout)");
  rep_cmd->callback([&] {
    CString out;
    check(gj_greenwash_report(rep_originals.c_str(), rep_variants.c_str(), rep_alist.c_str(),
                              rep_variant_corpus.empty() ? nullptr : rep_variant_corpus.c_str(), rep_bins, &out.p));
    emit(rep_out, out.str());
  });

  std::string dbl_corpus;
  std::string dbl_variant = "rating.one";
  std::string dbl_out;
  std::string dbl_summary;
  BackendArgs dbl_backend;
  JudgeArgs dbl_args;
  auto* dbl_cmd = gw_cmd->add_subcommand("double", "Length-doubling control");
  dbl_cmd->add_option("--corpus", dbl_corpus, "Responses to double")->required();
  dbl_cmd->add_option("--variant", dbl_variant, "Rating variant");
  dbl_cmd->add_option("-o,--output", dbl_out, "Per-item CSV (default stdout)");
  dbl_cmd->add_option("--summary", dbl_summary, "Summary JSON (default stderr)");
  dbl_backend.add_to(dbl_cmd);
  dbl_args.add_to(dbl_cmd);
  dbl_cmd->callback([&] {
    CorpusHandle c;
    load_corpus(dbl_corpus, "", c);
    BackendHandle b;
    dbl_backend.create(b);
    CString csv;
    CString summary;
    check(gj_greenwash_double(b.p, c.p, dbl_variant.c_str(), dbl_args.json().c_str(), &csv.p, &summary.p));
    emit(dbl_out, csv.str());
    if (dbl_summary.empty()) {
      std::cerr << summary.str() << "\n";
    } else {
      emit(dbl_summary, summary.str());
    }
  });

  // run
  std::string run_config;
  std::string run_backend;
  std::string run_out;
  bool run_check_only = false;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment config");
  run_cmd->add_option("config", run_config, "Experiment config JSON")->required();
  run_cmd->add_option("--backend", run_backend, "Override the backend kind (mock or openai)");
  run_cmd->add_option("-o,--output", run_out, "Output directory (default: runs/<config name>)");
  run_cmd->add_flag("--check", run_check_only, "Validate the config and exit");
  run_cmd->callback([&] {
    const char* kind = run_backend.empty() ? nullptr : run_backend.c_str();
    if (run_check_only) {
      check(gj_experiment_validate(run_config.c_str(), kind));
      std::cout << run_config << ": ok\n";
      return;
    }
    if (run_out.empty()) {
      auto stem = run_config.substr(run_config.find_last_of('/') + 1);
      stem = stem.substr(0, stem.rfind('.'));
      run_out = "runs/" + stem;
    }
    CString manifest;
    std::size_t failures = 0;
    check(gj_experiment_run(run_config.c_str(), run_out.c_str(), kind, &manifest.p, &failures));
    const auto m = nlohmann::json::parse(manifest.str());
    const auto& totals = m["totals"];
    std::cout << "wrote " << run_out << " (" << totals["requests"] << " requests, " << totals["cache_hits"]
              << " cache hits, " << totals["provider_calls"] << " provider calls)\n";
    if (failures > 0) {
      std::cerr << failures << " item failure(s); see " << run_out << "/errors.jsonl\n";
      exit_code = kExitItemFailures;
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; usage errors share the config exit code.
    const int code = app.exit(e);
    return code == 0 ? 0 : gj_exit_code(GJ_INVALID_ARGUMENT);
  } catch (const CliError& e) {
    const char* message = gj_last_error();
    if (message && *message) std::cerr << "error (" << gj_status_name(e.status) << "): " << message << "\n";
    return gj_exit_code(e.status);
  }
  return exit_code;
}
