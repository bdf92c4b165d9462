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
#include "core/experiment.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <map>
#include <mutex>
#include <set>

#include "core/scoring.hpp"
#include "core/util.hpp"

namespace greenjudge {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

double BudgetSettings::cost(std::uint64_t prompt_tokens, std::uint64_t completion_tokens) const {
  return (static_cast<double>(prompt_tokens) * prompt_usd_per_million +
          static_cast<double>(completion_tokens) * completion_usd_per_million) /
         1e6;
}

namespace {

[[noreturn]] void config_fail(const std::string& message) { fail(ErrorCode::kConfigError, message); }

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute() || base.empty()) return path;
  return base / path;
}

std::vector<std::string> string_list(const json& j, const char* key) {
  if (!j.contains(key)) return {};
  if (!j[key].is_array()) config_fail(std::string(key) + " must be a list of strings");
  return j[key].get<std::vector<std::string>>();
}

const std::set<std::string> kTopLevelKeys = {
    "name",   "corpus",  "reference_examples", "reference_seed", "template_dir",         "backend",
    "batch",  "rating",  "pairwise",           "metrics",        "greenwash",            "weighting_comparison",
    "length_control",    "correlation",        "budget"};

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) config_fail("experiment config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kTopLevelKeys.contains(key)) config_fail("unknown config key '" + key + "'");
  }
  ExperimentConfig c;
  c.source = j;
  try {
    c.name = j.value("name", c.name);

    if (!j.contains("corpus")) config_fail("config needs a 'corpus' section");
    const auto& corpus = j["corpus"];
    if (corpus.contains("synthetic")) {
      const auto& s = corpus["synthetic"];
      c.corpus.synthetic = SyntheticSpec{s.value("high", std::size_t{0}), s.value("low", std::size_t{0}),
                                         s.value("seed", std::uint64_t{0})};
    } else if (corpus.contains("path")) {
      c.corpus.path = resolve(base_dir, corpus["path"].get<std::string>());
      if (corpus.contains("format")) {
        c.corpus.format = parse_corpus_format(corpus["format"].get<std::string>());
        if (!c.corpus.format) config_fail("corpus.format must be 'csv' or 'jsonl'");
      }
    } else {
      config_fail("corpus needs 'path' or 'synthetic'");
    }
    c.corpus.combine_questions = corpus.value("combine_questions", false);

    if (j.contains("reference_examples")) {
      c.reference_examples = resolve(base_dir, j["reference_examples"].get<std::string>());
    }
    c.reference_seed = j.value("reference_seed", std::uint64_t{0});
    if (j.contains("template_dir")) c.template_dir = resolve(base_dir, j["template_dir"].get<std::string>());

    c.backend = BackendConfig::from_json(j.value("backend", json::object()));
    if (!c.backend.cache_dir.empty()) c.backend.cache_dir = resolve(base_dir, c.backend.cache_dir).string();

    if (j.contains("batch")) c.max_in_flight = j["batch"].value("max_in_flight", c.max_in_flight);
    if (c.max_in_flight == 0) config_fail("batch.max_in_flight must be positive");

    if (j.contains("rating")) {
      c.rating_variants = string_list(j["rating"], "variants");
      c.allow_fallback = j["rating"].value("allow_fallback", true);
    }
    if (j.contains("pairwise")) {
      const auto& p = j["pairwise"];
      c.pairwise.variants = string_list(p, "variants");
      c.pairwise.k = p.value("k", c.pairwise.k);
      if (p.contains("n_per_group")) {
        c.pairwise.n_per_group = p["n_per_group"].is_null()
                                     ? std::nullopt
                                     : std::optional<std::size_t>(p["n_per_group"].get<std::size_t>());
      }
      c.pairwise.seed = p.value("seed", c.pairwise.seed);
      c.pairwise.both_orders = p.value("both_orders", true);
    }
    if (j.contains("metrics")) {
      c.bins = j["metrics"].value("bins", c.bins);
      c.ks_binned = j["metrics"].value("ks_binned", false);
    }
    if (j.contains("greenwash")) {
      const auto& g = j["greenwash"];
      c.greenwash.enabled = g.value("enabled", true);
      if (g.contains("regimes")) {
        c.greenwash.regimes.clear();
        for (const auto& name : string_list(g, "regimes")) {
          auto regime = parse_constraint(name);
          if (!regime) config_fail("unknown greenwash regime '" + name + "'");
          c.greenwash.regimes.push_back(*regime);
        }
      }
      c.greenwash.n = g.value("n", c.greenwash.n);
      c.greenwash.seed = g.value("seed", c.greenwash.seed);
      c.greenwash.rating_variant = g.value("rating_variant", c.greenwash.rating_variant);
      if (g.contains("pairwise_variant") && !g["pairwise_variant"].is_null()) {
        c.greenwash.pairwise_variant = g["pairwise_variant"].get<std::string>();
      }
      const auto unit = g.value("length_unit", std::string("words"));
      if (unit == "words") c.greenwash.length_unit = LengthUnit::kWords;
      else if (unit == "characters") c.greenwash.length_unit = LengthUnit::kCharacters;
      else config_fail("greenwash.length_unit must be 'words' or 'characters'");
    }
    if (j.contains("weighting_comparison")) c.weighting_comparison = j["weighting_comparison"].get<std::string>();
    if (j.contains("length_control")) c.length_control = j["length_control"].get<std::string>();
    if (j.contains("correlation")) {
      const auto& k = j["correlation"];
      c.correlation = std::make_pair(k.at("rating_variant").get<std::string>(),
                                     k.at("pairwise_variant").get<std::string>());
    }
    if (j.contains("budget")) {
      const auto& b = j["budget"];
      if (b.contains("max_provider_calls")) c.budget.max_provider_calls = b["max_provider_calls"].get<std::uint64_t>();
      if (b.contains("max_cost_usd")) c.budget.max_cost_usd = b["max_cost_usd"].get<double>();
      c.budget.prompt_usd_per_million = b.value("prompt_usd_per_million", 0.0);
      c.budget.completion_usd_per_million = b.value("completion_usd_per_million", 0.0);
    }
  } catch (const json::exception& e) {
    config_fail(std::string("bad experiment config: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  if (!fs::exists(path)) config_fail("config file not found: " + path.string());
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    config_fail(path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

std::string ExperimentConfig::hash() const { return sha256_hex(source.dump()); }

namespace {

struct Prepared {
  Corpus corpus;
  PromptTemplates templates;
  std::map<std::string, JudgePromptConfig> judges;
  std::map<std::string, std::vector<ReferenceExample>> examples;
};

void add_judge(Prepared& p, const std::vector<ReferenceExample>& pool, const std::string& variant,
               ScoringSystem expected) {
  if (p.judges.contains(variant)) return;
  auto cfg = JudgePromptConfig::from_variant(variant);
  if (cfg.scoring_system != expected) {
    config_fail("variant '" + variant + "' is not a " +
                (expected == ScoringSystem::kNumericalRating ? "rating" : "pairwise") + " variant");
  }
  p.examples[variant] = select_reference_examples(cfg.shots, pool);
  p.judges[variant] = cfg;
}

bool contains(const std::vector<std::string>& list, const std::string& value) {
  return std::find(list.begin(), list.end(), value) != list.end();
}

Prepared prepare(const ExperimentConfig& c) {
  Prepared p;
  if (c.rating_variants.empty() && c.pairwise.variants.empty() && !c.greenwash.enabled && !c.length_control) {
    config_fail("config runs nothing: add rating/pairwise variants, greenwash, or length_control");
  }
  for (const auto* list : {&c.rating_variants, &c.pairwise.variants}) {
    std::set<std::string> seen;
    for (const auto& v : *list) {
      if (!seen.insert(v).second) config_fail("variant listed twice: " + v);
    }
  }

  if (c.template_dir) {
    if (!fs::is_directory(*c.template_dir)) config_fail("template_dir not found: " + c.template_dir->string());
    p.templates = PromptTemplates::load(*c.template_dir);
  } else {
    p.templates = PromptTemplates::defaults();
  }

  std::vector<ReferenceExample> pool;
  if (c.reference_examples) {
    if (!fs::exists(*c.reference_examples)) {
      config_fail("reference_examples not found: " + c.reference_examples->string());
    }
    pool = load_reference_examples(*c.reference_examples);
  } else {
    pool = synthetic_reference_examples(c.reference_seed);
  }

  for (const auto& v : c.rating_variants) add_judge(p, pool, v, ScoringSystem::kNumericalRating);
  for (const auto& v : c.pairwise.variants) add_judge(p, pool, v, ScoringSystem::kPairwiseComparison);
  if (c.greenwash.enabled) {
    add_judge(p, pool, c.greenwash.rating_variant, ScoringSystem::kNumericalRating);
    if (c.greenwash.pairwise_variant) {
      add_judge(p, pool, *c.greenwash.pairwise_variant, ScoringSystem::kPairwiseComparison);
    }
    if (c.greenwash.regimes.empty()) config_fail("greenwash.regimes is empty");
  }
  if (c.length_control) add_judge(p, pool, *c.length_control, ScoringSystem::kNumericalRating);
  if (c.weighting_comparison && !contains(c.rating_variants, *c.weighting_comparison)) {
    config_fail("weighting_comparison variant must be one of rating.variants: " + *c.weighting_comparison);
  }
  if (c.correlation) {
    if (!contains(c.rating_variants, c.correlation->first)) {
      config_fail("correlation.rating_variant must be one of rating.variants");
    }
    if (!contains(c.pairwise.variants, c.correlation->second)) {
      config_fail("correlation.pairwise_variant must be one of pairwise.variants");
    }
  }
  if (c.bins == 0) config_fail("metrics.bins must be positive");

  if (c.corpus.synthetic) {
    p.corpus = generate_synthetic_corpus(*c.corpus.synthetic);
  } else {
    if (!fs::exists(c.corpus.path)) config_fail("corpus not found: " + c.corpus.path.string());
    p.corpus = c.corpus.format ? load_corpus(c.corpus.path, *c.corpus.format) : load_corpus(c.corpus.path);
  }
  if (c.corpus.combine_questions) p.corpus = combine_questions(p.corpus);
  if (p.corpus.empty()) config_fail("corpus is empty");

  const bool uses_pairwise = !c.pairwise.variants.empty() || (c.greenwash.enabled && c.greenwash.pairwise_variant);
  if (uses_pairwise) {
    std::size_t pool = p.corpus.size();
    if (c.pairwise.n_per_group) {
      const auto n = *c.pairwise.n_per_group;
      if (n > p.corpus.count_a_list() || n > p.corpus.count_non_a_list()) {
        fail(ErrorCode::kInsufficientPopulation, "pairwise.n_per_group = " + std::to_string(n) +
                                                     " exceeds a label class of the corpus");
      }
      pool = 2 * n;
    }
    if (c.pairwise.k == 0) config_fail("pairwise.k must be positive");
    if (c.pairwise.k + 1 > pool) {
      fail(ErrorCode::kInsufficientPool, "pairwise.k = " + std::to_string(c.pairwise.k) + " needs at least " +
                                             std::to_string(c.pairwise.k + 1) + " evaluated responses");
    }
  }
  if ((c.greenwash.enabled || c.length_control) && c.greenwash.n > p.corpus.count_non_a_list()) {
    fail(ErrorCode::kInsufficientPopulation, "greenwash.n = " + std::to_string(c.greenwash.n) +
                                                 " exceeds the non-A-List population");
  }

  // Render every prompt shape once so template errors surface before any
  // backend call.
  const auto& first = p.corpus.responses().front();
  for (const auto& [name, cfg] : p.judges) {
    if (cfg.scoring_system == ScoringSystem::kNumericalRating) {
      build_rating_prompt(cfg, p.examples[name], first, p.templates);
    } else {
      auto other = first;
      other.company_id += "#probe";
      build_pairwise_prompt(cfg, first, other, p.templates);
    }
  }
  if (c.greenwash.enabled) {
    for (auto regime : c.greenwash.regimes) build_greenwash_prompt({regime}, first, p.templates);
  }
  return p;
}

// Caps provider usage; sits below the cache, so hits are free.
class BudgetGuard : public Backend {
 public:
  BudgetGuard(std::shared_ptr<Backend> inner, BudgetSettings budget)
      : inner_(std::move(inner)), budget_(budget) {}

  CompletionResponse complete(const CompletionRequest& request) override {
    {
      std::lock_guard lock(mu_);
      if (budget_.max_provider_calls && calls_ >= *budget_.max_provider_calls) {
        fail(ErrorCode::kCancelled, "budget cap reached: max_provider_calls = " +
                                        std::to_string(*budget_.max_provider_calls));
      }
      if (budget_.max_cost_usd && cost_ >= *budget_.max_cost_usd) {
        fail(ErrorCode::kCancelled, "budget cap reached: max_cost_usd = " + format_double(*budget_.max_cost_usd));
      }
      ++calls_;
    }
    auto response = inner_->complete(request);
    std::lock_guard lock(mu_);
    cost_ += budget_.cost(response.usage.prompt_tokens, response.usage.completion_tokens);
    return response;
  }

  std::string cache_namespace() const override { return inner_->cache_namespace(); }

 private:
  std::shared_ptr<Backend> inner_;
  BudgetSettings budget_;
  std::mutex mu_;
  std::uint64_t calls_ = 0;
  double cost_ = 0.0;
};

std::string iso_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string csv_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

ojson json_or_null(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

bool is_run_fatal(ErrorCode code) {
  return code == ErrorCode::kAuthError || code == ErrorCode::kCancelled || code == ErrorCode::kConfigError;
}

struct RunState {
  const ExperimentConfig& config;
  Prepared& prep;
  fs::path out;
  BackendStack& backend;
  ScoringContext ctx;
  GreenwashContext gw_ctx;
  SeparationOptions rating_opts;
  SeparationOptions pairwise_opts;
  std::string errors_jsonl;
  std::vector<std::string> artifacts;
  ojson stages = ojson::array();
  std::size_t item_failures = 0;

  void write(const std::string& rel, std::string_view contents) {
    write_file_atomic(out / rel, contents);
    artifacts.push_back(rel);
  }

  void record_error(std::string_view stage, const std::string& id, const ItemError& error) {
    ojson row;
    row["stage"] = stage;
    row["id"] = id;
    row["code"] = error_code_name(error.code);
    row["message"] = error.message;
    errors_jsonl += row.dump() + "\n";
    ++item_failures;
  }

  // Auth failures, exhausted budgets, and stages where every item failed at
  // the provider abort the run instead of filling the ledger.
  void check_fatal(const std::vector<ItemError>& errors, std::size_t total) {
    for (const auto& e : errors) {
      if (is_run_fatal(e.code)) throw Error(e.code, e.message);
    }
    if (!errors.empty() && errors.size() == total && exit_code_for(errors.front().code) == kExitProvider) {
      throw Error(errors.front().code, errors.front().message);
    }
  }

  template <typename F>
  void stage(const std::string& name, F&& body) {
    const auto before = backend.stats();
    const auto t0 = std::chrono::steady_clock::now();
    body();
    const auto t1 = std::chrono::steady_clock::now();
    const auto after = backend.stats();
    ojson s;
    s["name"] = name;
    s["wall_seconds"] = std::chrono::duration<double>(t1 - t0).count();
    s["requests"] = after.requests - before.requests;
    s["cache_hits"] = after.cache_hits - before.cache_hits;
    s["provider_calls"] = after.provider_calls - before.provider_calls;
    s["prompt_tokens"] = after.prompt_tokens - before.prompt_tokens;
    s["completion_tokens"] = after.completion_tokens - before.completion_tokens;
    stages.push_back(std::move(s));
  }

  std::vector<ScoreRecord> rate(std::string_view stage_name, std::span<const DisclosureResponse> responses,
                                const std::string& variant) {
    auto scored = score_ratings(responses, prep.judges.at(variant), prep.examples.at(variant), backend, ctx);
    std::vector<ScoreRecord> records;
    std::vector<ItemError> errors;
    for (const auto& item : scored) {
      if (item.ok()) {
        records.push_back(make_score_record(item.response, *item.score));
      } else {
        record_error(stage_name, item.response.key(), *item.error);
        errors.push_back(*item.error);
      }
    }
    check_fatal(errors, responses.size());
    return records;
  }

  // The evaluated population: every opponent is drawn from it.
  std::vector<DisclosureResponse> pairwise_pool;

  std::vector<ScoreRecord> compare(std::string_view stage_name, std::span<const DisclosureResponse> candidates,
                                   const std::string& variant) {
    auto scored = score_pairwise_all(candidates, pairwise_pool, config.pairwise.k, config.pairwise.seed,
                                     prep.judges.at(variant), backend, ctx);
    std::vector<ScoreRecord> records;
    std::vector<ItemError> errors;
    for (const auto& item : scored) {
      if (item.ok()) {
        records.push_back(make_score_record(item.response, *item.score));
      } else {
        record_error(stage_name, item.response.key(), *item.error);
        errors.push_back(*item.error);
      }
    }
    check_fatal(errors, candidates.size());
    return records;
  }

  const SeparationOptions& options_for(ScoringSystem system) const {
    return system == ScoringSystem::kNumericalRating ? rating_opts : pairwise_opts;
  }
};

std::optional<SeparationReport> maybe_separation(std::span<const double> a, std::span<const double> b,
                                                 const SeparationOptions& options) {
  if (a.empty() || b.empty()) return std::nullopt;
  return separation_report(a, b, options);
}

Histogram histogram_or_zero(std::span<const double> scores, const SeparationOptions& options) {
  if (scores.empty()) return Histogram(options.bins, 0.0);
  return bin_scores(scores, options.range, options.bins);
}

std::optional<double> mean_of(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::string system_label(ScoringSystem system) { return std::string(system_name(system)); }

void run_table1(RunState& s, std::map<std::string, std::vector<ScoreRecord>>& scores) {
  std::string csv = "variant,label,system,tvd,ks,emd_normalized,n_a_list,n_non_a_list\n";
  ojson rows = ojson::array();
  auto emit = [&](const std::string& variant, const std::vector<ScoreRecord>& records) {
    const auto& cfg = s.prep.judges.at(variant);
    const auto& opts = s.options_for(cfg.scoring_system);
    const auto a = score_values(records, true);
    const auto b = score_values(records, false);
    const auto report = maybe_separation(a, b, opts);
    s.write("scores/" + variant + ".jsonl", serialize_scores(records));
    s.write("histograms/" + variant + ".csv",
            histogram_csv(histogram_or_zero(a, opts), histogram_or_zero(b, opts), opts.range, "a_list",
                          "non_a_list"));
    const auto label = cfg.display_label();
    const auto field = [&](auto member) {
      return report ? std::optional<double>((*report).*member) : std::nullopt;
    };
    csv += variant + ",\"" + label + "\"," + system_label(cfg.scoring_system) + "," +
           csv_field(field(&SeparationReport::tvd)) + "," + csv_field(field(&SeparationReport::ks)) + "," +
           csv_field(field(&SeparationReport::emd_normalized)) + "," + std::to_string(a.size()) + "," +
           std::to_string(b.size()) + "\n";
    ojson row;
    row["variant"] = variant;
    row["label"] = label;
    row["system"] = system_label(cfg.scoring_system);
    row["tvd"] = json_or_null(field(&SeparationReport::tvd));
    row["ks"] = json_or_null(field(&SeparationReport::ks));
    row["emd_normalized"] = json_or_null(field(&SeparationReport::emd_normalized));
    row["n_a_list"] = a.size();
    row["n_non_a_list"] = b.size();
    rows.push_back(std::move(row));
  };

  for (const auto& variant : s.config.rating_variants) {
    s.stage("rating:" + variant, [&] {
      scores[variant] = s.rate("rating:" + variant, s.prep.corpus.responses(), variant);
      emit(variant, scores[variant]);
    });
  }
  if (!s.config.pairwise.variants.empty()) {
    for (const auto& variant : s.config.pairwise.variants) {
      s.stage("pairwise:" + variant, [&] {
        scores[variant] = s.compare("pairwise:" + variant, s.pairwise_pool, variant);
        emit(variant, scores[variant]);
      });
    }
  }
  if (rows.empty()) return;
  s.write("table1.csv", csv);
  ojson table;
  table["bins"] = s.config.bins;
  table["ks"] = s.config.ks_binned ? "binned" : "raw";
  table["rows"] = std::move(rows);
  s.write("table1.json", table.dump(2) + "\n");
}

void run_correlation(RunState& s, const std::map<std::string, std::vector<ScoreRecord>>& scores) {
  const auto& [rating_variant, pairwise_variant] = *s.config.correlation;
  std::map<std::string, double> rating;
  for (const auto& r : scores.at(rating_variant)) rating[r.key()] = r.value;
  std::string csv = "company_id,question_id,a_list,rating,pairwise\n";
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : scores.at(pairwise_variant)) {
    auto it = rating.find(r.key());
    if (it == rating.end()) continue;
    xs.push_back(it->second);
    ys.push_back(r.value);
    csv += r.company_id + "," + std::string(question_id_name(r.question_id)) + "," + (r.a_list ? "true" : "false") +
           "," + format_double(it->second) + "," + format_double(r.value) + "\n";
  }
  std::optional<double> r2;
  try {
    r2 = pearson_r2(xs, ys);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateInput) throw;
  }
  ojson summary;
  summary["rating_variant"] = rating_variant;
  summary["pairwise_variant"] = pairwise_variant;
  summary["n"] = xs.size();
  summary["r2"] = json_or_null(r2);
  s.write("correlation.csv", csv);
  s.write("correlation.json", summary.dump(2) + "\n");
}

void run_weighting(RunState& s, const std::map<std::string, std::vector<ScoreRecord>>& scores) {
  const auto& variant = *s.config.weighting_comparison;
  const auto cmp = compare_weighting_modes(scores.at(variant), s.rating_opts);
  s.write("table4.csv", weighting_table_csv(cmp));
  ojson table;
  table["variant"] = variant;
  ojson rows = ojson::array();
  for (const auto& [method, report] : {std::pair<const char*, const SeparationReport&>{"Sampled output", cmp.sampled},
                                       {"Logprob-weighted", cmp.weighted}}) {
    auto row = separation_report_to_json(report);
    row["method"] = method;
    rows.push_back(std::move(row));
  }
  table["rows"] = std::move(rows);
  s.write("table4.json", table.dump(2) + "\n");
}

std::map<std::string, double> restrict_to(const std::map<std::string, double>& m,
                                          const std::map<std::string, double>& keys) {
  std::map<std::string, double> out;
  for (const auto& [k, v] : m) {
    if (keys.contains(k)) out.emplace(k, v);
  }
  return out;
}

void run_greenwash(RunState& s, const std::vector<DisclosureResponse>& sample) {
  const auto& gw = s.config.greenwash;
  s.write("greenwash/sample.jsonl", serialize_corpus(Corpus(sample), CorpusFormat::kJsonl));

  std::vector<std::pair<GreenwashConstraint, std::vector<GreenwashVariant>>> variant_sets;
  for (auto regime : gw.regimes) {
    const std::string name(constraint_name(regime));
    s.stage("greenwash:" + name, [&] {
      auto result = generate_greenwashed(sample, regime, s.backend, s.gw_ctx);
      std::vector<ItemError> errors;
      for (const auto& f : result.failures) {
        s.record_error("greenwash:" + name, f.original_id, f.error);
        errors.push_back(f.error);
      }
      s.check_fatal(errors, sample.size());
      s.write("greenwash/variants_" + name + ".jsonl", serialize_variants(result.variants, s.prep.corpus));
      variant_sets.emplace_back(regime, std::move(result.variants));
    });
  }

  // Rating compares against every A-List response; pairwise against the
  // A-List part of the evaluated population.
  std::vector<DisclosureResponse> a_list;
  for (const auto& r : s.prep.corpus) {
    if (r.a_list) a_list.push_back(r);
  }
  std::vector<DisclosureResponse> pool_a_list;
  for (const auto& r : s.pairwise_pool) {
    if (r.a_list) pool_a_list.push_back(r);
  }

  std::string csv = "system,variant,set,n,mean_score,mean_delta,tvd_vs_alist,ks_vs_alist,emd_vs_alist,"
                    "share_ge_0.5,share_ge_1,share_ge_1.5,share_ge_40\n";
  ojson systems = ojson::array();
  ojson regression;
  regression["unit"] = gw.length_unit == LengthUnit::kWords ? "words" : "characters";
  ojson buzz_rows = ojson::array();
  std::string buzz_csv = "id,regime,original_count,variant_count\n";
  for (const auto& [regime, variants] : variant_sets) {
    for (const auto& v : variants) {
      const auto original = count_buzzwords(s.prep.corpus.find(v.original_id)->text);
      buzz_csv += v.original_id + "," + std::string(constraint_name(regime)) + "," + std::to_string(original) +
                  "," + std::to_string(count_buzzwords(v.text)) + "\n";
    }
  }

  std::vector<std::pair<ScoringSystem, std::string>> judges = {{ScoringSystem::kNumericalRating, gw.rating_variant}};
  if (gw.pairwise_variant) judges.emplace_back(ScoringSystem::kPairwiseComparison, *gw.pairwise_variant);

  for (const auto& [system, variant] : judges) {
    const auto sys = system_label(system);
    const auto& opts = s.options_for(system);
    auto score = [&](std::string_view stage_name, std::span<const DisclosureResponse> responses) {
      return system == ScoringSystem::kNumericalRating ? s.rate(stage_name, responses, variant)
                                                       : s.compare(stage_name, responses, variant);
    };
    std::vector<ScoreRecord> alist_scores;
    std::vector<ScoreRecord> original_scores;
    s.stage("greenwash-score:" + sys + ":baseline", [&] {
      alist_scores = score("greenwash-score:" + sys + ":alist",
                           system == ScoringSystem::kNumericalRating ? a_list : pool_a_list);
      original_scores = score("greenwash-score:" + sys + ":original", sample);
    });
    s.write("greenwash/scores_alist_" + sys + ".jsonl", serialize_scores(alist_scores));
    s.write("greenwash/scores_original_" + sys + ".jsonl", serialize_scores(original_scores));
    const auto alist_values = score_values(alist_scores);
    const auto original_map = score_map(original_scores);
    const auto original_values = score_values(original_scores);

    const auto baseline = maybe_separation(alist_values, original_values, opts);
    const auto thresholds = delta_thresholds(system);
    auto share_cells = [&](const DeltaSummary* summary) {
      std::string cells;
      for (double t : {0.5, 1.0, 1.5, 40.0}) {
        cells += ",";
        if (!summary) continue;
        for (const auto& [threshold, share] : summary->share_at_least) {
          if (threshold == t) cells += format_double(share);
        }
      }
      return cells;
    };
    auto sep_cells = [&](const std::optional<SeparationReport>& r) {
      if (!r) return std::string(",,");
      return format_double(r->tvd) + "," + format_double(r->ks) + "," + format_double(r->emd_normalized);
    };
    auto sep_json = [&](ojson& row, const std::optional<SeparationReport>& r) {
      row["tvd_vs_alist"] = r ? ojson(r->tvd) : ojson(nullptr);
      row["ks_vs_alist"] = r ? ojson(r->ks) : ojson(nullptr);
      row["emd_vs_alist"] = r ? ojson(r->emd_normalized) : ojson(nullptr);
    };

    csv += sys + "," + variant + ",original," + std::to_string(original_values.size()) + "," +
           csv_field(mean_of(original_values)) + ",," + sep_cells(baseline) + share_cells(nullptr) + "\n";
    ojson sys_json;
    sys_json["system"] = sys;
    sys_json["variant"] = variant;
    sys_json["thresholds"] = thresholds;
    ojson original_row;
    original_row["n"] = original_values.size();
    original_row["mean_score"] = json_or_null(mean_of(original_values));
    sep_json(original_row, baseline);
    sys_json["original"] = std::move(original_row);
    ojson regime_rows = ojson::array();
    ojson slopes;
    std::vector<DeltaRecord> pooled;

    for (const auto& [regime, variants] : variant_sets) {
      const std::string name(constraint_name(regime));
      const auto variant_corpus = variants_as_corpus(variants, s.prep.corpus);
      std::vector<ScoreRecord> variant_scores;
      s.stage("greenwash-score:" + sys + ":" + name, [&] {
        variant_scores = score("greenwash-score:" + sys + ":" + name, variant_corpus.responses());
      });
      s.write("greenwash/scores_" + name + "_" + sys + ".jsonl", serialize_scores(variant_scores));
      const auto variant_map = score_map(variant_scores);
      std::map<std::string, double> ratios;
      for (const auto& v : variants) ratios[v.original_id] = v.length_ratio;
      const auto analysis = delta_analysis(restrict_to(original_map, variant_map),
                                           restrict_to(variant_map, original_map), system, regime, ratios);
      std::string deltas = "id,original,variant,delta,length_ratio\n";
      for (const auto& rec : analysis.records) {
        deltas += rec.id + "," + format_double(rec.original_score) + "," + format_double(rec.variant_score) + "," +
                  format_double(rec.delta) + "," + csv_field(rec.length_ratio) + "\n";
        pooled.push_back(rec);
      }
      s.write("greenwash/deltas_" + name + "_" + sys + ".csv", deltas);

      const auto values = score_values(variant_scores);
      const auto report = maybe_separation(alist_values, values, opts);
      const auto& summary = analysis.summary;
      const auto has_delta = summary.n > 0 ? std::optional<double>(summary.mean_delta) : std::nullopt;
      csv += sys + "," + variant + "," + name + "," + std::to_string(values.size()) + "," +
             csv_field(mean_of(values)) + "," + csv_field(has_delta) + "," + sep_cells(report) +
             share_cells(&summary) + "\n";
      ojson row;
      row["regime"] = name;
      row["n"] = values.size();
      row["mean_score"] = json_or_null(mean_of(values));
      row["mean_delta"] = json_or_null(has_delta);
      sep_json(row, report);
      ojson shares = ojson::array();
      for (const auto& [threshold, share] : summary.share_at_least) {
        shares.push_back(ojson{{"threshold", threshold}, {"share", share}});
      }
      row["shares"] = std::move(shares);
      regime_rows.push_back(std::move(row));

      std::optional<double> slope;
      try {
        slope = length_delta_regression(analysis.records);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateInput) throw;
      }
      slopes[name] = json_or_null(slope);
    }
    std::optional<double> pooled_slope;
    try {
      pooled_slope = length_delta_regression(pooled);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateInput) throw;
    }
    slopes["pooled"] = json_or_null(pooled_slope);
    regression["per_10_percent"][sys] = std::move(slopes);
    sys_json["regimes"] = std::move(regime_rows);
    systems.push_back(std::move(sys_json));
  }
  s.write("greenwash/table2.csv", csv);
  ojson table;
  table["sample_size"] = sample.size();
  table["seed"] = gw.seed;
  table["systems"] = std::move(systems);
  s.write("greenwash/table2.json", table.dump(2) + "\n");
  s.write("greenwash/length_regression.json", regression.dump(2) + "\n");
  s.write("greenwash/buzzwords.csv", buzz_csv);
}

void run_length_control(RunState& s, const std::vector<DisclosureResponse>& sample) {
  const auto& variant = *s.config.length_control;
  std::vector<DeltaRecord> records;
  s.stage("length-control:" + variant, [&] {
    std::vector<GenerationFailure> failures;
    records = length_doubling_control(sample, s.prep.judges.at(variant), s.prep.examples.at(variant), s.backend,
                                      s.ctx, &failures);
    std::vector<ItemError> errors;
    for (const auto& f : failures) {
      s.record_error("length-control:" + variant, f.original_id, f.error);
      errors.push_back(f.error);
    }
    s.check_fatal(errors, sample.size());
  });
  std::string csv = "id,original,doubled,delta\n";
  std::vector<double> originals;
  std::vector<double> doubled;
  std::vector<double> deltas;
  std::size_t lower = 0;
  std::size_t equal = 0;
  std::size_t higher = 0;
  for (const auto& rec : records) {
    csv += rec.id + "," + format_double(rec.original_score) + "," + format_double(rec.variant_score) + "," +
           format_double(rec.delta) + "\n";
    originals.push_back(rec.original_score);
    doubled.push_back(rec.variant_score);
    deltas.push_back(rec.delta);
    if (rec.delta < 0) ++lower;
    else if (rec.delta > 0) ++higher;
    else ++equal;
  }
  const double n = records.empty() ? 1.0 : static_cast<double>(records.size());
  ojson summary;
  summary["variant"] = variant;
  summary["n"] = records.size();
  summary["mean_original"] = json_or_null(mean_of(originals));
  summary["mean_doubled"] = json_or_null(mean_of(doubled));
  summary["mean_delta"] = json_or_null(mean_of(deltas));
  summary["share_lower"] = static_cast<double>(lower) / n;
  summary["share_equal"] = static_cast<double>(equal) / n;
  summary["share_higher"] = static_cast<double>(higher) / n;
  s.write("doubling/scores.csv", csv);
  s.write("doubling/summary.json", summary.dump(2) + "\n");
}

ojson stats_json(const BackendStats& st, const BudgetSettings& budget) {
  ojson j;
  j["requests"] = st.requests;
  j["cache_hits"] = st.cache_hits;
  j["provider_calls"] = st.provider_calls;
  j["cache_hit_rate"] = st.requests == 0 ? 1.0 : static_cast<double>(st.cache_hits) / static_cast<double>(st.requests);
  j["prompt_tokens"] = st.prompt_tokens;
  j["completion_tokens"] = st.completion_tokens;
  j["cost_usd"] = budget.cost(st.prompt_tokens, st.completion_tokens);
  return j;
}

}  // namespace

void validate_experiment_config(const ExperimentConfig& config) { prepare(config); }

ExperimentResult run_experiment(const ExperimentConfig& config, const fs::path& output_dir,
                                std::shared_ptr<Backend> provider) {
  const auto started = std::chrono::system_clock::now();
  auto prep = prepare(config);
  if (!provider) provider = make_provider(config.backend);
  BackendStack backend(std::make_shared<BudgetGuard>(std::move(provider), config.budget), config.backend);
  fs::create_directories(output_dir);

  RunState s{config, prep, output_dir, backend, {}, {}, {}, {}, {}, {}, ojson::array(), 0, {}};
  s.ctx.model_id = backend.model_id();
  s.ctx.templates = &prep.templates;
  s.ctx.allow_fallback = config.allow_fallback;
  s.ctx.both_orders = config.pairwise.both_orders;
  s.ctx.batch = {config.max_in_flight, BatchMode::kCollect};
  s.gw_ctx.model_id = backend.model_id();
  s.gw_ctx.templates = &prep.templates;
  s.gw_ctx.length_unit = config.greenwash.length_unit;
  s.gw_ctx.batch = {config.max_in_flight, BatchMode::kCollect};
  s.rating_opts = {kRatingRange, config.bins, config.ks_binned};
  s.pairwise_opts = {kPairwiseRange, config.bins, config.ks_binned};

  const bool uses_pairwise =
      !config.pairwise.variants.empty() || (config.greenwash.enabled && config.greenwash.pairwise_variant);
  if (uses_pairwise && config.pairwise.n_per_group) {
    auto subs = sample_subpopulations(prep.corpus, *config.pairwise.n_per_group, config.pairwise.seed);
    s.pairwise_pool = std::move(subs.a_list);
    s.pairwise_pool.insert(s.pairwise_pool.end(), subs.non_a_list.begin(), subs.non_a_list.end());
  } else if (uses_pairwise) {
    s.pairwise_pool = prep.corpus.responses();
  }

  s.write("config.json", config.source.dump(2) + "\n");
  std::map<std::string, std::vector<ScoreRecord>> scores;
  run_table1(s, scores);
  if (config.correlation) run_correlation(s, scores);
  if (config.weighting_comparison) run_weighting(s, scores);
  if (config.greenwash.enabled || config.length_control) {
    const auto sample = sample_non_a_list(prep.corpus, config.greenwash.n, config.greenwash.seed);
    if (config.greenwash.enabled) run_greenwash(s, sample);
    if (config.length_control) run_length_control(s, sample);
  }
  s.write("errors.jsonl", s.errors_jsonl);

  const auto finished = std::chrono::system_clock::now();
  ojson manifest;
  manifest["name"] = config.name;
  manifest["config_hash"] = config.hash();
  manifest["backend_kind"] = config.backend.kind;
  manifest["model_id"] = backend.model_id();
  manifest["cache_namespace"] = backend.cache_namespace();
  manifest["started_at"] = iso_timestamp(started);
  manifest["finished_at"] = iso_timestamp(finished);
  manifest["wall_seconds"] = std::chrono::duration<double>(finished - started).count();
  manifest["stages"] = s.stages;
  manifest["totals"] = stats_json(backend.stats(), config.budget);
  manifest["item_failures"] = s.item_failures;
  s.artifacts.push_back("manifest.json");
  manifest["artifacts"] = s.artifacts;
  write_file_atomic(output_dir / "manifest.json", manifest.dump(2) + "\n");

  return {output_dir, s.item_failures, std::move(manifest)};
}

WeightingComparison compare_weighting_modes(std::span<const ScoreRecord> records,
                                            const SeparationOptions& options) {
  std::vector<double> sampled_a;
  std::vector<double> sampled_b;
  std::vector<double> weighted_a;
  std::vector<double> weighted_b;
  for (const auto& r : records) {
    if (r.system != ScoringSystem::kNumericalRating) {
      fail(ErrorCode::kInvalidArgument, "weighting comparison needs rating records");
    }
    if (!r.sampled_value) fail(ErrorCode::kInvalidArgument, "rating record without a sampled value: " + r.key());
    (r.a_list ? sampled_a : sampled_b).push_back(*r.sampled_value);
    (r.a_list ? weighted_a : weighted_b).push_back(r.value);
  }
  return {separation_report(sampled_a, sampled_b, options), separation_report(weighted_a, weighted_b, options)};
}

std::string weighting_table_csv(const WeightingComparison& comparison) {
  std::string out = "method,tvd,ks,emd_normalized\n";
  for (const auto& [method, report] :
       {std::pair<const char*, const SeparationReport&>{"Sampled output", comparison.sampled},
        {"Logprob-weighted", comparison.weighted}}) {
    out += std::string(method) + "," + format_double(report.tvd) + "," + format_double(report.ks) + "," +
           format_double(report.emd_normalized) + "\n";
  }
  return out;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk:
      return kExitOk;
    case ErrorCode::kAuthError:
    case ErrorCode::kRateLimited:
    case ErrorCode::kProviderError:
    case ErrorCode::kTimeout:
    case ErrorCode::kCancelled:
      return kExitProvider;
    case ErrorCode::kInternal:
      return kExitInternal;
    default:
      return kExitConfig;
  }
}

}  // namespace greenjudge
