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
// Acceptance checks, one PASS/FAIL line per criterion. Everything except the
// live smoke test runs offline on the mock backend.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "core/experiment.hpp"
#include "core/mock_backend.hpp"
#include "core/openai_backend.hpp"
#include "core/scoring.hpp"
#include "core/synthetic.hpp"
#include "core/util.hpp"
#include "oracles.hpp"

namespace gj = greenjudge;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
  enum Kind { kPass, kFail, kSkip } kind = kPass;
  std::string detail;
};

// Collects failed expectations; the first few are reported.
struct Checker {
  std::vector<std::string> problems;

  void expect(bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  }
  Outcome outcome(std::string summary) const {
    if (problems.empty()) return {Outcome::kPass, std::move(summary)};
    std::string detail = std::to_string(problems.size()) + " problem(s): " + problems.front();
    for (std::size_t i = 1; i < problems.size() && i < 3; ++i) detail += "; " + problems[i];
    return {Outcome::kFail, detail};
  }
};

class ScratchDir {
 public:
  ScratchDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("greenjudge_acceptance_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::map<std::string, std::string> artifacts_except_manifest(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir).generic_string();
    if (rel != "manifest.json") out[rel] = gj::read_file(entry.path());
  }
  return out;
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

gj::DisclosureResponse response(std::string company, std::string text, bool a_list) {
  gj::DisclosureResponse r;
  r.company_id = std::move(company);
  r.question_id = gj::QuestionId::kQ4_1a;
  r.text = std::move(text);
  r.a_list = a_list;
  return r;
}

// Backend answering through a callback.
class FnBackend : public gj::Backend {
 public:
  using Fn = std::function<gj::CompletionResponse(const gj::CompletionRequest&)>;
  explicit FnBackend(Fn fn) : fn_(std::move(fn)) {}
  gj::CompletionResponse complete(const gj::CompletionRequest& request) override { return fn_(request); }
  std::string cache_namespace() const override { return "acceptance-fn"; }

 private:
  Fn fn_;
};

// 1. Separation metrics against brute-force references.
Outcome metric_oracles() {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(20240601);
  const std::size_t bin_cases[] = {25, 2, 1};
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t bins = bin_cases[trial % 3];
    const auto p = gj::oracle::random_histogram(gen, bins);
    const auto q = gj::oracle::random_histogram(gen, bins);
    const double tvd = gj::tvd(p, q);
    const double tvd_ref = bins <= 12 ? gj::oracle::tvd_by_subsets(p, q) : gj::oracle::tvd_by_excess(p, q);
    const double emd = gj::emd_normalized(p, q);
    const double emd_ref = gj::oracle::emd_by_transport(p, q);

    const std::size_t na = 1 + gen() % 60;
    const std::size_t nb = 1 + gen() % 60;
    const auto a = gj::oracle::random_scores(gen, na, 1.0, 5.0);
    const auto b = gj::oracle::random_scores(gen, nb, 1.0, 5.0);
    const double ks = gj::ks_statistic(a, b);
    const double ks_ref = gj::oracle::ks_by_counting(a, b);

    const auto ha = gj::bin_scores(a, gj::kRatingRange, bins);
    const auto hb = gj::bin_scores(b, gj::kRatingRange, bins);
    const auto ha_ref = gj::oracle::bin_by_intervals(a, 1.0, 5.0, bins);
    const auto hb_ref = gj::oracle::bin_by_intervals(b, 1.0, 5.0, bins);
    double bin_err = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
      bin_err = std::max({bin_err, std::abs(ha[i] - ha_ref[i]), std::abs(hb[i] - hb_ref[i])});
    }
    const auto report = gj::separation_report(a, b, {gj::kRatingRange, bins, false});
    const double report_err =
        std::max({std::abs(report.tvd - gj::oracle::tvd_by_excess(ha_ref, hb_ref)),
                  std::abs(report.ks - ks_ref),
                  std::abs(report.emd_normalized - gj::oracle::emd_by_transport(ha_ref, hb_ref))});

    const double err = std::max({std::abs(tvd - tvd_ref), std::abs(emd - emd_ref), std::abs(ks - ks_ref), bin_err,
                                 report_err});
    worst = std::max(worst, err);
    c.expect(err <= 1e-12, "trial " + std::to_string(trial) + " (" + std::to_string(bins) + " bins) error " +
                               fmt(err));
  }
  const double elapsed = seconds_since(t0);
  c.expect(elapsed < 10.0, "took " + fmt(elapsed) + " s");
  return c.outcome("1000 pairs over 25/2/1 bins, max error " + fmt(worst) + ", " + fmt(elapsed) + " s");
}

// 2. Weighted rating over every digit-mass grid point.
Outcome weighted_rating_grid() {
  Checker c;
  std::size_t points = 0;
  double worst = 0.0;
  int k[5];
  for (k[0] = 0; k[0] <= 10; ++k[0]) {
    for (k[1] = 0; k[1] <= 10; ++k[1]) {
      for (k[2] = 0; k[2] <= 10; ++k[2]) {
        for (k[3] = 0; k[3] <= 10; ++k[3]) {
          for (k[4] = 0; k[4] <= 10; ++k[4]) {
            int total = 0;
            int weighted = 0;
            gj::DigitMass mass;
            for (int d = 1; d <= 5; ++d) {
              total += k[d - 1];
              weighted += d * k[d - 1];
              if (k[d - 1] > 0) mass[d] = k[d - 1] / 10.0;
            }
            if (total == 0) continue;
            ++points;
            // Integer arithmetic on tenths: exact up to the final division.
            const double expected = static_cast<double>(weighted) / static_cast<double>(total);
            const double err = std::abs(gj::weighted_rating(mass) - expected);
            worst = std::max(worst, err);
            c.expect(err <= 1e-12, "grid point error " + fmt(err));
          }
        }
      }
    }
  }
  for (int d = 1; d <= 5; ++d) {
    for (double p : {1.0, 0.1, 0.37}) {
      c.expect(gj::weighted_rating({{d, p}}) == static_cast<double>(d), "point mass on " + std::to_string(d));
    }
  }
  return c.outcome(std::to_string(points) + " grid points, max error " + fmt(worst) + ", point masses exact");
}

// 3. Pairwise arithmetic and order handling.
Outcome pairwise_arithmetic() {
  Checker c;
  const auto candidate = response("candidate", "CANDIDATE disclosure", true);
  std::vector<gj::DisclosureResponse> pool;
  for (int i = 0; i < 20; ++i) pool.push_back(response("opp" + std::to_string(100 + i), "opponent " + std::to_string(i) + " text", false));
  // The candidate beats opponents 0..14 and loses to 15..19, in either slot.
  FnBackend judge([](const gj::CompletionRequest& r) {
    const auto& user = r.messages.back().content;
    const bool cand_in_a = user.find("CANDIDATE") < user.find("<response_b>");
    const auto opp = user.find("opponent ");
    const bool cand_wins = std::stoi(user.substr(opp + 9)) < 15;
    gj::CompletionResponse out;
    out.text = cand_in_a == cand_wins ? "A" : "B";
    return out;
  });
  const auto pairwise = gj::JudgePromptConfig::from_variant("pairwise");
  for (bool both : {false, true}) {
    gj::ScoringContext ctx;
    ctx.both_orders = both;
    const auto score = gj::score_pairwise(candidate, pool, 20, 1, pairwise, judge, ctx);
    c.expect(score.value == 75.0, std::string("15/5 gave ") + fmt(score.value) + (both ? " (both orders)" : ""));
  }

  const auto corpus = gj::generate_synthetic_corpus({15, 15, 12});
  std::size_t candidates = 0;
  for (auto kind : {gj::MockJudge::kSymmetric, gj::MockJudge::kPositionBias}) {
    for (auto mass : {gj::MockMass::kPoint, gj::MockMass::kSpread}) {
      gj::MockOptions options;
      options.judge = kind;
      options.mass = mass;
      gj::MockBackend backend(options);
      for (const char* v : {"pairwise", "pairwise.cot"}) {
        gj::ScoringContext ctx;
        ctx.both_orders = kind == gj::MockJudge::kPositionBias || mass == gj::MockMass::kPoint;
        const auto scored = gj::score_pairwise_all(corpus.responses(), corpus.responses(), 10, 4,
                                                   gj::JudgePromptConfig::from_variant(v), backend, ctx);
        for (const auto& s : scored) {
          ++candidates;
          c.expect(s.ok() && s.score->value == 50.0,
                   std::string(kind == gj::MockJudge::kSymmetric ? "symmetric" : "position-bias") + " " + v + " " +
                       s.response.key() + " gave " + (s.ok() ? fmt(s.score->value) : s.error->message));
        }
      }
    }
  }
  return c.outcome("15/5 over k=20 is 75.0; " + std::to_string(candidates) +
                   " symmetric and position-bias candidates all 50.0");
}

json separation_config(std::size_t max_in_flight) {
  return json{{"name", "separation"},
              {"corpus", {{"synthetic", {{"high", 50}, {"low", 50}, {"seed", 2024}}}}},
              {"reference_seed", 1},
              {"backend", {{"kind", "mock"}, {"judge", "content"}}},
              {"batch", {{"max_in_flight", max_in_flight}}},
              {"rating", {{"variants", {"rating.one"}}}}};
}

// 4. Two-tier corpus, content-keyed mock judge.
Outcome end_to_end_separation() {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  ScratchDir dir;
  std::vector<std::map<std::string, std::string>> runs;
  double tvd = -1.0;
  int i = 0;
  for (std::size_t in_flight : {1, 8, 8}) {
    const auto out = dir.path() / ("run" + std::to_string(i++));
    gj::run_experiment(gj::ExperimentConfig::from_json(separation_config(in_flight)), out);
    auto artifacts = artifacts_except_manifest(out);
    artifacts.erase("config.json");
    const auto table = json::parse(artifacts.at("table1.json"));
    tvd = table.at("rows").at(0).at("tvd").get<double>();
    c.expect(tvd >= 0.8, "TVD " + fmt(tvd) + " < 0.8");
    runs.push_back(std::move(artifacts));
  }
  c.expect(runs[0] == runs[1], "max_in_flight 1 and 8 differ");
  c.expect(runs[1] == runs[2], "reruns differ");
  const double elapsed = seconds_since(t0);
  c.expect(elapsed < 30.0, "took " + fmt(elapsed) + " s");
  return c.outcome("50/50 corpus, TVD " + fmt(tvd) + ", identical across reruns and max_in_flight {1, 8}, " +
                   fmt(elapsed) + " s");
}

// 5. Greenwash regimes through the experiment runner.
Outcome greenwash_shape() {
  Checker c;
  ScratchDir dir;
  const json j{{"name", "greenwash"},
               {"corpus", {{"synthetic", {{"high", 60}, {"low", 140}, {"seed", 77}}}}},
               {"reference_seed", 2},
               {"backend", {{"kind", "mock"}}},
               {"greenwash", {{"n", 100}, {"seed", 13}, {"rating_variant", "rating.one"}}}};
  const auto out = dir.path() / "run";
  const auto result = gj::run_experiment(gj::ExperimentConfig::from_json(j), out);
  c.expect(result.item_failures == 0, std::to_string(result.item_failures) + " item failures");

  for (auto regime : gj::kAllConstraints) {
    const auto name = std::string(gj::constraint_name(regime));
    const auto variants = gj::load_variants(out / "greenwash" / ("variants_" + name + ".jsonl"));
    c.expect(variants.size() == 100, name + " has " + std::to_string(variants.size()) + " variants");
    const auto corpus = gj::load_corpus(out / "greenwash" / ("variants_" + name + ".jsonl"));
    c.expect(corpus.size() == 100, name + " variant file is not a 100-row corpus");
  }
  const auto csv = gj::read_file(out / "greenwash" / "table2.csv");
  c.expect(line_count(csv) == 1 + 1 + 3, "table2.csv has " + std::to_string(line_count(csv)) + " lines");
  c.expect(csv.find("share_ge_0.5,share_ge_1,share_ge_1.5") != std::string::npos, "table2.csv lacks share columns");

  const auto table = json::parse(gj::read_file(out / "greenwash" / "table2.json"));
  const auto& rating = table.at("systems").at(0);
  std::vector<double> means;
  for (const auto& row : rating.at("regimes")) {
    means.push_back(row.at("mean_delta").get<double>());
    c.expect(row.at("shares").size() == 3, "rating shares need three thresholds");
    c.expect(row.at("n").get<std::size_t>() == 100, "regime row n != 100");
  }
  c.expect(means.size() == 3, "three regime rows");
  if (means.size() == 3) {
    c.expect(means[0] >= means[1] && means[1] >= means[2],
             "mean deltas " + fmt(means[0]) + ", " + fmt(means[1]) + ", " + fmt(means[2]) + " out of order");
  }

  // delta_analysis(x, x) is zero for every record and share.
  const auto originals = gj::score_map(gj::load_scores(out / "greenwash" / "scores_original_rating.jsonl"));
  const auto self = gj::delta_analysis(originals, originals, gj::ScoringSystem::kNumericalRating, std::nullopt);
  bool zero = self.summary.mean_delta == 0.0;
  for (const auto& r : self.records) zero = zero && r.delta == 0.0;
  for (const auto& [t, share] : self.summary.share_at_least) zero = zero && share == 0.0;
  c.expect(zero, "delta_analysis(x, x) is not zero");
  std::string order;
  for (double m : means) order += (order.empty() ? "" : " >= ") + fmt(m);
  return c.outcome("3 x 100 variants, table2 with shares, mean deltas " + order + ", self-delta zero");
}

// 6. Length-doubling control and the regression coefficient.
Outcome length_control() {
  Checker c;
  gj::MockBackend backend(gj::MockOptions{});
  const auto corpus = gj::generate_synthetic_corpus({40, 160, 31});
  const auto sample = gj::sample_non_a_list(corpus, 100, 8);
  const auto config = gj::JudgePromptConfig::from_variant("rating.one");
  const auto examples = gj::select_reference_examples(config.shots, gj::synthetic_reference_examples(8));
  const auto records = gj::length_doubling_control(sample, config, examples, backend, gj::ScoringContext{});
  c.expect(records.size() == 100, std::to_string(records.size()) + " records");
  std::size_t identical = 0;
  for (const auto& r : records) {
    if (r.delta == 0.0 && r.original_score == r.variant_score) ++identical;
  }
  c.expect(identical == records.size(), std::to_string(records.size() - identical) + " doubled items moved");

  // delta = 1.25 * (ratio - 1): 0.125 points per 10% length increase.
  std::vector<gj::DeltaRecord> fixture;
  for (int i = 0; i < 41; ++i) {
    gj::DeltaRecord r;
    r.length_ratio = 0.5 + 0.025 * i;
    r.delta = 1.25 * (*r.length_ratio - 1.0);
    fixture.push_back(r);
  }
  const double slope = gj::length_delta_regression(fixture);
  c.expect(std::abs(slope - 0.125) <= 1e-9, "slope " + fmt(slope));
  return c.outcome(std::to_string(identical) + "/100 doubled items identical, slope " + fmt(slope) + " per 10%");
}

// 7. Warm-cache reruns.
Outcome cache_determinism() {
  Checker c;
  ScratchDir dir;
  std::vector<std::pair<std::string, gj::ExperimentConfig>> configs;
  auto shipped = gj::ExperimentConfig::load(fs::path(GREENJUDGE_SOURCE_DIR) / "configs" / "mock_full.json");
  configs.emplace_back("mock_full", shipped);
  configs.emplace_back("separation", gj::ExperimentConfig::from_json(separation_config(8)));
  std::size_t files = 0;
  for (auto& [name, config] : configs) {
    config.backend.cache_dir = (dir.path() / ("cache_" + name)).string();
    const auto cold = gj::run_experiment(config, dir.path() / (name + "_cold"));
    const auto warm = gj::run_experiment(config, dir.path() / (name + "_warm"));
    const auto calls = warm.manifest.at("totals").at("provider_calls").get<std::uint64_t>();
    c.expect(calls == 0, name + " warm rerun made " + std::to_string(calls) + " provider calls");
    c.expect(cold.manifest.at("totals").at("provider_calls").get<std::uint64_t>() > 0, name + " cold run made no calls");
    const auto a = artifacts_except_manifest(dir.path() / (name + "_cold"));
    const auto b = artifacts_except_manifest(dir.path() / (name + "_warm"));
    c.expect(a == b, name + " warm rerun changed output bytes");
    files += a.size();
  }
  return c.outcome("2 experiments, " + std::to_string(files) + " artifacts byte-identical, 0 warm provider calls");
}

// 8. Sampled vs logprob-weighted report.
Outcome weighting_harness() {
  Checker c;
  ScratchDir dir;
  std::map<std::string, std::vector<std::vector<std::string>>> tables;
  for (const char* mass : {"point", "spread"}) {
    const json j{{"name", std::string("weighting_") + mass},
                 {"corpus", {{"synthetic", {{"high", 40}, {"low", 60}, {"seed", 5}}}}},
                 {"reference_seed", 3},
                 {"backend", {{"kind", "mock"}, {"mass", mass}}},
                 {"rating", {{"variants", {"rating.one.scale"}}}},
                 {"weighting_comparison", "rating.one.scale"}};
    const auto out = dir.path() / mass;
    gj::run_experiment(gj::ExperimentConfig::from_json(j), out);
    std::istringstream csv(gj::read_file(out / "table4.csv"));
    std::string line;
    std::vector<std::vector<std::string>> rows;
    std::getline(csv, line);
    c.expect(line == "method,tvd,ks,emd_normalized", std::string(mass) + " header: " + line);
    while (std::getline(csv, line)) {
      std::vector<std::string> cells;
      std::istringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      rows.push_back(cells);
    }
    c.expect(rows.size() == 2, std::string(mass) + " table has " + std::to_string(rows.size()) + " rows");
    if (rows.size() == 2) {
      c.expect(rows[0][0] == "Sampled output" && rows[1][0] == "Logprob-weighted", "row labels");
    }
    tables[mass] = rows;
  }
  auto metrics = [](const std::vector<std::string>& row) { return std::vector<std::string>(row.begin() + 1, row.end()); };
  const auto& point = tables["point"];
  const auto& spread = tables["spread"];
  if (point.size() == 2 && spread.size() == 2) {
    c.expect(metrics(point[0]) == metrics(point[1]), "point-mass rows differ");
    c.expect(metrics(spread[0]) != metrics(spread[1]), "spread-mass rows are identical");
  }
  return c.outcome("two-row table; point-mass rows identical, spread-mass rows differ");
}

// 9. One rating and one pairwise call against a live endpoint.
Outcome live_smoke() {
  const char* key = std::getenv("OPENAI_API_KEY");
  if (!key || !*key) return {Outcome::kSkip, "OPENAI_API_KEY not set"};
  Checker c;
  gj::BackendConfig config;
  config.kind = "openai";
  if (const char* model = std::getenv("GREENJUDGE_LIVE_MODEL")) config.model_id = model;
  gj::BackendStack backend(config);
  gj::ScoringContext ctx;
  ctx.model_id = backend.model_id();
  ctx.allow_fallback = false;

  const auto strong = response("live-strong", gj::synthetic_exemplar_text(5, 1), true);
  const auto weak = response("live-weak", gj::synthetic_exemplar_text(3, 2), false);
  const auto rating_cfg = gj::JudgePromptConfig::from_variant("rating.one");
  const auto examples = gj::select_reference_examples(rating_cfg.shots, gj::synthetic_reference_examples(1));
  const auto request = gj::make_rating_request(rating_cfg, examples, strong, ctx);
  c.expect(request.temperature == 0.0 && request.top_logprobs == 20, "rating request is not temperature 0 / top 20");
  const auto rating = gj::score_rating(strong, rating_cfg, examples, backend, ctx);
  c.expect(!rating.fallback_used, "rating used the text fallback");
  c.expect(rating.value >= 1.0 && rating.value <= 5.0, "rating " + fmt(rating.value) + " outside [1, 5]");

  const auto pw_cfg = gj::JudgePromptConfig::from_variant("pairwise");
  const auto pw_request = gj::make_pairwise_request(pw_cfg, strong, weak, ctx);
  const auto completion = backend.complete(pw_request);
  c.expect(!completion.per_position_logprobs.empty(), "pairwise completion carried no logprobs");
  const double p = gj::pairwise_p_win(completion, gj::AnswerLocator::for_config(pw_cfg), gj::Slot::kA);
  c.expect(p >= 0.0 && p <= 1.0, "p_win " + fmt(p) + " outside [0, 1]");
  return c.outcome("model " + backend.model_id() + ", rating " + fmt(rating.value) + ", p_win " + fmt(p));
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"metric oracle equivalence", metric_oracles},
      {"weighted-rating exactness", weighted_rating_grid},
      {"pairwise arithmetic", pairwise_arithmetic},
      {"end-to-end separation", end_to_end_separation},
      {"greenwash pipeline shape", greenwash_shape},
      {"length-doubling control", length_control},
      {"cache determinism", cache_determinism},
      {"logprob-vs-sampled harness", weighting_harness},
      {"live smoke test", live_smoke},
  };
  int failed = 0;
  int number = 0;
  for (const auto& [name, run] : criteria) {
    ++number;
    Outcome outcome;
    try {
      outcome = run();
    } catch (const std::exception& e) {
      outcome = {Outcome::kFail, std::string("exception: ") + e.what()};
    }
    const char* tag = outcome.kind == Outcome::kPass ? "PASS" : outcome.kind == Outcome::kFail ? "FAIL" : "SKIP";
    if (outcome.kind == Outcome::kFail) ++failed;
    std::printf("%s criterion %d (%s): %s\n", tag, number, name, outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
