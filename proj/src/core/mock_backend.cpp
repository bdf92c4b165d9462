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
#include "core/mock_backend.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "core/content_features.hpp"
#include "core/error.hpp"
#include "core/util.hpp"

namespace greenjudge {

using nlohmann::json;

namespace {

std::vector<TokenPosition> parse_positions(const json& j) {
  std::vector<TokenPosition> out;
  for (const auto& pos : j) {
    TokenPosition p;
    for (const auto& alt : pos.at("top")) {
      p.alternatives.entries.push_back({alt.at(0).get<std::string>(), alt.at(1).get<double>()});
    }
    validate_distribution(p.alternatives);
    if (pos.contains("token")) {
      p.token = pos["token"].get<std::string>();
    } else if (!p.alternatives.entries.empty()) {
      p.token = std::max_element(p.alternatives.entries.begin(), p.alternatives.entries.end(),
                                 [](const auto& a, const auto& b) { return a.probability < b.probability; })
                    ->token;
    }
    out.push_back(std::move(p));
  }
  return out;
}

json positions_json(const std::vector<TokenPosition>& positions) {
  json out = json::array();
  for (const auto& p : positions) {
    json top = json::array();
    for (const auto& e : p.alternatives.entries) top.push_back({e.token, e.probability});
    out.push_back({{"token", p.token}, {"top", top}});
  }
  return out;
}

template <typename E>
E parse_enum(const json& j, const char* key, std::initializer_list<std::pair<const char*, E>> values, E fallback) {
  if (!j.contains(key)) return fallback;
  const auto name = j[key].get<std::string>();
  for (const auto& [n, v] : values) {
    if (name == n) return v;
  }
  fail(ErrorCode::kConfigError, std::string("invalid mock ") + key + " '" + name + "'");
}

// Text between the last <tag> and the following </tag>, without the
// newlines the templates put around it.
std::optional<std::string> extract_block(std::string_view content, std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  const auto start = content.rfind(open);
  if (start == std::string_view::npos) return std::nullopt;
  const auto body_start = start + open.size();
  const auto end = content.find(close, body_start);
  if (end == std::string_view::npos) return std::nullopt;
  std::string_view body = content.substr(body_start, end - body_start);
  if (!body.empty() && body.front() == '\n') body.remove_prefix(1);
  if (!body.empty() && body.back() == '\n') body.remove_suffix(1);
  return std::string(body);
}

TokenPosition certain(std::string token) {
  TokenPosition p;
  p.alternatives.entries.push_back({token, 1.0});
  p.token = std::move(token);
  return p;
}

TokenPosition answer_position(std::vector<TokenProb> entries, const std::string& prefix) {
  entries.erase(std::remove_if(entries.begin(), entries.end(), [](const auto& e) { return !(e.probability > 0.0); }),
                entries.end());
  TokenPosition p;
  // Ties resolve to the earlier entry.
  const auto best = std::max_element(entries.begin(), entries.end(),
                                     [](const auto& a, const auto& b) { return a.probability < b.probability; });
  p.token = prefix + best->token;
  for (auto& e : entries) p.alternatives.entries.push_back({prefix + e.token, e.probability});
  return p;
}

std::vector<TokenPosition> explanation_tokens(const std::string& sentence) {
  std::vector<TokenPosition> out;
  bool first = true;
  for (auto word : split_whitespace(sentence)) {
    out.push_back(certain((first ? "" : " ") + std::string(word)));
    first = false;
  }
  out.push_back(certain("\n"));
  out.push_back(certain("FINAL"));
  out.push_back(certain(":"));
  return out;
}

CompletionResponse finish(std::vector<TokenPosition> tokens, const CompletionRequest& request) {
  CompletionResponse r;
  for (const auto& t : tokens) r.text += t.token;
  r.usage.completion_tokens = tokens.size();
  std::uint64_t words = 0;
  for (const auto& m : request.messages) words += count_words(m.content);
  r.usage.prompt_tokens = words;
  if (request.want_logprobs) {
    for (auto& t : tokens) {
      if (t.alternatives.entries.size() > request.top_logprobs) t.alternatives.entries.resize(request.top_logprobs);
    }
    r.per_position_logprobs = std::move(tokens);
  }
  return r;
}

std::vector<TokenPosition> word_tokens(const std::string& text) {
  std::vector<TokenPosition> out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t j = i;
    while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    out.push_back(certain(text.substr(i, j - i)));
    i = j;
  }
  return out;
}

bool contains_icase(std::string_view haystack, std::string_view needle) {
  return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

bool replace_first(std::string& text, std::string_view from, std::string_view to) {
  const auto pos = text.find(from);
  if (pos == std::string::npos) return false;
  text.replace(pos, from.size(), to);
  return true;
}

}  // namespace

MockOptions MockOptions::from_json(const json& j) {
  MockOptions o;
  o.judge = parse_enum<MockJudge>(j, "judge",
                                  {{"content", MockJudge::kContent},
                                   {"symmetric", MockJudge::kSymmetric},
                                   {"position_bias", MockJudge::kPositionBias}},
                                  o.judge);
  o.mass = parse_enum<MockMass>(j, "mass", {{"point", MockMass::kPoint}, {"spread", MockMass::kSpread}}, o.mass);
  o.greenwasher = parse_enum<MockGreenwasher>(j, "greenwasher",
                                              {{"rewrite", MockGreenwasher::kRewrite},
                                               {"echo", MockGreenwasher::kEcho},
                                               {"empty", MockGreenwasher::kEmpty}},
                                              o.greenwasher);
  o.latency = std::chrono::milliseconds(j.value("latency_ms", 0));
  if (j.contains("fail_on")) o.fail_on = j["fail_on"].get<std::vector<std::string>>();
  if (j.contains("fixtures")) {
    json fixtures = j["fixtures"];
    if (fixtures.is_string()) {
      const auto path = fixtures.get<std::string>();
      try {
        fixtures = json::parse(read_file(path));
      } catch (const json::exception& e) {
        fail(ErrorCode::kConfigError, "bad fixture table " + path + ": " + e.what());
      }
      if (fixtures.is_object()) fixtures = fixtures.value("fixtures", json::array());
    }
    try {
      for (const auto& f : fixtures) {
        MockFixture fx;
        fx.contains = f.value("contains", std::string());
        fx.text = f.value("text", std::string());
        fx.error = f.value("error", std::string());
        if (f.contains("logprobs")) {
          fx.logprobs = parse_positions(f["logprobs"]);
        } else if (f.contains("top")) {
          fx.logprobs = parse_positions(json::array({json{{"top", f["top"]}}}));
        }
        if (fx.text.empty() && !fx.logprobs.empty()) {
          for (const auto& p : fx.logprobs) fx.text += p.token;
        }
        o.fixtures.push_back(std::move(fx));
      }
    } catch (const json::exception& e) {
      fail(ErrorCode::kConfigError, std::string("bad mock fixture: ") + e.what());
    }
  }
  return o;
}

json MockOptions::identity() const {
  json fixtures_json = json::array();
  for (const auto& f : fixtures) {
    fixtures_json.push_back({{"contains", f.contains}, {"text", f.text}, {"error", f.error},
                             {"logprobs", positions_json(f.logprobs)}});
  }
  return json{{"judge", static_cast<int>(judge)},
              {"mass", static_cast<int>(mass)},
              {"greenwasher", static_cast<int>(greenwasher)},
              {"fail_on", fail_on},
              {"fixtures", fixtures_json}};
}

MockBackend::MockBackend(MockOptions options)
    : options_(std::move(options)), namespace_("mock:" + sha256_hex(options_.identity().dump()).substr(0, 16)) {}

std::string mock_greenwash(std::string_view original, GreenwashConstraint constraint) {
  std::string text(original);
  if (!replace_first(text, "We aim to", "We are strongly committed to") &&
      !replace_first(text, "We intend to", "We are firmly committed to") &&
      !replace_first(text, "we set a target", "we decisively set a target") &&
      !replace_first(text, "We ", "Decisively, we ")) {
    text = "We are strongly committed to climate action. " + text;
  }
  if (constraint == GreenwashConstraint::kFixedAccuracyAndLength) return text;
  text += " We are strongly committed to developing a roadmap of energy efficiency measures that "
          "supports these goals and our environmental stewardship.";
  if (constraint == GreenwashConstraint::kFixedAccuracy) return text;
  text += " Against our 2019 baseline, we reduced our Scope 1 and 2 emissions by 12% last year and "
          "achieved a 35% share of renewable electricity.";
  return text;
}

CompletionResponse MockBackend::complete(const CompletionRequest& request) {
  validate_request(request);
  ++calls_;
  if (options_.latency.count() > 0) std::this_thread::sleep_for(options_.latency);

  std::string all;
  for (const auto& m : request.messages) all += m.content + "\n";
  for (const auto& trigger : options_.fail_on) {
    if (all.find(trigger) != std::string::npos) {
      throw ProviderFailure(ErrorCode::kProviderError, "injected mock failure (" + trigger + ")", 500);
    }
  }
  for (const auto& f : options_.fixtures) {
    if (all.find(f.contains) == std::string::npos) continue;
    if (f.error == "provider") throw ProviderFailure(ErrorCode::kProviderError, "scripted provider error", 500);
    if (f.error == "auth") throw ProviderFailure(ErrorCode::kAuthError, "scripted auth error", 401);
    if (f.error == "rate_limited") throw ProviderFailure(ErrorCode::kRateLimited, "scripted rate limit", 429);
    if (f.error == "timeout") throw ProviderFailure(ErrorCode::kTimeout, "scripted timeout", 0);
    CompletionResponse r;
    r.text = f.text;
    if (request.want_logprobs) r.per_position_logprobs = f.logprobs;
    r.usage.completion_tokens = f.logprobs.empty() ? count_words(f.text) : f.logprobs.size();
    for (const auto& m : request.messages) r.usage.prompt_tokens += count_words(m.content);
    return r;
  }

  const std::string& user = request.messages.back().content;
  const bool cot = user.find(kFinalMarker) != std::string::npos;

  if (auto original = extract_block(user, "original_response")) {
    std::string text;
    switch (options_.greenwasher) {
      case MockGreenwasher::kEcho: text = *original; break;
      case MockGreenwasher::kEmpty: text.clear(); break;
      case MockGreenwasher::kRewrite: {
        auto regime = GreenwashConstraint::kUnconstrained;
        if (contains_icase(user, "fictitious")) regime = GreenwashConstraint::kFixedAccuracy;
        if (contains_icase(user, "preserve the length")) regime = GreenwashConstraint::kFixedAccuracyAndLength;
        text = mock_greenwash(*original, regime);
        break;
      }
    }
    return finish(word_tokens(text), request);
  }

  auto text_a = extract_block(user, "response_a");
  auto text_b = extract_block(user, "response_b");
  if (text_a && text_b) {
    std::vector<TokenProb> verdict;
    const double qa = content_quality(*text_a);
    const double qb = content_quality(*text_b);
    switch (options_.judge) {
      case MockJudge::kSymmetric:
        verdict = {{"A", 0.5}, {"B", 0.5}};
        break;
      case MockJudge::kPositionBias:
        verdict = options_.mass == MockMass::kPoint ? std::vector<TokenProb>{{"A", 1.0}}
                                                    : std::vector<TokenProb>{{"A", 0.9}, {"B", 0.1}};
        break;
      case MockJudge::kContent:
        if (options_.mass == MockMass::kPoint) {
          verdict = {{qb > qa ? "B" : "A", 1.0}};
        } else {
          const double pa = 1.0 / (1.0 + std::exp(-2.0 * (qa - qb)));
          verdict = {{"A", pa}, {"B", 1.0 - pa}};
        }
        break;
    }
    std::vector<TokenPosition> tokens;
    if (cot) {
      tokens = explanation_tokens("Response A shows " + format_double(qa) + " and response B shows " +
                                  format_double(qb) + " on the disclosure checklist.");
    }
    tokens.push_back(answer_position(std::move(verdict), cot ? " " : ""));
    return finish(std::move(tokens), request);
  }

  if (auto text = extract_block(user, "response")) {
    const auto features = detect_content_features(*text);
    const double q = content_quality(features);
    std::vector<TokenProb> digits;
    if (options_.mass == MockMass::kPoint) {
      digits = {{std::to_string(static_cast<int>(std::floor(q + 0.5))), 1.0}};
    } else {
      const double lo = std::floor(q);
      const double frac = q - lo;
      digits.push_back({std::to_string(static_cast<int>(lo)), 1.0 - frac});
      if (frac > 1e-12) digits.push_back({std::to_string(static_cast<int>(lo) + 1), frac});
    }
    std::vector<TokenPosition> tokens;
    if (cot) {
      tokens = explanation_tokens("The response covers " + std::to_string(features.hard_count()) +
                                  " of five key disclosure elements.");
    }
    tokens.push_back(answer_position(std::move(digits), cot ? " " : ""));
    return finish(std::move(tokens), request);
  }

  throw ProviderFailure(ErrorCode::kProviderError, "mock backend cannot interpret the request", 400);
}

std::shared_ptr<Backend> make_mock_backend(const BackendConfig& config) {
  return std::make_shared<MockBackend>(MockOptions::from_json(config.options));
}

}  // namespace greenjudge
