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
#include "core/content_features.hpp"

#include <algorithm>
#include <regex>
#include <string>

namespace greenjudge {
namespace {

std::regex re(const char* pattern) {
  return std::regex(pattern, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
}

bool has(const std::regex& pattern, const std::string& text) {
  return std::regex_search(text, pattern);
}

}  // namespace

ContentFeatures detect_content_features(std::string_view text) {
  static const std::regex target =
      re(R"(\b(reduce|cut|lower)\b[^.]*?\d+(\.\d+)?\s?%[^.]*?\bby (20\d\d)\b)");
  static const std::regex baseline = re(R"(\b(19|20)\d\d\s+(baseline|base year)\b)");
  static const std::regex progress =
      re(R"(\b(reduced|achieved|decreased|lowered)\b[^.]*?\d+(\.\d+)?\s?%)");
  static const std::regex plan = re(
      R"(\b(renewable electricity|energy efficiency|electrif\w+|heat pumps?|supplier engagement)\b)");
  static const std::regex scope3 = re(R"(\bscope 3\b)");
  static const std::regex commitment =
      re(R"(\b(strongly committed|firmly committed|decisively|intensely focused)\b)");

  const std::string s(text);
  ContentFeatures f;
  f.numeric_target = has(target, s);
  f.baseline = has(baseline, s);
  f.quantified_progress = has(progress, s);
  f.concrete_plan = has(plan, s);
  f.scope3 = has(scope3, s);
  f.commitment_language = has(commitment, s);
  return f;
}

double content_quality(const ContentFeatures& features) {
  const double q = 1.0 + 0.9 * features.hard_count() + (features.commitment_language ? 0.35 : 0.0);
  return std::clamp(q, 1.0, 5.0);
}

double content_quality(std::string_view text) {
  return content_quality(detect_content_features(text));
}

}  // namespace greenjudge
