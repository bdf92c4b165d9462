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
#ifndef GREENJUDGE_CORE_CONTENT_FEATURES_HPP_
#define GREENJUDGE_CORE_CONTENT_FEATURES_HPP_

#include <string_view>

namespace greenjudge {

// Presence flags for the disclosure elements the offline mock judge keys on.
// Presence (not frequency) makes the derived quality invariant to repeating
// a response.
struct ContentFeatures {
  bool numeric_target = false;       // "reduce ... 42% ... by 2030"
  bool baseline = false;             // "2019 baseline"
  bool quantified_progress = false;  // "reduced ... 18%"
  bool concrete_plan = false;        // renewable electricity, efficiency, ...
  bool scope3 = false;
  bool commitment_language = false;  // "strongly committed", "decisively", ...

  int hard_count() const {
    return static_cast<int>(numeric_target) + static_cast<int>(baseline) +
           static_cast<int>(quantified_progress) + static_cast<int>(concrete_plan) +
           static_cast<int>(scope3);
  }
};

ContentFeatures detect_content_features(std::string_view text);

// Latent quality in [1, 5]: 1 + 0.9 per hard element + 0.35 for commitment
// language, clamped.
double content_quality(const ContentFeatures& features);
double content_quality(std::string_view text);

}  // namespace greenjudge

#endif  // GREENJUDGE_CORE_CONTENT_FEATURES_HPP_
