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
#ifndef GREENJUDGE_CORE_SYNTHETIC_HPP_
#define GREENJUDGE_CORE_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>
#include <string>

#include "core/corpus.hpp"

namespace greenjudge {

struct SyntheticSpec {
  std::size_t high = 0;
  std::size_t low = 0;
  std::uint64_t seed = 0;
};

// Templated fixture corpus. High-tier responses state a numeric target plus
// at least three of {baseline, quantified progress, concrete plan, Scope 3}
// and are labeled A-List; low-tier responses carry at most one such element.
Corpus generate_synthetic_corpus(const SyntheticSpec& spec);

// A synthetic response written to merit the given anchor score (3 or 5).
std::string synthetic_exemplar_text(int anchor_score, std::uint64_t seed);

}  // namespace greenjudge

#endif  // GREENJUDGE_CORE_SYNTHETIC_HPP_
