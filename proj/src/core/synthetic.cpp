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
#include "core/synthetic.hpp"

#include <array>
#include <cstdio>
#include <string_view>
#include <vector>

#include "core/error.hpp"
#include "core/util.hpp"

namespace greenjudge {
namespace {

constexpr std::array<std::string_view, 12> kNames = {
    "Nordhavn Materials", "Alpenrail Logistics", "Brabant Foods",    "Castellan Energy",
    "Danube Chemicals",   "Elbe Packaging",      "Fjordline Shipping", "Garonne Textiles",
    "Helvetia Instruments", "Iberia Cement",     "Jutland Retail",   "Loire Pharma"};

constexpr std::array<std::string_view, 3> kPlans = {
    "The main levers are the switch to renewable electricity at all production sites and "
    "energy efficiency upgrades.",
    "We are replacing gas boilers with heat pumps and electrifying our vehicle fleet.",
    "Our supplier engagement programme and energy efficiency investments underpin the plan."};

constexpr std::array<std::string_view, 7> kFiller = {
    "We recognise that climate change is an important issue for our business.",
    "The company is currently reviewing how emissions could be managed in the future.",
    "No quantified target has been approved by the board at this stage.",
    "We aim to become more sustainable over the coming years.",
    "Further information will be provided in future reporting cycles.",
    "Our environmental policy sets out general principles for responsible operations.",
    "We intend to reduce our emissions where this is commercially feasible."};

int between(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(hi - lo + 1)));
}

template <std::size_t N>
std::string_view pick(const std::array<std::string_view, N>& pool, Rng& rng) {
  return pool[rng.uniform_index(N)];
}

struct Elements {
  bool baseline = false;
  bool progress = false;
  bool plan = false;
  bool scope3 = false;
};

std::string strong_text(QuestionId question, const Elements& el, std::string_view name, Rng& rng) {
  const int base_year = between(rng, 2015, 2020);
  const int target_year = between(rng, 2025, 2040);
  const int pct = between(rng, 20, 60);
  const int progress = between(rng, 5, pct - 1);
  const int baseline_kt = between(rng, 12, 950);
  std::string t;
  if (question == QuestionId::kQ4_1b) {
    t += std::string(name) + " reports an emissions intensity target. ";
    t += "We set a target to reduce Scope 1 and 2 emissions per tonne of product by " +
         std::to_string(pct) + "% by " + std::to_string(target_year) + ".";
  } else {
    t += std::string(name) + " reports an absolute emissions target. ";
    t += "In " + std::to_string(base_year) +
         " we set a target to reduce absolute Scope 1 and 2 emissions by " + std::to_string(pct) +
         "% by " + std::to_string(target_year) + ".";
  }
  if (el.baseline) {
    t += " Progress is measured against our " + std::to_string(base_year) + " baseline of " +
         std::to_string(baseline_kt) + ",000 tCO2e.";
  }
  if (el.progress) {
    t += " In the reporting year we reduced emissions by " + std::to_string(progress) +
         "% compared with the base year, meaning " + std::to_string(progress * 100 / pct) +
         "% of the target has been achieved.";
  }
  if (el.plan) t += " " + std::string(pick(kPlans, rng));
  if (el.scope3) {
    t += " A separate Scope 3 target covers purchased goods and services and upstream transport.";
  }
  return t;
}

std::string weak_text(std::string_view name, Rng& rng) {
  std::string t = std::string(name) + " provides the following information.";
  const auto picks = sample_without_replacement(kFiller.size(), static_cast<std::size_t>(between(rng, 2, 4)), rng);
  for (std::size_t i : picks) t += " " + std::string(kFiller[i]);
  if (rng.uniform_index(2) == 0) {
    t += " We are considering the purchase of renewable electricity for our head office.";
  }
  return t;
}

}  // namespace

Corpus generate_synthetic_corpus(const SyntheticSpec& spec) {
  if (spec.high + spec.low == 0) fail(ErrorCode::kInvalidSpec, "synthetic corpus needs at least one response");
  Rng rng(mix_seed(spec.seed, "synthetic_corpus"));
  const std::size_t total = spec.high + spec.low;
  // Tier assignment is shuffled so labels are not clustered by row.
  std::vector<bool> high_tier(total, false);
  for (std::size_t i : sample_without_replacement(total, spec.high, rng)) high_tier[i] = true;

  std::vector<DisclosureResponse> rows;
  rows.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "SYN%05zu", i + 1);
    const std::string name = std::string(pick(kNames, rng)) + " " + std::to_string(i + 1);
    DisclosureResponse r;
    r.company_id = id;
    r.question_id = rng.uniform_index(2) == 0 ? QuestionId::kQ4_1a : QuestionId::kQ4_1b;
    r.a_list = high_tier[i];
    r.region_year = "Europe-2022";
    if (r.a_list) {
      Elements el{true, true, true, true};
      switch (rng.uniform_index(5)) {  // 4 of 5 omits one element, 1 of 5 keeps all
        case 0: el.baseline = false; break;
        case 1: el.progress = false; break;
        case 2: el.plan = false; break;
        case 3: el.scope3 = false; break;
        default: break;
      }
      r.text = strong_text(r.question_id, el, name, rng);
    } else {
      r.text = weak_text(name, rng);
    }
    rows.push_back(std::move(r));
  }
  return Corpus(std::move(rows), spec.seed);
}

std::string synthetic_exemplar_text(int anchor_score, std::uint64_t seed) {
  Rng rng(mix_seed(seed, "exemplar" + std::to_string(anchor_score)));
  switch (anchor_score) {
    case 5: return strong_text(QuestionId::kQ4_1a, Elements{true, true, true, true}, "Example Holdings", rng);
    case 3: return strong_text(QuestionId::kQ4_1a, Elements{false, false, true, false}, "Example Industries", rng);
    default:
      fail(ErrorCode::kInvalidArgument, "synthetic exemplars exist for anchors 3 and 5 only");
  }
}

}  // namespace greenjudge
