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
#ifndef GREENJUDGE_CORE_SEPARATION_METRICS_HPP_
#define GREENJUDGE_CORE_SEPARATION_METRICS_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace greenjudge {

struct ScoreRange {
  double min = 1.0;
  double max = 5.0;
};

inline constexpr ScoreRange kRatingRange{1.0, 5.0};
inline constexpr ScoreRange kPairwiseRange{0.0, 100.0};
inline constexpr std::size_t kDefaultBins = 25;

using Histogram = std::vector<double>;

// Equal-width bins over [min, max]; a value equal to max lands in the last
// bin. Masses are normalized by the number of scores.
Histogram bin_scores(std::span<const double> scores, ScoreRange range, std::size_t bins);

struct ScoreDistribution {
  std::vector<double> raw_scores;
  ScoreRange range;
  std::size_t bins = kDefaultBins;
  Histogram histogram;

  static ScoreDistribution from_scores(std::vector<double> scores, ScoreRange range,
                                       std::size_t bins = kDefaultBins);
};

// Half the L1 distance between two histograms.
double tvd(std::span<const double> p, std::span<const double> q);

// Largest gap between the two empirical CDFs over all thresholds.
double ks_statistic(std::span<const double> a, std::span<const double> b);

// Largest gap between the two cumulative histograms.
double ks_binned(std::span<const double> p, std::span<const double> q);

// (1/n) * sum_i |CDF_p(i) - CDF_q(i)|: the 1-D earth mover distance between
// equal-width histograms divided by the score range.
double emd_normalized(std::span<const double> p, std::span<const double> q);

// Squared Pearson correlation.
double pearson_r2(std::span<const double> x, std::span<const double> y);

struct SeparationReport {
  double tvd = 0.0;
  double ks = 0.0;
  double emd_normalized = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

struct SeparationOptions {
  ScoreRange range = kRatingRange;
  std::size_t bins = kDefaultBins;
  bool ks_binned = false;  // KS on the histograms instead of raw scores
};

SeparationReport separation_report(std::span<const double> a_scores, std::span<const double> b_scores,
                                   const SeparationOptions& options);

}  // namespace greenjudge

#endif  // GREENJUDGE_CORE_SEPARATION_METRICS_HPP_
