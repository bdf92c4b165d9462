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
#include "core/separation_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/error.hpp"
#include "core/util.hpp"

namespace greenjudge {
namespace {

void check_bins(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    fail(ErrorCode::kBinMismatch, "histograms have " + std::to_string(p.size()) + " and " +
                                      std::to_string(q.size()) + " bins");
  }
  if (p.empty()) fail(ErrorCode::kBinMismatch, "histograms are empty");
}

}  // namespace

Histogram bin_scores(std::span<const double> scores, ScoreRange range, std::size_t bins) {
  if (bins == 0) fail(ErrorCode::kInvalidArgument, "bins must be >= 1");
  if (!(range.max > range.min)) fail(ErrorCode::kInvalidArgument, "empty score range");
  if (scores.empty()) fail(ErrorCode::kEmptyInput, "no scores to bin");
  Histogram hist(bins, 0.0);
  const double width = (range.max - range.min) / static_cast<double>(bins);
  for (double s : scores) {
    if (!(s >= range.min && s <= range.max)) {
      fail(ErrorCode::kOutOfRange, "score " + format_double(s) + " outside [" + format_double(range.min) +
                                       ", " + format_double(range.max) + "]");
    }
    auto idx = static_cast<std::size_t>(std::floor((s - range.min) / width));
    hist[std::min(idx, bins - 1)] += 1.0;
  }
  for (double& h : hist) h /= static_cast<double>(scores.size());
  return hist;
}

ScoreDistribution ScoreDistribution::from_scores(std::vector<double> scores, ScoreRange range, std::size_t bins) {
  ScoreDistribution d;
  d.histogram = bin_scores(scores, range, bins);
  d.raw_scores = std::move(scores);
  d.range = range;
  d.bins = bins;
  return d;
}

double tvd(std::span<const double> p, std::span<const double> q) {
  check_bins(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) fail(ErrorCode::kEmptyInput, "KS needs two non-empty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double best = 0.0;
  // Advance past every copy of the next threshold before comparing, so ties
  // are counted on both sides.
  while (i < sa.size() && j < sb.size()) {
    const double t = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= t) ++i;
    while (j < sb.size() && sb[j] <= t) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

double ks_binned(std::span<const double> p, std::span<const double> q) {
  check_bins(p, q);
  double cp = 0.0;
  double cq = 0.0;
  double best = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    cp += p[i];
    cq += q[i];
    best = std::max(best, std::abs(cp - cq));
  }
  return best;
}

double emd_normalized(std::span<const double> p, std::span<const double> q) {
  check_bins(p, q);
  double cp = 0.0;
  double cq = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    cp += p[i];
    cq += q[i];
    sum += std::abs(cp - cq);
  }
  // The last CDF gap is zero for normalized inputs; n=1 is identically 0.
  return p.size() == 1 ? 0.0 : sum / static_cast<double>(p.size());
}

double pearson_r2(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::kDegenerateInput, "x and y differ in length");
  if (x.size() < 2) fail(ErrorCode::kDegenerateInput, "need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) fail(ErrorCode::kDegenerateInput, "zero variance");
  return (sxy * sxy) / (sxx * syy);
}

SeparationReport separation_report(std::span<const double> a_scores, std::span<const double> b_scores,
                                   const SeparationOptions& options) {
  const auto p = bin_scores(a_scores, options.range, options.bins);
  const auto q = bin_scores(b_scores, options.range, options.bins);
  SeparationReport r;
  r.tvd = tvd(p, q);
  r.ks = options.ks_binned ? ks_binned(p, q) : ks_statistic(a_scores, b_scores);
  r.emd_normalized = emd_normalized(p, q);
  r.n_a = a_scores.size();
  r.n_b = b_scores.size();
  return r;
}

}  // namespace greenjudge
