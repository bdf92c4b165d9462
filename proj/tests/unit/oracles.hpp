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
// Deliberately naive reference implementations of the separation metrics,
// written without reference to the production code.

#ifndef GREENJUDGE_TESTS_ORACLES_HPP_
#define GREENJUDGE_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

namespace greenjudge::oracle {

// Largest difference in probability assigned to any set of bins. Exponential
// in the bin count; use only for small histograms.
inline double tvd_by_subsets(const std::vector<double>& p, const std::vector<double>& q) {
  const std::size_t n = p.size();
  double best = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) diff += p[i] - q[i];
    }
    best = std::max(best, std::abs(diff));
  }
  return best;
}

// Total excess mass of p over q.
inline double tvd_by_excess(const std::vector<double>& p, const std::vector<double>& q) {
  double excess = 0.0;
  double deficit = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > q[i]) excess += p[i] - q[i];
    else deficit += q[i] - p[i];
  }
  return 0.5 * (excess + deficit);
}

// ECDF gap evaluated at every observed value by direct counting.
inline double ks_by_counting(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> points(a);
  points.insert(points.end(), b.begin(), b.end());
  double best = 0.0;
  for (double t : points) {
    double ca = 0.0;
    double cb = 0.0;
    for (double x : a) ca += x <= t ? 1.0 : 0.0;
    for (double x : b) cb += x <= t ? 1.0 : 0.0;
    best = std::max(best, std::abs(ca / static_cast<double>(a.size()) - cb / static_cast<double>(b.size())));
  }
  return best;
}

// Earth mover's distance by explicit greedy transport between bin centres,
// measured in units of the full range (n bins of width 1/n).
inline double emd_by_transport(std::vector<double> p, std::vector<double> q) {
  const std::size_t n = p.size();
  double cost = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n && j < n) {
    if (p[i] <= 1e-300) {
      ++i;
      continue;
    }
    if (q[j] <= 1e-300) {
      ++j;
      continue;
    }
    const double flow = std::min(p[i], q[j]);
    cost += flow * std::abs(static_cast<double>(i) - static_cast<double>(j));
    p[i] -= flow;
    q[j] -= flow;
  }
  return cost / static_cast<double>(n);
}

// Histogram by testing each bin's interval explicitly.
inline std::vector<double> bin_by_intervals(const std::vector<double>& scores, double lo, double hi,
                                            std::size_t bins) {
  std::vector<double> h(bins, 0.0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double s : scores) {
    for (std::size_t b = 0; b < bins; ++b) {
      const double left = lo + width * static_cast<double>(b);
      const double right = lo + width * static_cast<double>(b + 1);
      const bool last = b + 1 == bins;
      if (s >= left && (s < right || last)) {
        h[b] += 1.0;
        break;
      }
    }
  }
  for (double& x : h) x /= static_cast<double>(scores.size());
  return h;
}

// A random normalized histogram; some bins are left empty.
inline std::vector<double> random_histogram(std::mt19937_64& gen, std::size_t bins) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> h(bins, 0.0);
  double total = 0.0;
  for (auto& x : h) {
    x = (gen() % 3 == 0) ? 0.0 : u(gen);
    total += x;
  }
  if (total == 0.0) {
    h[gen() % bins] = 1.0;
    return h;
  }
  for (auto& x : h) x /= total;
  return h;
}

// Random scores in [lo, hi], drawn from a small grid half the time so ties occur.
inline std::vector<double> random_scores(std::mt19937_64& gen, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  const bool gridded = gen() % 2 == 0;
  std::vector<double> out(n);
  for (auto& x : out) {
    x = gridded ? lo + (hi - lo) * static_cast<double>(gen() % 9) / 8.0 : u(gen);
  }
  return out;
}

}  // namespace greenjudge::oracle

#endif  // GREENJUDGE_TESTS_ORACLES_HPP_
