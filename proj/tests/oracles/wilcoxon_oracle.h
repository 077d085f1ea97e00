/*
 * Copyright 2026 The Fuseval Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Exact two-sided Wilcoxon signed-rank p-value by enumerating all 2^n sign
// patterns.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace oracle {

// Average ranks of |d| over the nonzero differences.
inline std::vector<double> average_ranks(const std::vector<double>& magnitudes) {
  std::vector<std::size_t> idx(magnitudes.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return magnitudes[a] < magnitudes[b]; });
  std::vector<double> ranks(magnitudes.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && magnitudes[idx[j]] == magnitudes[idx[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = avg;
    i = j;
  }
  return ranks;
}

// Two-sided p by enumerating every sign pattern: the share of patterns whose
// W+ lies at least as far from the centre as the observed one.
inline double enumerate_p(const std::vector<double>& d) {
  std::vector<double> mags;
  std::vector<bool> pos;
  for (double v : d) {
    if (v == 0.0) continue;
    mags.push_back(std::fabs(v));
    pos.push_back(v > 0);
  }
  if (mags.empty()) return 1.0;
  std::vector<double> ranks = average_ranks(mags);
  long total2 = 0, observed2 = 0;
  std::vector<long> r2(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    r2[i] = std::lround(2 * ranks[i]);
    total2 += r2[i];
    if (pos[i]) observed2 += r2[i];
  }
  const long dist = std::labs(2 * observed2 - total2);
  const std::size_t n = ranks.size();
  long extreme = 0;
  for (unsigned long mask = 0; mask < (1UL << n); ++mask) {
    long w2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1UL << i)) w2 += r2[i];
    }
    if (std::labs(2 * w2 - total2) >= dist) ++extreme;
  }
  return std::min(1.0, static_cast<double>(extreme) / std::ldexp(1.0, static_cast<int>(n)));
}

}  // namespace oracle
