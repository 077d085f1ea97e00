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

#include <algorithm>
#include <cmath>

#include "fuseval/fusion.h"

namespace fuseval {

NormalizedList normalize_minmax(std::string_view topic, const RankedList& list) {
  NormalizedList out;
  out.topic = std::string(topic);
  out.entries.reserve(list.size());
  if (list.empty()) return out;

  auto [lo, hi] = std::minmax_element(
      list.begin(), list.end(),
      [](const ScoredDoc& a, const ScoredDoc& b) { return a.score < b.score; });
  double min = lo->score;
  double range = hi->score - min;
  double scale = 1.0;
  if (!std::isfinite(range)) {
    // Scores spanning more than DBL_MAX; halving is exact here.
    scale = 0.5;
    min *= scale;
    range = hi->score * scale - min;
  }
  const double length = static_cast<double>(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    double value = range > 0.0
                       ? (list[i].score * scale - min) / range
                       : 1.0 - static_cast<double>(i) / length;
    out.entries.push_back({list[i].doc_id, value});
  }
  return out;
}

}  // namespace fuseval
