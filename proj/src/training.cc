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
#include <set>

#include <boost/multiprecision/cpp_int.hpp>

#include "fuseval/error.h"
#include "fuseval/fusion.h"

namespace fuseval {
namespace {

using Rational = boost::multiprecision::cpp_rational;

// Per-segment means accumulate exactly and are rounded once, so equal
// models are reached regardless of topic order.
std::vector<double> mean_over(const std::vector<Rational>& sums,
                              std::size_t topic_count) {
  std::vector<double> out;
  out.reserve(sums.size());
  for (const Rational& s : sums) {
    out.push_back((s / static_cast<long long>(topic_count)).convert_to<double>());
  }
  return out;
}

std::vector<std::string> training_set(std::span<const std::string> topics) {
  std::vector<std::string> out(topics.begin(), topics.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) {
    throw Error(ErrorCode::kNoTrainingTopics, "no training topics given",
                "split");
  }
  return out;
}

void check_unique_tags(std::span<const Run> runs) {
  if (runs.empty()) throw Error(ErrorCode::kNoRuns, "no runs to train on");
  std::set<std::string_view> seen;
  for (const Run& run : runs) {
    if (!seen.insert(run.tag).second) {
      throw Error(ErrorCode::kDuplicateRunTag,
                  "run tag '" + run.tag + "' is used by two runs");
    }
  }
}

// -1 unjudged, 0 judged nonrelevant, 1 relevant.
int judgment(const Qrels::Judgments* judgments, const std::string& doc) {
  if (judgments == nullptr) return -1;
  auto it = judgments->find(doc);
  if (it == judgments->end()) return -1;
  return it->second > 0 ? 1 : 0;
}

std::size_t longest_list(const Run& run, std::span<const std::string> topics) {
  std::size_t longest = 0;
  for (const std::string& topic : topics) {
    if (const RankedList* list = run.find(topic)) {
      longest = std::max(longest, list->size());
    }
  }
  return longest;
}

}  // namespace

int probfuse_segment(std::size_t rank, std::size_t length, int segments) {
  const std::size_t x = static_cast<std::size_t>(segments);
  std::size_t k = (rank * x + length - 1) / length;
  return static_cast<int>(std::min(x, k));
}

std::size_t segfuse_segment_start(int k) {
  // Segments 1..k-1 hold sum(10*2^(j-1) - 5) = 10*(2^(k-1) - 1) - 5*(k-1).
  const std::size_t before = static_cast<std::size_t>(k - 1);
  return 10 * ((std::size_t{1} << before) - 1) - 5 * before + 1;
}

int segfuse_segment(std::size_t rank) {
  int k = 1;
  while (segfuse_segment_start(k + 1) <= rank) ++k;
  return k;
}

FusionModel train_probfuse(std::span<const Run> runs, const Qrels& qrels,
                           std::span<const std::string> train_topics,
                           int segments, ProbFuseVariant variant) {
  if (segments < 1) {
    throw Error(ErrorCode::kInvalidSegmentCount,
                "segment count must be at least 1", "params");
  }
  check_unique_tags(runs);
  FusionModel model;
  model.algorithm = Algorithm::kProbFuse;
  model.segments = segments;
  model.variant = variant;
  model.training_topics = training_set(train_topics);

  const std::size_t x = static_cast<std::size_t>(segments);
  for (const Run& run : runs) {
    std::vector<Rational> sums(x);
    for (const std::string& topic : model.training_topics) {
      const RankedList* list = run.find(topic);
      if (list == nullptr || list->empty()) continue;
      const Qrels::Judgments* judgments = qrels.find(topic);
      std::vector<std::size_t> size(x, 0), rel(x, 0), nonrel(x, 0);
      for (std::size_t i = 0; i < list->size(); ++i) {
        std::size_t k = probfuse_segment(i + 1, list->size(), segments) - 1;
        ++size[k];
        int j = judgment(judgments, (*list)[i].doc_id);
        if (j == 1) ++rel[k];
        if (j == 0) ++nonrel[k];
      }
      for (std::size_t k = 0; k < x; ++k) {
        std::size_t denom =
            variant == ProbFuseVariant::kAll ? size[k] : rel[k] + nonrel[k];
        if (denom > 0) {
          sums[k] += Rational(static_cast<long long>(rel[k]),
                              static_cast<long long>(denom));
        }
      }
    }
    model.probabilities.emplace(
        run.tag, mean_over(sums, model.training_topics.size()));
  }
  return model;
}

FusionModel train_segfuse(std::span<const Run> runs, const Qrels& qrels,
                          std::span<const std::string> train_topics) {
  check_unique_tags(runs);
  FusionModel model;
  model.algorithm = Algorithm::kSegFuse;
  model.training_topics = training_set(train_topics);

  for (const Run& run : runs) {
    std::size_t longest = longest_list(run, model.training_topics);
    std::size_t count =
        longest == 0 ? 0 : static_cast<std::size_t>(segfuse_segment(longest));
    std::vector<Rational> sums(count);
    for (const std::string& topic : model.training_topics) {
      const RankedList* list = run.find(topic);
      if (list == nullptr || list->empty()) continue;
      const Qrels::Judgments* judgments = qrels.find(topic);
      std::vector<std::size_t> size(count, 0), rel(count, 0);
      for (std::size_t i = 0; i < list->size(); ++i) {
        std::size_t k = static_cast<std::size_t>(segfuse_segment(i + 1)) - 1;
        ++size[k];
        if (judgment(judgments, (*list)[i].doc_id) == 1) ++rel[k];
      }
      for (std::size_t k = 0; k < count; ++k) {
        if (size[k] > 0) {
          sums[k] += Rational(static_cast<long long>(rel[k]),
                              static_cast<long long>(size[k]));
        }
      }
    }
    model.probabilities.emplace(
        run.tag, mean_over(sums, model.training_topics.size()));
  }
  return model;
}

FusionModel train_slidefuse(std::span<const Run> runs, const Qrels& qrels,
                            std::span<const std::string> train_topics,
                            int window) {
  if (window < 0) {
    throw Error(ErrorCode::kNegativeWindow, "window width must be >= 0",
                "params");
  }
  check_unique_tags(runs);
  FusionModel model;
  model.algorithm = Algorithm::kSlideFuse;
  model.window = window;
  model.training_topics = training_set(train_topics);
  const double topic_count = static_cast<double>(model.training_topics.size());
  const std::size_t a = static_cast<std::size_t>(window);

  for (const Run& run : runs) {
    const std::size_t depth = longest_list(run, model.training_topics);
    std::vector<std::size_t> hits(depth, 0);
    for (const std::string& topic : model.training_topics) {
      const RankedList* list = run.find(topic);
      if (list == nullptr) continue;
      const Qrels::Judgments* judgments = qrels.find(topic);
      for (std::size_t i = 0; i < list->size(); ++i) {
        if (judgment(judgments, (*list)[i].doc_id) == 1) ++hits[i];
      }
    }
    std::vector<double> raw(depth);
    for (std::size_t p = 0; p < depth; ++p) {
      raw[p] = static_cast<double>(hits[p]) / topic_count;
    }
    // Window sums are integer hit counts, so each average is one division.
    std::vector<std::size_t> prefix(depth + 1, 0);
    for (std::size_t p = 0; p < depth; ++p) prefix[p + 1] = prefix[p] + hits[p];
    std::vector<double> windowed(depth);
    for (std::size_t p = 0; p < depth; ++p) {
      std::size_t lo = p >= a ? p - a : 0;
      std::size_t hi = std::min(depth - 1, p + a);
      const double width = static_cast<double>(hi - lo + 1);
      windowed[p] = static_cast<double>(prefix[hi + 1] - prefix[lo]) /
                    (topic_count * width);
    }
    model.probabilities.emplace(run.tag, std::move(raw));
    model.windowed.emplace(run.tag, std::move(windowed));
  }
  return model;
}

}  // namespace fuseval
