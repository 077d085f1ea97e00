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
#include <unordered_map>
#include <unordered_set>

#include "fuseval/error.h"
#include "fuseval/fusion.h"

namespace fuseval {
namespace {

// Runs sorted by tag. Summing in this order makes merges independent of
// the caller's run order.
std::vector<const Run*> by_tag(std::span<const Run> runs) {
  if (runs.empty()) throw Error(ErrorCode::kNoRuns, "no runs to fuse");
  std::vector<const Run*> sorted;
  sorted.reserve(runs.size());
  for (const Run& run : runs) sorted.push_back(&run);
  std::sort(sorted.begin(), sorted.end(),
            [](const Run* a, const Run* b) { return a->tag < b->tag; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->tag == sorted[i - 1]->tag) {
      throw Error(ErrorCode::kDuplicateRunTag,
                  "run tag '" + sorted[i]->tag + "' is used by two runs");
    }
  }
  return sorted;
}

struct Tally {
  double sum = 0.0;
  int hits = 0;
};

class Accumulator {
 public:
  void add(std::string_view doc, double value) {
    Tally& t = tallies_[doc];
    t.sum += value;
    ++t.hits;
  }

  // Applies `final_score(tally)` to every document and ranks the result.
  template <typename Fn>
  RankedList rank(Fn&& final_score) const {
    RankedList out;
    out.reserve(tallies_.size());
    for (const auto& [doc, tally] : tallies_) {
      out.push_back({std::string(doc), quantize_score(final_score(tally))});
    }
    sort_canonical(out);
    return out;
  }

  RankedList rank_by_sum() const {
    return rank([](const Tally& t) { return t.sum; });
  }

 private:
  std::unordered_map<std::string_view, Tally> tallies_;
};

void check_model(const FusionModel& model, Algorithm expected,
                 const std::vector<const Run*>& runs) {
  if (model.algorithm != expected) {
    throw Error(ErrorCode::kModelRunMismatch,
                "model was trained for " +
                    std::string(algorithm_id(model.algorithm)) + ", not " +
                    std::string(algorithm_id(expected)));
  }
  bool same = model.probabilities.size() == runs.size();
  for (const Run* run : runs) {
    same = same && model.probabilities.count(run->tag) == 1;
  }
  if (!same) {
    throw Error(ErrorCode::kModelRunMismatch,
                "model run tags do not match the runs being fused");
  }
}

}  // namespace

double quantize_score(double score) {
  if (score == 0.0 || !std::isfinite(score)) return score == 0.0 ? 0.0 : score;
  int exponent = 0;
  std::frexp(score, &exponent);
  constexpr int kBits = 36;
  return std::ldexp(std::nearbyint(std::ldexp(score, kBits - exponent)),
                    exponent - kBits);
}

RankedList fuse_interleave(std::span<const Run> runs, std::string_view topic) {
  if (runs.empty()) throw Error(ErrorCode::kNoRuns, "no runs to fuse");
  std::vector<const RankedList*> lists;
  for (const Run& run : runs) {
    const RankedList* list = run.find(topic);
    lists.push_back(list != nullptr ? list : nullptr);
  }
  std::vector<std::size_t> cursor(lists.size(), 0);
  std::unordered_set<std::string_view> emitted;
  std::vector<std::string_view> order;

  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (std::size_t i = 0; i < lists.size(); ++i) {
      if (lists[i] == nullptr) continue;
      const RankedList& list = *lists[i];
      while (cursor[i] < list.size() &&
             emitted.count(list[cursor[i]].doc_id) > 0) {
        ++cursor[i];
      }
      if (cursor[i] == list.size()) continue;
      std::string_view doc = list[cursor[i]++].doc_id;
      emitted.insert(doc);
      order.push_back(doc);
      progressed = true;
    }
  }

  RankedList out;
  out.reserve(order.size());
  const double total = static_cast<double>(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.push_back({std::string(order[i]),
                   (total - static_cast<double>(i)) / total});
  }
  return out;
}

RankedList fuse_combsum(std::span<const Run> runs, std::string_view topic) {
  Accumulator acc;
  for (const Run* run : by_tag(runs)) {
    const RankedList* list = run->find(topic);
    if (list == nullptr) continue;
    NormalizedList norm = normalize_minmax(topic, *list);
    for (std::size_t i = 0; i < list->size(); ++i) {
      acc.add((*list)[i].doc_id, norm.entries[i].score);
    }
  }
  return acc.rank_by_sum();
}

RankedList fuse_combmnz(std::span<const Run> runs, std::string_view topic) {
  Accumulator acc;
  for (const Run* run : by_tag(runs)) {
    const RankedList* list = run->find(topic);
    if (list == nullptr) continue;
    NormalizedList norm = normalize_minmax(topic, *list);
    for (std::size_t i = 0; i < list->size(); ++i) {
      acc.add((*list)[i].doc_id, norm.entries[i].score);
    }
  }
  return acc.rank([](const Tally& t) { return t.hits * t.sum; });
}

RankedList fuse_linear(std::span<const Run> runs,
                       const std::map<std::string, double>& weights,
                       std::string_view topic) {
  std::vector<const Run*> sorted = by_tag(runs);
  bool any_positive = false;
  for (const Run* run : sorted) {
    auto it = weights.find(run->tag);
    if (it == weights.end()) {
      throw Error(ErrorCode::kMissingWeight,
                  "no weight given for run '" + run->tag + "'", "params");
    }
    any_positive = any_positive || it->second > 0.0;
  }
  if (!any_positive) {
    throw Error(ErrorCode::kAllWeightsZero, "all linear weights are zero",
                "params");
  }
  Accumulator acc;
  for (const Run* run : sorted) {
    const RankedList* list = run->find(topic);
    if (list == nullptr) continue;
    const double weight = weights.at(run->tag);
    NormalizedList norm = normalize_minmax(topic, *list);
    for (std::size_t i = 0; i < list->size(); ++i) {
      acc.add((*list)[i].doc_id, weight * norm.entries[i].score);
    }
  }
  return acc.rank_by_sum();
}

RankedList fuse_probfuse(const FusionModel& model, std::span<const Run> runs,
                         std::string_view topic) {
  std::vector<const Run*> sorted = by_tag(runs);
  check_model(model, Algorithm::kProbFuse, sorted);
  Accumulator acc;
  for (const Run* run : sorted) {
    const RankedList* list = run->find(topic);
    if (list == nullptr) continue;
    const std::vector<double>& probs = model.probabilities.at(run->tag);
    for (std::size_t i = 0; i < list->size(); ++i) {
      int k = probfuse_segment(i + 1, list->size(), model.segments);
      acc.add((*list)[i].doc_id, probs[k - 1] / k);
    }
  }
  return acc.rank_by_sum();
}

RankedList fuse_segfuse(const FusionModel& model, std::span<const Run> runs,
                        std::string_view topic) {
  std::vector<const Run*> sorted = by_tag(runs);
  check_model(model, Algorithm::kSegFuse, sorted);
  Accumulator acc;
  for (const Run* run : sorted) {
    const RankedList* list = run->find(topic);
    if (list == nullptr) continue;
    const std::vector<double>& probs = model.probabilities.at(run->tag);
    NormalizedList norm = normalize_minmax(topic, *list);
    for (std::size_t i = 0; i < list->size(); ++i) {
      std::size_t k = static_cast<std::size_t>(segfuse_segment(i + 1));
      // Segments deeper than any training list carry no evidence.
      double p = k <= probs.size() ? probs[k - 1] : 0.0;
      acc.add((*list)[i].doc_id, p * (1.0 + norm.entries[i].score));
    }
  }
  return acc.rank_by_sum();
}

RankedList fuse_slidefuse(const FusionModel& model, std::span<const Run> runs,
                          std::string_view topic) {
  std::vector<const Run*> sorted = by_tag(runs);
  check_model(model, Algorithm::kSlideFuse, sorted);
  Accumulator acc;
  for (const Run* run : sorted) {
    const RankedList* list = run->find(topic);
    if (list == nullptr) continue;
    const std::vector<double>& windowed = model.windowed.at(run->tag);
    for (std::size_t i = 0; i < list->size(); ++i) {
      double p = windowed.empty()
                     ? 0.0
                     : windowed[std::min(i, windowed.size() - 1)];
      acc.add((*list)[i].doc_id, p);
    }
  }
  return acc.rank_by_sum();
}

FusionModel train(const FusionSpec& spec, std::span<const Run> runs,
                  const Qrels& qrels, std::span<const std::string> train_topics) {
  switch (spec.algorithm) {
    case Algorithm::kProbFuse:
      return train_probfuse(runs, qrels, train_topics, spec.params.segments,
                            spec.params.variant);
    case Algorithm::kSegFuse:
      return train_segfuse(runs, qrels, train_topics);
    case Algorithm::kSlideFuse:
      return train_slidefuse(runs, qrels, train_topics, spec.params.window);
    default:
      throw Error(ErrorCode::kInvalidParameter,
                  std::string(algorithm_id(spec.algorithm)) +
                      " does not use training");
  }
}

RankedList fuse_topic(const FusionSpec& spec, const FusionModel* model,
                      std::span<const Run> runs, std::string_view topic) {
  if (spec.requires_training() && model == nullptr) {
    throw Error(ErrorCode::kModelRunMismatch,
                std::string(algorithm_id(spec.algorithm)) +
                    " needs a trained model");
  }
  switch (spec.algorithm) {
    case Algorithm::kInterleave: return fuse_interleave(runs, topic);
    case Algorithm::kCombSum: return fuse_combsum(runs, topic);
    case Algorithm::kCombMnz: return fuse_combmnz(runs, topic);
    case Algorithm::kLinear:
      return fuse_linear(runs, spec.params.weights, topic);
    case Algorithm::kProbFuse: return fuse_probfuse(*model, runs, topic);
    case Algorithm::kSegFuse: return fuse_segfuse(*model, runs, topic);
    case Algorithm::kSlideFuse: return fuse_slidefuse(*model, runs, topic);
  }
  throw Error(ErrorCode::kUnknownAlgorithm, "unknown algorithm");
}

Run fuse_run(const FusionSpec& spec, const FusionModel* model,
             std::span<const Run> runs, std::span<const std::string> topics,
             std::size_t depth) {
  Run out;
  out.tag = spec.run_tag();
  for (const std::string& topic : topics) {
    RankedList list = fuse_topic(spec, model, runs, topic);
    if (list.empty()) continue;
    if (list.size() > depth) list.resize(depth);
    out.topics.emplace(topic, std::move(list));
  }
  return out;
}

}  // namespace fuseval
