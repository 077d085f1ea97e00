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

// Score normalization and the seven fusion algorithms.
//
// Every merge returns a ranked list in canonical order (fused score
// descending, doc id descending). Fused scores are rounded to a 36-bit
// mantissa before ranking so that mathematically equal scores reached
// through different floating-point paths tie, and the tie is then broken by
// doc id. Contributions are always accumulated in ascending run-tag order,
// which makes every merge independent of the order of the `runs` argument
// (interleaving excepted, whose input order is part of its definition).

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fuseval/trec_io.h"
#include "json.hpp"

namespace fuseval {

enum class Algorithm {
  kInterleave,
  kCombSum,
  kCombMnz,
  kLinear,
  kProbFuse,
  kSegFuse,
  kSlideFuse,
};

enum class ProbFuseVariant { kAll, kJudged };

std::string_view algorithm_id(Algorithm algorithm);
// Throws kUnknownAlgorithm listing the valid ids.
Algorithm parse_algorithm(std::string_view id);
bool requires_training(Algorithm algorithm);

inline constexpr int kDefaultProbFuseSegments = 25;
inline constexpr int kDefaultSlideFuseWindow = 5;

struct FusionParams {
  std::map<std::string, double> weights;  // linear
  int segments = kDefaultProbFuseSegments;  // probfuse
  ProbFuseVariant variant = ProbFuseVariant::kAll;  // probfuse
  int window = kDefaultSlideFuseWindow;  // slidefuse half-width

  friend bool operator==(const FusionParams&, const FusionParams&) = default;
};

struct FusionSpec {
  Algorithm algorithm = Algorithm::kCombSum;
  FusionParams params;

  bool requires_training() const { return fuseval::requires_training(algorithm); }

  // Accepts {"algorithm": id, "params": {...}}. Missing parameters take their
  // defaults; unknown or out-of-range ones throw kInvalidParameter.
  static FusionSpec from_json(const nlohmann::json& doc);
  // Canonical form: only the parameters the algorithm uses, sorted keys.
  nlohmann::json to_json() const;
  // algorithm id + canonical parameter encoding; equal specs share it.
  std::string identity() const;
  // Run tag used for the fused output: "<algorithm>-<8 hex digits>".
  std::string run_tag() const;

  // Checks run-dependent parameters (linear weights) against `run_tags`.
  void validate_for_runs(std::span<const std::string> run_tags) const;

  friend bool operator==(const FusionSpec&, const FusionSpec&) = default;
};

// Machine-readable list of algorithms with their parameter schemas.
nlohmann::json algorithm_registry();

struct NormalizedList {
  std::string topic;
  std::vector<ScoredDoc> entries;  // score holds the normalized value
};

// Min-max normalization; all-equal lists fall back to 1 - (r-1)/L.
NormalizedList normalize_minmax(std::string_view topic, const RankedList& list);

struct FusionModel {
  Algorithm algorithm = Algorithm::kProbFuse;
  int segments = 0;  // probfuse x
  ProbFuseVariant variant = ProbFuseVariant::kAll;
  int window = 0;  // slidefuse a
  std::vector<std::string> training_topics;  // sorted, unique
  // Per run tag: segment probabilities (probfuse, segfuse) or raw
  // per-position probabilities (slidefuse).
  std::map<std::string, std::vector<double>> probabilities;
  // Per run tag, slidefuse only: window-averaged probabilities.
  std::map<std::string, std::vector<double>> windowed;

  nlohmann::json to_json() const;
  static FusionModel from_json(const nlohmann::json& doc);

  friend bool operator==(const FusionModel&, const FusionModel&) = default;
};

RankedList fuse_interleave(std::span<const Run> runs, std::string_view topic);
RankedList fuse_combsum(std::span<const Run> runs, std::string_view topic);
RankedList fuse_combmnz(std::span<const Run> runs, std::string_view topic);
RankedList fuse_linear(std::span<const Run> runs,
                       const std::map<std::string, double>& weights,
                       std::string_view topic);

FusionModel train_probfuse(std::span<const Run> runs, const Qrels& qrels,
                           std::span<const std::string> train_topics,
                           int segments, ProbFuseVariant variant);
RankedList fuse_probfuse(const FusionModel& model, std::span<const Run> runs,
                         std::string_view topic);

FusionModel train_segfuse(std::span<const Run> runs, const Qrels& qrels,
                          std::span<const std::string> train_topics);
RankedList fuse_segfuse(const FusionModel& model, std::span<const Run> runs,
                        std::string_view topic);

FusionModel train_slidefuse(std::span<const Run> runs, const Qrels& qrels,
                            std::span<const std::string> train_topics,
                            int window);
RankedList fuse_slidefuse(const FusionModel& model, std::span<const Run> runs,
                          std::string_view topic);

// 1-based segment index of rank `rank` in a list of length `length` split
// into `segments` parts: min(x, ceil(r*x/L)).
int probfuse_segment(std::size_t rank, std::size_t length, int segments);
// 1-based SegFuse segment of `rank`; segment k holds 10*2^(k-1) - 5 ranks.
int segfuse_segment(std::size_t rank);
// First rank (1-based) of SegFuse segment k.
std::size_t segfuse_segment_start(int k);

// Dispatch over a FusionSpec. `model` must be non-null for trained specs.
FusionModel train(const FusionSpec& spec, std::span<const Run> runs,
                  const Qrels& qrels, std::span<const std::string> train_topics);
RankedList fuse_topic(const FusionSpec& spec, const FusionModel* model,
                      std::span<const Run> runs, std::string_view topic);
// Fuses every topic in `topics`, truncating each list to `depth`. Topics
// that no run covers are left out.
Run fuse_run(const FusionSpec& spec, const FusionModel* model,
             std::span<const Run> runs, std::span<const std::string> topics,
             std::size_t depth = kDefaultTopicCap);

// Rounds to a 36-bit mantissa.
double quantize_score(double score);

}  // namespace fuseval
