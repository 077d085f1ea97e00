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

// Train/test topic splits.
//
// k-fold assignment: topic ids are sorted, optionally shuffled by a seeded
// Fisher-Yates pass driven by splitmix64, and the topic at position i goes
// to fold (i mod k). For the shuffle, j = next() mod (i + 1) for i from
// n-1 down to 1, where next() is splitmix64 seeded with `seed`.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace fuseval {

enum class SplitKind { kAllTest, kHoldout, kKFold };

std::string_view split_kind_id(SplitKind kind);

struct SplitPlan {
  SplitKind kind = SplitKind::kAllTest;
  // Holdout only. Either list may be omitted; it is then the complement.
  std::vector<std::string> train;
  std::vector<std::string> test;
  int k = 0;  // k-fold only
  std::optional<std::uint64_t> seed;

  // Reads the document's "split" object: {kind, k, seed, train, test}.
  static SplitPlan from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

struct Fold {
  std::vector<std::string> train;  // sorted
  std::vector<std::string> test;   // sorted

  friend bool operator==(const Fold&, const Fold&) = default;
};

// A split with every topic list spelled out. all_test and holdout have a
// single fold.
struct MaterializedSplit {
  SplitKind kind = SplitKind::kAllTest;
  int k = 0;
  std::optional<std::uint64_t> seed;
  std::vector<Fold> folds;

  // Union of the folds' test topics, sorted; each topic appears once.
  std::vector<std::string> test_topics() const;

  nlohmann::json to_json() const;
  static MaterializedSplit from_json(const nlohmann::json& doc);

  friend bool operator==(const MaterializedSplit&, const MaterializedSplit&) = default;
};

MaterializedSplit materialize_split(const SplitPlan& plan,
                                    std::span<const std::string> topics);

std::uint64_t splitmix64_next(std::uint64_t& state);

}  // namespace fuseval
