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

#include "fuseval/split.h"

#include <algorithm>
#include <set>

#include "fuseval/error.h"

namespace fuseval {
namespace {

using nlohmann::json;

[[noreturn]] void invalid(ErrorCode code, const std::string& message) {
  throw Error(code, message, "split");
}

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<std::string> string_list(const json& doc, const char* key) {
  if (!doc.contains(key) || doc[key].is_null()) return {};
  const json& v = doc[key];
  if (!v.is_array()) invalid(ErrorCode::kInvalidDocument, std::string("'") + key + "' must be a list");
  std::vector<std::string> out;
  for (const json& item : v) {
    if (item.is_string()) {
      out.push_back(item.get<std::string>());
    } else if (item.is_number_integer()) {
      out.push_back(std::to_string(item.get<long long>()));
    } else {
      invalid(ErrorCode::kInvalidDocument, std::string("'") + key + "' must list topic ids");
    }
  }
  return out;
}

std::vector<std::string> complement(const std::vector<std::string>& all,
                                    const std::vector<std::string>& part) {
  std::vector<std::string> out;
  std::set_difference(all.begin(), all.end(), part.begin(), part.end(),
                      std::back_inserter(out));
  return out;
}

}  // namespace

std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string_view split_kind_id(SplitKind kind) {
  switch (kind) {
    case SplitKind::kAllTest: return "all_test";
    case SplitKind::kHoldout: return "holdout";
    case SplitKind::kKFold: return "kfold";
  }
  return "all_test";
}

SplitPlan SplitPlan::from_json(const json& doc) {
  SplitPlan plan;
  if (doc.is_null()) return plan;
  if (!doc.is_object()) invalid(ErrorCode::kInvalidDocument, "'split' must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "kind" && key != "k" && key != "seed" && key != "train" && key != "test") {
      invalid(ErrorCode::kInvalidDocument, "unknown split field '" + key + "'");
    }
  }
  const std::string kind = doc.value("kind", std::string("all_test"));
  if (kind == "all_test") {
    plan.kind = SplitKind::kAllTest;
  } else if (kind == "holdout") {
    plan.kind = SplitKind::kHoldout;
  } else if (kind == "kfold") {
    plan.kind = SplitKind::kKFold;
  } else {
    invalid(ErrorCode::kInvalidDocument,
            "split kind must be all_test, holdout or kfold, not '" + kind + "'");
  }
  plan.train = string_list(doc, "train");
  plan.test = string_list(doc, "test");
  if (doc.contains("k") && !doc["k"].is_null()) {
    if (!doc["k"].is_number_integer()) invalid(ErrorCode::kInvalidDocument, "'k' must be an integer");
    plan.k = doc["k"].get<int>();
  }
  if (doc.contains("seed") && !doc["seed"].is_null()) {
    const json& s = doc["seed"];
    if (s.is_number_unsigned()) {
      plan.seed = s.get<std::uint64_t>();
    } else if (s.is_number_integer() && s.get<long long>() >= 0) {
      plan.seed = static_cast<std::uint64_t>(s.get<long long>());
    } else if (s.is_string()) {
      try {
        std::size_t used = 0;
        plan.seed = std::stoull(s.get<std::string>(), &used);
        if (used != s.get<std::string>().size()) throw std::invalid_argument("seed");
      } catch (const std::exception&) {
        invalid(ErrorCode::kInvalidDocument, "'seed' must be a 64-bit unsigned integer");
      }
    } else {
      invalid(ErrorCode::kInvalidDocument, "'seed' must be a 64-bit unsigned integer");
    }
  }
  if (plan.kind == SplitKind::kKFold && plan.k < 2) {
    invalid(ErrorCode::kInvalidDocument, "k-fold splits need k >= 2");
  }
  if (plan.kind == SplitKind::kHoldout && plan.train.empty() && plan.test.empty()) {
    invalid(ErrorCode::kInvalidDocument, "holdout splits need a train or test list");
  }
  return plan;
}

json SplitPlan::to_json() const {
  json doc{{"kind", std::string(split_kind_id(kind))}};
  if (kind == SplitKind::kHoldout) {
    if (!train.empty()) doc["train"] = train;
    if (!test.empty()) doc["test"] = test;
  }
  if (kind == SplitKind::kKFold) doc["k"] = k;
  if (seed) doc["seed"] = *seed;
  return doc;
}

std::vector<std::string> MaterializedSplit::test_topics() const {
  std::vector<std::string> out;
  for (const Fold& f : folds) out.insert(out.end(), f.test.begin(), f.test.end());
  return sorted_unique(std::move(out));
}

json MaterializedSplit::to_json() const {
  json folds_json = json::array();
  for (const Fold& f : folds) folds_json.push_back({{"train", f.train}, {"test", f.test}});
  json doc{{"kind", std::string(split_kind_id(kind))}, {"folds", folds_json}};
  if (kind == SplitKind::kKFold) doc["k"] = k;
  if (seed) doc["seed"] = *seed;
  return doc;
}

MaterializedSplit MaterializedSplit::from_json(const json& doc) {
  MaterializedSplit split;
  const std::string kind = doc.at("kind").get<std::string>();
  split.kind = kind == "holdout" ? SplitKind::kHoldout
               : kind == "kfold" ? SplitKind::kKFold
                                 : SplitKind::kAllTest;
  split.k = doc.value("k", 0);
  if (doc.contains("seed")) split.seed = doc["seed"].get<std::uint64_t>();
  for (const json& f : doc.at("folds")) {
    split.folds.push_back({f.at("train").get<std::vector<std::string>>(),
                           f.at("test").get<std::vector<std::string>>()});
  }
  return split;
}

MaterializedSplit materialize_split(const SplitPlan& plan,
                                    std::span<const std::string> topics) {
  std::vector<std::string> all =
      sorted_unique(std::vector<std::string>(topics.begin(), topics.end()));
  if (all.empty()) invalid(ErrorCode::kEmptyTopicSubset, "the dataset has no topics");

  MaterializedSplit split;
  split.kind = plan.kind;
  split.seed = plan.seed;

  switch (plan.kind) {
    case SplitKind::kAllTest:
      split.folds.push_back({{}, all});
      break;
    case SplitKind::kHoldout: {
      std::vector<std::string> train = sorted_unique(plan.train);
      std::vector<std::string> test = sorted_unique(plan.test);
      std::vector<std::string> both;
      std::set_intersection(train.begin(), train.end(), test.begin(), test.end(),
                            std::back_inserter(both));
      if (!both.empty()) {
        invalid(ErrorCode::kOverlappingSplit,
                "topic '" + both.front() + "' is in both the train and test lists");
      }
      for (const auto* list : {&train, &test}) {
        for (const std::string& t : *list) {
          if (!std::binary_search(all.begin(), all.end(), t)) {
            invalid(ErrorCode::kUnknownTopicInSplit,
                    "topic '" + t + "' is not in the dataset");
          }
        }
      }
      if (plan.train.empty()) train = complement(all, test);
      if (plan.test.empty()) test = complement(all, train);
      if (test.empty()) {
        invalid(ErrorCode::kEmptyTopicSubset, "the holdout split has no test topics");
      }
      if (train.size() + test.size() != all.size()) {
        invalid(ErrorCode::kIncompleteSplit,
                "train and test lists must together cover every topic");
      }
      split.folds.push_back({std::move(train), std::move(test)});
      break;
    }
    case SplitKind::kKFold: {
      if (plan.k < 2) invalid(ErrorCode::kInvalidDocument, "k-fold splits need k >= 2");
      const std::size_t k = static_cast<std::size_t>(plan.k);
      if (k > all.size()) {
        invalid(ErrorCode::kKTooLarge, "k = " + std::to_string(k) + " exceeds the " +
                                           std::to_string(all.size()) + " topics");
      }
      split.k = plan.k;
      std::vector<std::string> order = all;
      if (plan.seed) {
        std::uint64_t state = *plan.seed;
        for (std::size_t i = order.size() - 1; i >= 1; --i) {
          std::size_t j = static_cast<std::size_t>(splitmix64_next(state) % (i + 1));
          std::swap(order[i], order[j]);
        }
      }
      std::vector<std::vector<std::string>> tests(k);
      for (std::size_t i = 0; i < order.size(); ++i) tests[i % k].push_back(order[i]);
      for (std::size_t f = 0; f < k; ++f) {
        Fold fold;
        fold.test = sorted_unique(tests[f]);
        fold.train = complement(all, fold.test);
        split.folds.push_back(std::move(fold));
      }
      break;
    }
  }
  return split;
}

}  // namespace fuseval
