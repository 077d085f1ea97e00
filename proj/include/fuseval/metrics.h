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

// Evaluation measures with the reference evaluator's semantics.
//
// A document is relevant when its grade is > 0, judged nonrelevant when its
// grade is 0, and unjudged when absent from the qrels. Rankings are the
// canonical run order truncated to `EvalOptions::depth`.
//
// Metric ids follow the reference tool's names:
//   P_<n>, recall_<n>, set_recall, map, Rprec, bpref, ndcg,
//   iprec_at_recall_0.00 ... iprec_at_recall_1.00
// Family names ("P", "recall", "iprec_at_recall") expand to the
// default cutoffs.

#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fuseval/trec_io.h"
#include "json.hpp"

namespace fuseval {

inline constexpr std::size_t kDefaultEvalDepth = 1000;
inline constexpr std::array<std::size_t, 9> kDefaultCutoffs{5,   10,  15,  20, 30,
                                                            100, 200, 500, 1000};

struct EvalOptions {
  std::size_t depth = kDefaultEvalDepth;
};

struct MetricInfo {
  std::string id;
  std::string display_name;
  bool needs_cutoff = false;
  // Reported beyond the platform's core five measures.
  bool extended = false;
};

const std::vector<MetricInfo>& metric_registry();
nlohmann::json metric_registry_json();

// Expands families, validates ids (kUnknownMetric lists valid ones) and
// removes duplicates while keeping first-seen order.
std::vector<std::string> expand_metrics(std::span<const std::string> requested);

// Display label, e.g. "P@10" for "P_10".
std::string metric_label(std::string_view metric_id);

std::string iprec_metric_id(std::size_t point);  // point in 0..10

double precision_at(const Run& run, const Qrels& qrels, std::string_view topic,
                    std::size_t n, const EvalOptions& options = {});
// `n` unset means the whole (depth-truncated) ranking.
double recall_at(const Run& run, const Qrels& qrels, std::string_view topic,
                 std::optional<std::size_t> n, const EvalOptions& options = {});
double average_precision(const Run& run, const Qrels& qrels,
                         std::string_view topic, const EvalOptions& options = {});
double r_precision(const Run& run, const Qrels& qrels, std::string_view topic,
                   const EvalOptions& options = {});
double bpref(const Run& run, const Qrels& qrels, std::string_view topic,
             const EvalOptions& options = {});
double ndcg(const Run& run, const Qrels& qrels, std::string_view topic,
            const EvalOptions& options = {});
std::array<double, 11> pr_curve(const Run& run, const Qrels& qrels,
                                std::string_view topic,
                                const EvalOptions& options = {});

struct TopicEval {
  std::string topic;
  std::map<std::string, double> values;
  std::size_t relevant = 0;     // R
  std::size_t nonrelevant = 0;  // N

  friend bool operator==(const TopicEval&, const TopicEval&) = default;
};

struct EvalReport {
  std::string run_tag;
  std::vector<TopicEval> topics;  // eligible topics, ascending id
  std::map<std::string, double> aggregates;
  std::size_t eligible = 0;

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& doc);

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Evaluates `metrics` (ids or families) over `topics`, or over every qrels
// topic when `topics` is unset. Only topics with R > 0 are eligible; an
// eligible topic the run does not cover scores 0 on every measure.
EvalReport evaluate(const Run& run, const Qrels& qrels,
                    std::span<const std::string> metrics,
                    std::optional<std::span<const std::string>> topics = {},
                    const EvalOptions& options = {});

// "metric<TAB>topic<TAB>value" lines followed by "metric<TAB>all<TAB>value",
// values to four decimals.
std::string format_report(const EvalReport& report,
                          std::span<const std::string> metrics);

}  // namespace fuseval
