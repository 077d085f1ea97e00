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

// Experiment documents, stored records and evaluation tables.
//
// An experiment document has the fields
//
//   dataset      dataset id or name
//   runs         ordered list of run tags (order matters for interleaving)
//   split        {kind, k, seed, train, test}
//   fusions      [{algorithm, params}]
//   metrics      metric ids or families (default: map, P_10, bpref, ndcg,
//                set_recall)
//   baseline     "best_component" (default), a run tag or a fused run tag
//   components   evaluate the component runs too (default true)

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fuseval/fusion.h"
#include "fuseval/significance.h"
#include "fuseval/split.h"
#include "json.hpp"

namespace fuseval {

inline constexpr std::string_view kBestComponentBaseline = "best_component";

struct ExperimentDefinition {
  std::string dataset;
  std::vector<std::string> runs;
  SplitPlan split;
  std::vector<FusionSpec> fusions;
  std::vector<std::string> metrics;  // expanded ids
  std::string baseline = std::string(kBestComponentBaseline);
  bool include_components = true;

  // Structural validation only; dataset-dependent checks happen when the
  // experiment is created. Errors carry the offending field name.
  static ExperimentDefinition from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;  // canonical
  std::string digest() const;
};

enum class SpecStatus { kPending, kDone, kFailed };

std::string_view spec_status_id(SpecStatus status);

struct ModelRef {
  std::size_t fold = 0;
  std::vector<std::string> training_topics;
  std::string digest;

  friend bool operator==(const ModelRef&, const ModelRef&) = default;
};

struct FusionEntry {
  FusionSpec spec;
  std::string run_tag;
  SpecStatus status = SpecStatus::kPending;
  std::string error;
  std::string fused_run;  // blob digest of the TREC text
  std::string report;     // blob digest of the EvalReport
  std::vector<ModelRef> models;

  friend bool operator==(const FusionEntry&, const FusionEntry&) = default;
};

struct ExperimentRecord {
  std::string id;
  std::string created;
  std::string definition_digest;
  nlohmann::json definition;
  std::string dataset_id;
  std::vector<std::string> runs;
  MaterializedSplit split;
  std::vector<FusionEntry> fusions;
  std::vector<std::string> metrics;
  std::string baseline;
  bool include_components = true;
  std::map<std::string, std::string> component_reports;  // run tag -> digest
  std::string table;  // blob digest of the latest EvaluationTable

  // "pending" before anything ran, "partial" while specs are pending,
  // "completed" once every spec is done or failed.
  std::string status() const;
  bool has_pending() const;
  const FusionEntry* find_fusion(std::string_view ref) const;

  nlohmann::json to_json() const;
  static ExperimentRecord from_json(const nlohmann::json& doc);

  friend bool operator==(const ExperimentRecord&, const ExperimentRecord&) = default;
};

enum class RowKind { kComponent, kFusion, kBestComponent, kMeanComponent, kMedianComponent };

std::string_view row_kind_id(RowKind kind);

struct SignificanceMark {
  std::string baseline;
  TestResult t_test;
  TestResult wilcoxon;

  friend bool operator==(const SignificanceMark&, const SignificanceMark&) = default;
};

struct TableRow {
  std::string system;
  RowKind kind = RowKind::kComponent;
  std::map<std::string, double> cells;
  std::map<std::string, SignificanceMark> significance;

  friend bool operator==(const TableRow&, const TableRow&) = default;
};

struct EvaluationTable {
  std::string experiment_id;
  std::string dataset_id;
  std::string split_kind;
  std::vector<std::string> metrics;
  std::vector<std::string> test_topics;
  std::string baseline;
  std::vector<TableRow> rows;
  std::vector<std::string> pending;  // run tags of specs not yet run
  std::vector<std::string> notes;

  const TableRow* find_row(std::string_view system) const;

  nlohmann::json to_json() const;
  static EvaluationTable from_json(const nlohmann::json& doc);

  friend bool operator==(const EvaluationTable&, const EvaluationTable&) = default;
};

// "" when p >= 0.05, otherwise the dagger (p < 0.05) or double dagger
// (p < 0.01) marker.
std::string_view significance_marker(double p_value);

// Builds the table from the record and its reports, keyed by run tag.
// Component rows come first (in run order), then completed fusions in spec
// order, then the best/mean/median component rows.
EvaluationTable build_table(const ExperimentRecord& record,
                            const std::map<std::string, EvalReport>& reports);

}  // namespace fuseval
