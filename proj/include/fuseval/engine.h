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

// Experiment execution: select runs, split topics, train, fuse, evaluate,
// compare.
//
// For every fold the trained specs are fitted on the fold's training topics
// and every spec is fused and evaluated on the fold's test topics only. Fold
// outputs are pooled into one fused run per spec, so each test topic is
// evaluated exactly once. Component runs are evaluated on the same pooled
// test topics.

#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fuseval/experiment.h"
#include "fuseval/metrics.h"
#include "fuseval/store.h"
#include "json.hpp"

namespace fuseval {

struct EngineOptions {
  // Called before each pending spec runs (used to observe partial results).
  // An exception thrown here marks the spec as failed.
  std::function<void(const FusionEntry&)> before_spec;
  std::size_t fused_depth = kDefaultTopicCap;
  EvalOptions eval;
};

struct VerifyReport {
  bool identical = true;
  std::vector<std::string> mismatches;
};

class Engine {
 public:
  explicit Engine(Store& store, EngineOptions options = {});

  // Validates the definition against its dataset, materializes the split and
  // stores a pending record.
  ExperimentRecord create(const ExperimentDefinition& definition);
  ExperimentRecord create(const nlohmann::json& document);

  // Runs every pending spec and missing component evaluation. A completed
  // experiment is returned unchanged. Per-spec failures are recorded.
  ExperimentRecord execute(const std::string& experiment_id);

  // Validates `spec` against the stored experiment and appends it as
  // pending. Throws kDuplicateSpec when an equal spec is present.
  ExperimentRecord append_fusion(const std::string& experiment_id,
                                 const nlohmann::json& spec);
  // append_fusion followed by execute.
  ExperimentRecord add_fusion(const std::string& experiment_id,
                              const nlohmann::json& spec);

  // Latest table of a stored record.
  EvaluationTable table(const ExperimentRecord& record) const;
  std::map<std::string, EvalReport> reports(const ExperimentRecord& record) const;

  // Recomputes every stored fused run, report and table cell from the
  // record and compares them with the stored blobs.
  VerifyReport verify(const std::string& experiment_id) const;

  // Metrics stored in every report: the requested ones plus the
  // interpolated precision points backing the PR curve.
  static std::vector<std::string> report_metrics(const std::vector<std::string>& metrics);

 private:
  struct Inputs {
    DatasetRecord dataset;
    std::vector<Run> runs;  // experiment order
    Qrels qrels;
  };
  Inputs load_inputs(const ExperimentRecord& record) const;

  struct SpecOutput {
    std::string fused_text;
    std::string report_json;
    std::vector<ModelRef> models;
    std::vector<std::string> model_json;
  };
  SpecOutput run_spec(const ExperimentRecord& record, const FusionEntry& entry,
                      const Inputs& inputs) const;
  std::string component_report(const ExperimentRecord& record, const Run& run,
                               const Qrels& qrels) const;
  std::vector<std::string> component_tags(const ExperimentRecord& record) const;
  void store_with_table(ExperimentRecord& record);

  Store& store_;
  EngineOptions options_;
};

}  // namespace fuseval
