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

#include "fuseval/engine.h"

#include <algorithm>
#include <bit>
#include <cstdint>

#include "fuseval/digest.h"
#include "fuseval/error.h"
#include "fuseval/trec_io.h"

namespace fuseval {
namespace {

using nlohmann::json;

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

void check_trainable(const FusionSpec& spec, const MaterializedSplit& split,
                     const std::string& field) {
  if (!spec.requires_training()) return;
  for (const Fold& fold : split.folds) {
    if (fold.train.empty()) {
      throw Error(ErrorCode::kTrainingRequiredButNoTrainTopics,
                  std::string(algorithm_id(spec.algorithm)) +
                      " needs training topics but the split provides none",
                  field);
    }
  }
}

void check_spec_for_runs(const FusionSpec& spec, const std::vector<std::string>& runs,
                         const std::string& field) {
  try {
    spec.validate_for_runs(runs);
  } catch (const Error& e) {
    throw Error(e.code(), e.what(), field);
  }
}

}  // namespace

Engine::Engine(Store& store, EngineOptions options)
    : store_(store), options_(std::move(options)) {}

std::vector<std::string> Engine::report_metrics(const std::vector<std::string>& metrics) {
  std::vector<std::string> ids = metrics;
  ids.push_back("iprec_at_recall");
  return expand_metrics(ids);
}

ExperimentRecord Engine::create(const json& document) {
  return create(ExperimentDefinition::from_json(document));
}

ExperimentRecord Engine::create(const ExperimentDefinition& definition) {
  DatasetRecord dataset = store_.get_dataset(definition.dataset);
  for (const std::string& tag : definition.runs) {
    if (dataset.find_run(tag) == nullptr) {
      throw Error(ErrorCode::kUnknownRun,
                  "dataset '" + dataset.name + "' has no run '" + tag + "'", "runs");
    }
  }
  MaterializedSplit split = materialize_split(definition.split, dataset.topics);

  ExperimentRecord record;
  for (const FusionSpec& spec : definition.fusions) {
    check_spec_for_runs(spec, definition.runs, "fusions");
    check_trainable(spec, split, "split");
    FusionEntry entry;
    entry.spec = spec;
    entry.run_tag = spec.run_tag();
    record.fusions.push_back(std::move(entry));
  }
  if (definition.baseline != kBestComponentBaseline &&
      !contains(definition.runs, definition.baseline) &&
      std::none_of(record.fusions.begin(), record.fusions.end(),
                   [&](const FusionEntry& f) { return f.run_tag == definition.baseline; })) {
    throw Error(ErrorCode::kUnknownRun,
                "baseline '" + definition.baseline + "' is neither a run nor a fusion",
                "baseline");
  }

  record.definition_digest = definition.digest();
  record.id = store_.new_experiment_id(record.definition_digest);
  record.created = utc_timestamp();
  record.definition = definition.to_json();
  record.dataset_id = dataset.id;
  record.runs = definition.runs;
  record.split = std::move(split);
  record.metrics = definition.metrics;
  record.baseline = definition.baseline;
  record.include_components = definition.include_components;
  store_with_table(record);
  return record;
}

std::vector<std::string> Engine::component_tags(const ExperimentRecord& record) const {
  if (record.include_components) return record.runs;
  if (contains(record.runs, record.baseline)) return {record.baseline};
  return {};
}

Engine::Inputs Engine::load_inputs(const ExperimentRecord& record) const {
  Inputs in;
  in.dataset = store_.get_dataset(record.dataset_id);
  for (const std::string& tag : record.runs) {
    const RunRef* ref = in.dataset.find_run(tag);
    if (ref == nullptr) {
      throw Error(ErrorCode::kDatasetMissing,
                  "dataset " + record.dataset_id + " no longer has run '" + tag + "'",
                  "dataset");
    }
    in.runs.push_back(store_.load_run(ref->digest));
  }
  in.qrels = store_.load_qrels(in.dataset.qrels);
  return in;
}

std::string Engine::component_report(const ExperimentRecord& record, const Run& run,
                                      const Qrels& qrels) const {
  const std::vector<std::string> topics = record.split.test_topics();
  const std::vector<std::string> metrics = report_metrics(record.metrics);
  EvalReport report = evaluate(run, qrels, metrics, topics, options_.eval);
  report.run_tag = run.tag;
  return report.to_json().dump();
}

Engine::SpecOutput Engine::run_spec(const ExperimentRecord& record,
                                    const FusionEntry& entry,
                                    const Inputs& inputs) const {
  SpecOutput out;
  Run fused;
  fused.tag = entry.run_tag;
  for (std::size_t f = 0; f < record.split.folds.size(); ++f) {
    const Fold& fold = record.split.folds[f];
    std::optional<FusionModel> model;
    if (entry.spec.requires_training()) {
      model = train(entry.spec, inputs.runs, inputs.qrels, fold.train);
      std::string model_json = model->to_json().dump();
      out.models.push_back({f, model->training_topics, sha256_hex(model_json)});
      out.model_json.push_back(std::move(model_json));
    }
    Run part = fuse_run(entry.spec, model ? &*model : nullptr, inputs.runs, fold.test,
                        options_.fused_depth);
    for (auto& [topic, list] : part.topics) fused.topics[topic] = std::move(list);
  }
  out.fused_text = write_run(fused);

  // Evaluate what was stored, not the in-memory run.
  Run stored = parse_run(out.fused_text);
  const std::vector<std::string> topics = record.split.test_topics();
  EvalReport report = evaluate(stored, inputs.qrels, report_metrics(record.metrics),
                               topics, options_.eval);
  report.run_tag = entry.run_tag;
  out.report_json = report.to_json().dump();
  return out;
}

std::map<std::string, EvalReport> Engine::reports(const ExperimentRecord& record) const {
  std::map<std::string, EvalReport> out;
  for (const auto& [tag, digest] : record.component_reports) {
    out.emplace(tag, EvalReport::from_json(store_.get_json(digest)));
  }
  for (const FusionEntry& f : record.fusions) {
    if (f.status == SpecStatus::kDone) {
      out.emplace(f.run_tag, EvalReport::from_json(store_.get_json(f.report)));
    }
  }
  return out;
}

EvaluationTable Engine::table(const ExperimentRecord& record) const {
  return EvaluationTable::from_json(store_.get_json(record.table));
}

void Engine::store_with_table(ExperimentRecord& record) {
  EvaluationTable table = build_table(record, reports(record));
  record.table = store_.put_blob(table.to_json().dump());
  store_.put_experiment(record);
}

ExperimentRecord Engine::execute(const std::string& experiment_id) {
  store_.get_experiment_blob(experiment_id);  // NotFound before locking
  StoreLock lock = store_.lock_experiment(experiment_id);
  ExperimentRecord record = store_.get_experiment(experiment_id);

  std::vector<std::string> missing;
  for (const std::string& tag : component_tags(record)) {
    if (record.component_reports.count(tag) == 0) missing.push_back(tag);
  }
  if (missing.empty() && !record.has_pending()) return record;

  Inputs inputs = load_inputs(record);
  if (!missing.empty()) {
    for (std::size_t i = 0; i < record.runs.size(); ++i) {
      if (!contains(missing, record.runs[i])) continue;
      record.component_reports[record.runs[i]] =
          store_.put_blob(component_report(record, inputs.runs[i], inputs.qrels));
    }
    store_with_table(record);
  }

  for (FusionEntry& entry : record.fusions) {
    if (entry.status != SpecStatus::kPending) continue;
    try {
      if (options_.before_spec) options_.before_spec(entry);
      SpecOutput out = run_spec(record, entry, inputs);
      for (const std::string& model : out.model_json) store_.put_blob(model);
      entry.fused_run = store_.put_blob(out.fused_text);
      entry.report = store_.put_blob(out.report_json);
      entry.models = std::move(out.models);
      entry.status = SpecStatus::kDone;
    } catch (const Error& e) {
      if (e.category() == ErrorCategory::kUnavailable) throw;
      entry.status = SpecStatus::kFailed;
      entry.error = std::string(error_code_name(e.code())) + ": " + e.what();
    } catch (const std::exception& e) {
      entry.status = SpecStatus::kFailed;
      entry.error = e.what();
    }
    store_with_table(record);
  }
  return record;
}

ExperimentRecord Engine::append_fusion(const std::string& experiment_id,
                                       const json& spec_doc) {
  store_.get_experiment_blob(experiment_id);
  FusionSpec spec = FusionSpec::from_json(spec_doc);
  StoreLock lock = store_.lock_experiment(experiment_id);
  ExperimentRecord record = store_.get_experiment(experiment_id);
  for (const FusionEntry& f : record.fusions) {
    if (f.spec.identity() == spec.identity()) {
      throw Error(ErrorCode::kDuplicateSpec,
                  "experiment already contains " + spec.identity(), "algorithm");
    }
  }
  store_.get_dataset(record.dataset_id);
  check_spec_for_runs(spec, record.runs, "params");
  check_trainable(spec, record.split, "split");

  FusionEntry entry;
  entry.spec = spec;
  entry.run_tag = spec.run_tag();
  record.fusions.push_back(std::move(entry));
  store_with_table(record);
  return record;
}

ExperimentRecord Engine::add_fusion(const std::string& experiment_id,
                                    const json& spec_doc) {
  append_fusion(experiment_id, spec_doc);
  return execute(experiment_id);
}

VerifyReport Engine::verify(const std::string& experiment_id) const {
  ExperimentRecord record = store_.get_experiment(experiment_id);
  Inputs inputs = load_inputs(record);
  VerifyReport result;
  auto mismatch = [&](std::string what) {
    result.identical = false;
    result.mismatches.push_back(std::move(what));
  };

  std::map<std::string, EvalReport> recomputed;
  for (std::size_t i = 0; i < record.runs.size(); ++i) {
    auto it = record.component_reports.find(record.runs[i]);
    if (it == record.component_reports.end()) continue;
    std::string report = component_report(record, inputs.runs[i], inputs.qrels);
    if (sha256_hex(report) != it->second) mismatch("report of " + record.runs[i]);
    recomputed.emplace(record.runs[i], EvalReport::from_json(json::parse(report)));
  }
  for (const FusionEntry& entry : record.fusions) {
    if (entry.status != SpecStatus::kDone) continue;
    SpecOutput out = run_spec(record, entry, inputs);
    if (sha256_hex(out.fused_text) != entry.fused_run) mismatch("fused run " + entry.run_tag);
    if (sha256_hex(out.report_json) != entry.report) mismatch("report of " + entry.run_tag);
    if (out.models != entry.models) mismatch("models of " + entry.run_tag);
    recomputed.emplace(entry.run_tag, EvalReport::from_json(json::parse(out.report_json)));
  }

  EvaluationTable stored = table(record);
  EvaluationTable rebuilt = build_table(record, recomputed);
  if (stored.rows.size() != rebuilt.rows.size()) {
    mismatch("table row count");
  } else {
    for (std::size_t r = 0; r < stored.rows.size(); ++r) {
      for (const auto& [metric, value] : stored.rows[r].cells) {
        auto it = rebuilt.rows[r].cells.find(metric);
        if (it == rebuilt.rows[r].cells.end() ||
            std::bit_cast<std::uint64_t>(it->second) != std::bit_cast<std::uint64_t>(value)) {
          mismatch("cell " + stored.rows[r].system + "/" + metric);
        }
      }
    }
  }
  return result;
}

}  // namespace fuseval
