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

#include "fuseval/experiment.h"

#include <algorithm>
#include <charconv>

#include "fuseval/digest.h"
#include "fuseval/error.h"
#include "fuseval/metrics.h"

namespace fuseval {
namespace {

using nlohmann::json;

const std::vector<std::string> kDefaultMetrics{"map", "P_10", "bpref", "ndcg",
                                               "set_recall"};

[[noreturn]] void invalid(const std::string& field, const std::string& message) {
  throw Error(ErrorCode::kInvalidDocument, message, field);
}

std::vector<std::string> string_array(const json& v, const std::string& field) {
  if (!v.is_array()) invalid(field, "'" + field + "' must be a list of strings");
  std::vector<std::string> out;
  for (const json& item : v) {
    if (!item.is_string()) invalid(field, "'" + field + "' must be a list of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

SpecStatus parse_status(const std::string& s) {
  if (s == "done") return SpecStatus::kDone;
  if (s == "failed") return SpecStatus::kFailed;
  return SpecStatus::kPending;
}

}  // namespace

ExperimentDefinition ExperimentDefinition::from_json(const json& doc) {
  if (!doc.is_object()) invalid("", "experiment document must be an object");
  static const std::vector<std::string> kKnown{
      "dataset", "runs", "split", "fusions", "metrics", "baseline", "components"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) {
      invalid(key, "unknown field '" + key + "'");
    }
  }

  ExperimentDefinition def;
  if (!doc.contains("dataset") || !doc["dataset"].is_string() ||
      doc["dataset"].get<std::string>().empty()) {
    invalid("dataset", "'dataset' must name a dataset");
  }
  def.dataset = doc["dataset"].get<std::string>();

  if (!doc.contains("runs")) invalid("runs", "'runs' must list at least one run");
  def.runs = string_array(doc["runs"], "runs");
  if (def.runs.empty()) invalid("runs", "'runs' must list at least one run");
  {
    std::vector<std::string> sorted = def.runs;
    std::sort(sorted.begin(), sorted.end());
    auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    if (dup != sorted.end()) invalid("runs", "run '" + *dup + "' is listed twice");
  }

  def.split = SplitPlan::from_json(doc.value("split", json()));

  if (doc.contains("fusions")) {
    const json& fusions = doc["fusions"];
    if (!fusions.is_array()) invalid("fusions", "'fusions' must be a list");
    for (const json& f : fusions) {
      FusionSpec spec = FusionSpec::from_json(f);
      for (const FusionSpec& existing : def.fusions) {
        if (existing.identity() == spec.identity()) {
          throw Error(ErrorCode::kDuplicateSpec,
                      "fusion " + spec.identity() + " is listed twice", "fusions");
        }
      }
      def.fusions.push_back(std::move(spec));
    }
  }

  std::vector<std::string> metrics = kDefaultMetrics;
  if (doc.contains("metrics")) metrics = string_array(doc["metrics"], "metrics");
  def.metrics = expand_metrics(metrics);

  if (doc.contains("baseline")) {
    if (!doc["baseline"].is_string() || doc["baseline"].get<std::string>().empty()) {
      invalid("baseline", "'baseline' must be a string");
    }
    def.baseline = doc["baseline"].get<std::string>();
  }
  if (doc.contains("components")) {
    if (!doc["components"].is_boolean()) invalid("components", "'components' must be true or false");
    def.include_components = doc["components"].get<bool>();
  }
  return def;
}

json ExperimentDefinition::to_json() const {
  json fusions_json = json::array();
  for (const FusionSpec& f : fusions) fusions_json.push_back(f.to_json());
  return json{{"dataset", dataset},
              {"runs", runs},
              {"split", split.to_json()},
              {"fusions", fusions_json},
              {"metrics", metrics},
              {"baseline", baseline},
              {"components", include_components}};
}

std::string ExperimentDefinition::digest() const {
  return sha256_hex(to_json().dump());
}

std::string_view spec_status_id(SpecStatus status) {
  switch (status) {
    case SpecStatus::kPending: return "pending";
    case SpecStatus::kDone: return "done";
    case SpecStatus::kFailed: return "failed";
  }
  return "pending";
}

bool ExperimentRecord::has_pending() const {
  return std::any_of(fusions.begin(), fusions.end(), [](const FusionEntry& f) {
    return f.status == SpecStatus::kPending;
  });
}

std::string ExperimentRecord::status() const {
  const bool components_done =
      !include_components || component_reports.size() == runs.size();
  const bool any_done =
      !component_reports.empty() ||
      std::any_of(fusions.begin(), fusions.end(), [](const FusionEntry& f) {
        return f.status != SpecStatus::kPending;
      });
  if (components_done && !has_pending()) return "completed";
  return any_done ? "partial" : "pending";
}

const FusionEntry* ExperimentRecord::find_fusion(std::string_view ref) const {
  for (const FusionEntry& f : fusions) {
    if (f.run_tag == ref) return &f;
  }
  const FusionEntry* by_algorithm = nullptr;
  std::size_t matches = 0;
  for (const FusionEntry& f : fusions) {
    if (algorithm_id(f.spec.algorithm) == ref) {
      by_algorithm = &f;
      ++matches;
    }
  }
  if (matches == 1) return by_algorithm;
  std::size_t index = 0;
  auto [ptr, ec] = std::from_chars(ref.data(), ref.data() + ref.size(), index);
  if (ec == std::errc() && ptr == ref.data() + ref.size() && index < fusions.size()) {
    return &fusions[index];
  }
  return nullptr;
}

json ExperimentRecord::to_json() const {
  json fusions_json = json::array();
  for (const FusionEntry& f : fusions) {
    json models = json::array();
    for (const ModelRef& m : f.models) {
      models.push_back({{"fold", m.fold},
                        {"training_topics", m.training_topics},
                        {"digest", m.digest}});
    }
    json entry = f.spec.to_json();
    entry["run_tag"] = f.run_tag;
    entry["status"] = std::string(spec_status_id(f.status));
    entry["error"] = f.error;
    entry["fused_run"] = f.fused_run;
    entry["report"] = f.report;
    entry["models"] = std::move(models);
    fusions_json.push_back(std::move(entry));
  }
  return json{{"id", id},
              {"created", created},
              {"status", status()},
              {"definition_digest", definition_digest},
              {"definition", definition},
              {"dataset_id", dataset_id},
              {"runs", runs},
              {"split", split.to_json()},
              {"fusions", std::move(fusions_json)},
              {"metrics", metrics},
              {"baseline", baseline},
              {"components", include_components},
              {"component_reports", component_reports},
              {"table", table}};
}

ExperimentRecord ExperimentRecord::from_json(const json& doc) {
  ExperimentRecord r;
  r.id = doc.at("id").get<std::string>();
  r.created = doc.at("created").get<std::string>();
  r.definition_digest = doc.at("definition_digest").get<std::string>();
  r.definition = doc.at("definition");
  r.dataset_id = doc.at("dataset_id").get<std::string>();
  r.runs = doc.at("runs").get<std::vector<std::string>>();
  r.split = MaterializedSplit::from_json(doc.at("split"));
  for (const json& f : doc.at("fusions")) {
    FusionEntry entry;
    entry.spec = FusionSpec::from_json(
        json{{"algorithm", f.at("algorithm")}, {"params", f.at("params")}});
    entry.run_tag = f.at("run_tag").get<std::string>();
    entry.status = parse_status(f.at("status").get<std::string>());
    entry.error = f.at("error").get<std::string>();
    entry.fused_run = f.at("fused_run").get<std::string>();
    entry.report = f.at("report").get<std::string>();
    for (const json& m : f.at("models")) {
      entry.models.push_back({m.at("fold").get<std::size_t>(),
                              m.at("training_topics").get<std::vector<std::string>>(),
                              m.at("digest").get<std::string>()});
    }
    r.fusions.push_back(std::move(entry));
  }
  r.metrics = doc.at("metrics").get<std::vector<std::string>>();
  r.baseline = doc.at("baseline").get<std::string>();
  r.include_components = doc.at("components").get<bool>();
  r.component_reports =
      doc.at("component_reports").get<std::map<std::string, std::string>>();
  r.table = doc.at("table").get<std::string>();
  return r;
}

}  // namespace fuseval
