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

#include "fuseval/error.h"
#include "fuseval/experiment.h"

namespace fuseval {
namespace {

using nlohmann::json;

constexpr const char* kMedianNote =
    "Median component: with an even number of components the lower of the "
    "two middle values is reported.";
constexpr const char* kMarkerNote =
    "Markers: paired two-tailed t-test against the baseline; "
    "† p < 0.05, ‡ p < 0.01.";

RowKind parse_row_kind(const std::string& s) {
  if (s == "fusion") return RowKind::kFusion;
  if (s == "best_component") return RowKind::kBestComponent;
  if (s == "mean_component") return RowKind::kMeanComponent;
  if (s == "median_component") return RowKind::kMedianComponent;
  return RowKind::kComponent;
}

TableRow row_from_report(const EvalReport& report, RowKind kind,
                         const std::vector<std::string>& metrics) {
  TableRow row;
  row.system = report.run_tag;
  row.kind = kind;
  for (const std::string& m : metrics) {
    auto it = report.aggregates.find(m);
    row.cells[m] = it == report.aggregates.end() ? 0.0 : it->second;
  }
  return row;
}

const EvalReport* report_for(const std::map<std::string, EvalReport>& reports,
                             const std::string& tag) {
  auto it = reports.find(tag);
  return it == reports.end() ? nullptr : &it->second;
}

}  // namespace

std::string_view row_kind_id(RowKind kind) {
  switch (kind) {
    case RowKind::kComponent: return "component";
    case RowKind::kFusion: return "fusion";
    case RowKind::kBestComponent: return "best_component";
    case RowKind::kMeanComponent: return "mean_component";
    case RowKind::kMedianComponent: return "median_component";
  }
  return "component";
}

std::string_view significance_marker(double p_value) {
  if (p_value < 0.01) return "‡";
  if (p_value < 0.05) return "†";
  return "";
}

const TableRow* EvaluationTable::find_row(std::string_view system) const {
  for (const TableRow& row : rows) {
    if (row.system == system) return &row;
  }
  return nullptr;
}

EvaluationTable build_table(const ExperimentRecord& record,
                            const std::map<std::string, EvalReport>& reports) {
  EvaluationTable table;
  table.experiment_id = record.id;
  table.dataset_id = record.dataset_id;
  table.split_kind = std::string(split_kind_id(record.split.kind));
  table.metrics = record.metrics;
  table.test_topics = record.split.test_topics();
  table.baseline = record.baseline;

  std::vector<const EvalReport*> components;
  if (record.include_components) {
    for (const std::string& tag : record.runs) {
      const EvalReport* report = report_for(reports, tag);
      if (report == nullptr) continue;
      components.push_back(report);
      table.rows.push_back(row_from_report(*report, RowKind::kComponent, record.metrics));
    }
  }

  std::vector<const EvalReport*> fused;
  for (const FusionEntry& f : record.fusions) {
    if (f.status == SpecStatus::kPending) {
      table.pending.push_back(f.run_tag);
      continue;
    }
    if (f.status == SpecStatus::kFailed) {
      table.notes.push_back("Fusion " + f.run_tag + " failed: " + f.error);
      continue;
    }
    const EvalReport* report = report_for(reports, f.run_tag);
    if (report == nullptr) continue;
    fused.push_back(report);
    table.rows.push_back(row_from_report(*report, RowKind::kFusion, record.metrics));
  }

  if (!components.empty()) {
    TableRow best{"best component", RowKind::kBestComponent, {}, {}};
    TableRow mean{"mean component", RowKind::kMeanComponent, {}, {}};
    TableRow median{"median component", RowKind::kMedianComponent, {}, {}};
    for (const std::string& m : record.metrics) {
      std::vector<double> values;
      for (const TableRow& row : table.rows) {
        if (row.kind == RowKind::kComponent) values.push_back(row.cells.at(m));
      }
      double sum = 0.0;
      for (double v : values) sum += v;
      std::vector<double> sorted = values;
      std::sort(sorted.begin(), sorted.end());
      best.cells[m] = sorted.back();
      mean.cells[m] = sum / static_cast<double>(values.size());
      median.cells[m] = sorted[(sorted.size() - 1) / 2];
    }
    table.rows.push_back(std::move(best));
    table.rows.push_back(std::move(mean));
    table.rows.push_back(std::move(median));
    table.notes.push_back(kMedianNote);
  }

  // Significance of every real row against the baseline, per metric.
  bool any_test = false;
  for (const std::string& m : record.metrics) {
    const EvalReport* baseline = nullptr;
    if (record.baseline == kBestComponentBaseline) {
      for (const EvalReport* c : components) {
        if (baseline == nullptr ||
            c->aggregates.at(m) > baseline->aggregates.at(m)) {
          baseline = c;
        }
      }
    } else {
      baseline = report_for(reports, record.baseline);
    }
    if (baseline == nullptr) continue;
    for (TableRow& row : table.rows) {
      if (row.kind != RowKind::kComponent && row.kind != RowKind::kFusion) continue;
      if (row.system == baseline->run_tag) continue;
      const EvalReport& treatment = reports.at(row.system);
      PairedSample sample = pair_reports(*baseline, treatment, m);
      if (sample.topics.size() < 2) continue;
      row.significance[m] = SignificanceMark{
          baseline->run_tag, paired_t_test(sample), wilcoxon_signed_rank(sample)};
      any_test = true;
    }
  }
  if (any_test) {
    table.notes.push_back(kMarkerNote);
    table.notes.push_back(kWilcoxonCaveat);
  } else if (record.baseline == kBestComponentBaseline && components.empty()) {
    table.notes.push_back(
        "No significance tests: the best-component baseline needs component rows.");
  }
  return table;
}

json EvaluationTable::to_json() const {
  json rows_json = json::array();
  for (const TableRow& row : rows) {
    json sig = json::object();
    for (const auto& [metric, mark] : row.significance) {
      sig[metric] = {{"baseline", mark.baseline},
                     {"t_test", mark.t_test.to_json()},
                     {"wilcoxon", mark.wilcoxon.to_json()},
                     {"marker", std::string(significance_marker(mark.t_test.p_value))}};
    }
    rows_json.push_back({{"system", row.system},
                         {"kind", std::string(row_kind_id(row.kind))},
                         {"cells", row.cells},
                         {"significance", std::move(sig)}});
  }
  return json{{"experiment_id", experiment_id},
              {"dataset_id", dataset_id},
              {"split_kind", split_kind},
              {"metrics", metrics},
              {"test_topics", test_topics},
              {"baseline", baseline},
              {"rows", std::move(rows_json)},
              {"pending", pending},
              {"notes", notes}};
}

EvaluationTable EvaluationTable::from_json(const json& doc) {
  EvaluationTable t;
  t.experiment_id = doc.at("experiment_id").get<std::string>();
  t.dataset_id = doc.at("dataset_id").get<std::string>();
  t.split_kind = doc.at("split_kind").get<std::string>();
  t.metrics = doc.at("metrics").get<std::vector<std::string>>();
  t.test_topics = doc.at("test_topics").get<std::vector<std::string>>();
  t.baseline = doc.at("baseline").get<std::string>();
  for (const json& r : doc.at("rows")) {
    TableRow row;
    row.system = r.at("system").get<std::string>();
    row.kind = parse_row_kind(r.at("kind").get<std::string>());
    row.cells = r.at("cells").get<std::map<std::string, double>>();
    for (const auto& [metric, mark] : r.at("significance").items()) {
      row.significance[metric] =
          SignificanceMark{mark.at("baseline").get<std::string>(),
                           TestResult::from_json(mark.at("t_test")),
                           TestResult::from_json(mark.at("wilcoxon"))};
    }
    t.rows.push_back(std::move(row));
  }
  t.pending = doc.at("pending").get<std::vector<std::string>>();
  t.notes = doc.at("notes").get<std::vector<std::string>>();
  return t;
}

}  // namespace fuseval
