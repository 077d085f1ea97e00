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

#include "fuseval/export.h"

#include <charconv>
#include <cstdio>
#include <optional>

#include "fuseval/error.h"
#include "fuseval/zip.h"

namespace fuseval {
namespace {

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// Shortest text that parses back to the same double.
std::string exact(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

bool synthetic(RowKind kind) {
  return kind != RowKind::kComponent && kind != RowKind::kFusion;
}

// Components, fusions and synthetic rows are separated by rules.
int row_group(RowKind kind) {
  if (kind == RowKind::kComponent) return 0;
  return kind == RowKind::kFusion ? 1 : 2;
}

void require_complete(const EvaluationTable& table) {
  if (!table.pending.empty()) {
    throw Error(ErrorCode::kIncompleteTable,
                std::to_string(table.pending.size()) + " fusion specs are still pending");
  }
}

}  // namespace

std::string latex_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': case '%': case '$': case '#': case '_': case '{': case '}':
        out += '\\';
        out += c;
        break;
      case '~': out += "\\textasciitilde{}"; break;
      case '^': out += "\\textasciicircum{}"; break;
      case '\\': out += "\\textbackslash{}"; break;
      default: out += c;
    }
  }
  return out;
}

std::string export_latex(const EvaluationTable& table) {
  require_complete(table);
  std::string out;
  out += "% experiment: " + table.experiment_id + "\n";
  out += "% dataset: " + table.dataset_id + "\n";
  out += "% split: " + table.split_kind + ", " + std::to_string(table.test_topics.size()) +
         " test topics\n";
  out += "% baseline: " + table.baseline + "\n";
  for (const std::string& note : table.notes) out += "% " + note + "\n";

  // Best rendered value per column among real systems; ties all bold.
  std::map<std::string, double> best;
  for (const std::string& m : table.metrics) {
    for (const TableRow& row : table.rows) {
      if (synthetic(row.kind)) continue;
      double shown = std::stod(fixed4(row.cells.at(m)));
      auto it = best.find(m);
      if (it == best.end() || shown > it->second) best[m] = shown;
    }
  }

  out += "\\begin{tabular}{l" + std::string(table.metrics.size(), 'r') + "}\n";
  out += "\\hline\n";
  out += "System";
  for (const std::string& m : table.metrics) out += " & " + latex_escape(metric_label(m));
  out += " \\\\\n\\hline\n";

  std::optional<int> previous;
  for (const TableRow& row : table.rows) {
    const int group = row_group(row.kind);
    if (previous && *previous != group) out += "\\hline\n";
    previous = group;
    out += latex_escape(row.system);
    for (const std::string& m : table.metrics) {
      std::string cell = fixed4(row.cells.at(m));
      if (!synthetic(row.kind) && std::stod(cell) == best[m]) {
        cell = "\\textbf{" + cell + "}";
      }
      auto sig = row.significance.find(m);
      if (sig != row.significance.end()) {
        std::string_view marker = significance_marker(sig->second.t_test.p_value);
        if (marker == "†") cell += "$^\\dagger$";
        if (marker == "‡") cell += "$^\\ddagger$";
      }
      out += " & " + cell;
    }
    out += " \\\\\n";
  }
  out += "\\hline\n\\end{tabular}\n";
  return out;
}

std::string export_trec_run(const Store& store, const ExperimentRecord& record,
                            std::string_view spec) {
  const FusionEntry* entry = record.find_fusion(spec);
  if (entry == nullptr || entry->status != SpecStatus::kDone) {
    throw Error(ErrorCode::kNotFound, "no completed fusion '" + std::string(spec) +
                                          "' in experiment " + record.id, "spec");
  }
  return store.get_blob(entry->fused_run);
}

std::map<std::string, std::string> export_plot_data(
    const EvaluationTable& table, const std::map<std::string, EvalReport>& reports) {
  require_complete(table);
  std::map<std::string, std::string> files;
  for (const std::string& m : table.metrics) {
    std::string csv = "system,value\n";
    for (const TableRow& row : table.rows) {
      csv += csv_field(row.system) + "," + exact(row.cells.at(m)) + "\n";
    }
    files["bar_" + m + ".csv"] = std::move(csv);
  }
  std::string curve = "system,recall,iprec\n";
  for (const TableRow& row : table.rows) {
    if (synthetic(row.kind)) continue;
    const EvalReport& report = reports.at(row.system);
    for (std::size_t p = 0; p <= 10; ++p) {
      char recall[8];
      std::snprintf(recall, sizeof(recall), "%.1f", static_cast<double>(p) / 10.0);
      auto it = report.aggregates.find(iprec_metric_id(p));
      const double value = it == report.aggregates.end() ? 0.0 : it->second;
      curve += csv_field(row.system) + "," + recall + "," + exact(value) + "\n";
    }
  }
  files["pr_curve.csv"] = std::move(curve);
  return files;
}

std::string export_bundle(const Store& store, const ExperimentRecord& record,
                          const EvaluationTable& table,
                          const std::map<std::string, EvalReport>& reports) {
  std::map<std::string, std::string> files;
  files["table.tex"] = export_latex(table);
  for (auto& [name, content] : export_plot_data(table, reports)) {
    files["plots/" + name] = std::move(content);
  }
  for (const FusionEntry& f : record.fusions) {
    if (f.status == SpecStatus::kDone) {
      files["runs/" + f.run_tag + ".run"] = store.get_blob(f.fused_run);
    }
  }
  return write_zip(files);
}

}  // namespace fuseval
