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

#include <gtest/gtest.h>

#include <functional>
#include <regex>
#include <sstream>

#include "fuseval/digest.h"
#include "fuseval/engine.h"
#include "fuseval/error.h"
#include "fuseval/export.h"
#include "fuseval/zip.h"
#include "support/latex_check.h"
#include "support/sample_data.h"
#include "support/test_util.h"

namespace fuseval {
namespace {

using nlohmann::json;

TableRow row(const std::string& system, RowKind kind, std::map<std::string, double> cells) {
  TableRow r;
  r.system = system;
  r.kind = kind;
  r.cells = std::move(cells);
  return r;
}

EvaluationTable small_table() {
  EvaluationTable t;
  t.experiment_id = "e1";
  t.dataset_id = "d1";
  t.split_kind = "all_test";
  t.metrics = {"map"};
  t.test_topics = {"1", "2"};
  t.baseline = "a";
  t.rows = {row("a", RowKind::kComponent, {{"map", 0.25}}),
            row("b_x", RowKind::kFusion, {{"map", 0.5}})};
  return t;
}

std::vector<std::string> body_rows(const std::string& tex) {
  std::vector<std::string> out;
  std::istringstream in(tex);
  std::string line;
  while (std::getline(in, line)) {
    if (line.size() > 2 && line.substr(line.size() - 2) == "\\\\") out.push_back(line);
  }
  return out;
}

TEST(Latex, BoldsColumnMaximum) {
  auto rows = body_rows(export_latex(small_table()));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], "System & MAP \\\\");
  EXPECT_EQ(rows[1], "a & 0.2500 \\\\");
  EXPECT_EQ(rows[2], "b\\_x & \\textbf{0.5000} \\\\");
}

TEST(Latex, TiesAreAllBold) {
  EvaluationTable t = small_table();
  t.rows[0].cells["map"] = 0.50004;
  auto rows = body_rows(export_latex(t));
  EXPECT_EQ(rows[1], "a & \\textbf{0.5000} \\\\");
  EXPECT_EQ(rows[2], "b\\_x & \\textbf{0.5000} \\\\");
}

TEST(Latex, SignificanceMarkers) {
  EvaluationTable t = small_table();
  SignificanceMark mark;
  mark.baseline = "a";
  mark.t_test.p_value = 0.03;
  t.rows[1].significance["map"] = mark;
  EXPECT_EQ(body_rows(export_latex(t))[2], "b\\_x & \\textbf{0.5000}$^\\dagger$ \\\\");
  t.rows[1].significance["map"].t_test.p_value = 0.004;
  EXPECT_EQ(body_rows(export_latex(t))[2], "b\\_x & \\textbf{0.5000}$^\\ddagger$ \\\\");
  t.rows[1].significance["map"].t_test.p_value = 0.05;
  EXPECT_EQ(body_rows(export_latex(t))[2], "b\\_x & \\textbf{0.5000} \\\\");
}

TEST(Latex, HeaderAndPendingTable) {
  EvaluationTable t = small_table();
  const std::string tex = export_latex(t);
  EXPECT_EQ(tex.rfind("% experiment: e1\n% dataset: d1\n% split: all_test, 2 test topics\n", 0), 0u);
  t.pending = {"combsum-00000000"};
  try {
    export_latex(t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIncompleteTable);
  }
}

TEST(Latex, Escaping) {
  EXPECT_EQ(latex_escape("a_b&c%d#e$f{g}h~i^j\\k"),
            "a\\_b\\&c\\%d\\#e\\$f\\{g\\}h\\textasciitilde{}i\\textasciicircum{}j"
            "\\textbackslash{}k");
}

TEST(Latex, GoldenTableMatchesAndIsWellFormed) {
  const std::string dir = testutil::data_dir() + "/golden";
  EvaluationTable table = EvaluationTable::from_json(json::parse(read_file(dir + "/table.json")));
  const std::string golden = read_file(dir + "/table.tex");
  const std::string tex = export_latex(table);
  EXPECT_EQ(tex, golden);
  EXPECT_EQ(testutil::latex_tabular_problems(golden), std::vector<std::string>{});
}

TEST(Latex, StructuralCheckRejectsBrokenTables) {
  EXPECT_FALSE(testutil::latex_tabular_problems("\\begin{tabular}{lr}\na & b & c \\\\\n\\end{tabular}\n").empty());
  EXPECT_FALSE(testutil::latex_tabular_problems("\\begin{tabular}{lr}\na & {b \\\\\n\\end{tabular}\n").empty());
  EXPECT_FALSE(testutil::latex_tabular_problems("\\begin{tabular}{lr}\na_b & 1 \\\\\n\\end{tabular}\n").empty());
  EXPECT_FALSE(testutil::latex_tabular_problems("\\begin{tabular}{lr}\na & 1 \\\\\n").empty());
  EXPECT_TRUE(testutil::latex_tabular_problems("\\begin{tabular}{lr}\n\\hline\na & \\textbf{1}$^\\dagger$ \\\\\n\\end{tabular}\n").empty());
}

class ExportTest : public ::testing::Test {
 protected:
  void SetUp() override {
    testutil::ingest_sample(store_);
    json def = json::parse(read_file(testutil::data_dir() + "/export_fidelity/experiment.json"));
    record_ = engine_.execute(engine_.create(def).id);
  }

  testutil::TempDir dir_;
  Store store_{dir_.path() / "store"};
  Engine engine_{store_};
  ExperimentRecord record_;
};

TEST_F(ExportTest, PipelineReproducesGoldenLatex) {
  EvaluationTable table = engine_.table(record_);
  table.experiment_id = "golden";
  EXPECT_EQ(export_latex(table), read_file(testutil::data_dir() + "/golden/table.tex"));
}

TEST_F(ExportTest, TrecExportEqualsStoredBlob) {
  for (const FusionEntry& f : record_.fusions) {
    const std::string text = export_trec_run(store_, record_, f.run_tag);
    EXPECT_EQ(text, store_.get_blob(f.fused_run));
    fuseval::Run parsed = parse_run(text);
    EXPECT_EQ(parsed.tag, f.run_tag);
    EXPECT_EQ(write_run(parsed), text);
  }
  EXPECT_EQ(export_trec_run(store_, record_, "combsum"),
            store_.get_blob(record_.fusions[0].fused_run));
  EXPECT_THROW(export_trec_run(store_, record_, "condorcet"), Error);
}

TEST_F(ExportTest, FailedSpecHasNoTrecExport) {
  EngineOptions options;
  options.before_spec = [](const FusionEntry&) { throw Error(ErrorCode::kIo, "boom"); };
  Engine failing(store_, options);
  ExperimentRecord appended = failing.add_fusion(
      record_.id, {{"algorithm", "probfuse"}, {"params", {{"segments", 9}}}});
  ASSERT_EQ(appended.fusions.back().status, SpecStatus::kFailed);
  try {
    export_trec_run(store_, appended, appended.fusions.back().run_tag);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
}

TEST_F(ExportTest, ExportedRunsMatchReferenceEvaluation) {
  json expected = json::parse(read_file(testutil::data_dir() + "/export_fidelity/expected.json"));
  EXPECT_EQ(expected["test_topics"].get<std::vector<std::string>>(), record_.split.test_topics());
  auto reports = engine_.reports(record_);
  ASSERT_EQ(expected["runs"].size(), record_.fusions.size());
  for (const FusionEntry& f : record_.fusions) {
    const json& want = expected["runs"].at(f.run_tag);
    EXPECT_EQ(sha256_hex(export_trec_run(store_, record_, f.run_tag)), want["sha256"]) << f.run_tag;
    for (auto& [metric, value] : want["aggregates"].items()) {
      EXPECT_NEAR(reports.at(f.run_tag).aggregates.at(metric), value.get<double>(), 1e-4)
          << f.run_tag << " " << metric;
    }
  }
}

TEST_F(ExportTest, PlotSeries) {
  EvaluationTable table = engine_.table(record_);
  auto files = export_plot_data(table, engine_.reports(record_));
  ASSERT_TRUE(files.count("bar_map.csv"));
  ASSERT_TRUE(files.count("pr_curve.csv"));
  std::istringstream bar(files.at("bar_map.csv"));
  std::string line;
  std::getline(bar, line);
  EXPECT_EQ(line, "system,value");
  std::size_t bars = 0;
  while (std::getline(bar, line)) {
    const std::string system = line.substr(0, line.find(','));
    const TableRow* r = table.find_row(system);
    ASSERT_NE(r, nullptr) << line;
    EXPECT_EQ(std::stod(line.substr(line.find(',') + 1)), r->cells.at("map"));
    ++bars;
  }
  EXPECT_EQ(bars, table.rows.size());

  std::map<std::string, int> points;
  std::istringstream pr(files.at("pr_curve.csv"));
  std::getline(pr, line);
  EXPECT_EQ(line, "system,recall,iprec");
  while (std::getline(pr, line)) ++points[line.substr(0, line.find(','))];
  EXPECT_EQ(points.size(), record_.runs.size() + record_.fusions.size());
  for (auto& [system, n] : points) EXPECT_EQ(n, 11) << system;
}

TEST_F(ExportTest, EmptyMetricSelectionKeepsCurve) {
  json def = json::parse(read_file(testutil::data_dir() + "/export_fidelity/experiment.json"));
  def["metrics"] = json::array();
  def["fusions"] = {{{"algorithm", "combsum"}}};
  ExperimentRecord r = engine_.execute(engine_.create(def).id);
  auto files = export_plot_data(engine_.table(r), engine_.reports(r));
  EXPECT_EQ(files.size(), 1u);
  EXPECT_TRUE(files.count("pr_curve.csv"));
  auto bundle = read_zip(export_bundle(store_, r, engine_.table(r), engine_.reports(r)));
  EXPECT_TRUE(bundle.count("plots/pr_curve.csv"));
  EXPECT_TRUE(bundle.count("table.tex"));
}

TEST_F(ExportTest, BundleIsDeterministicAndComplete) {
  EvaluationTable table = engine_.table(record_);
  auto reports = engine_.reports(record_);
  const std::string a = export_bundle(store_, record_, table, reports);
  const std::string b = export_bundle(store_, store_.get_experiment(record_.id),
                                      engine_.table(store_.get_experiment(record_.id)),
                                      engine_.reports(record_));
  EXPECT_EQ(a, b);
  auto files = read_zip(a);
  EXPECT_EQ(files.at("table.tex"), export_latex(table));
  for (const FusionEntry& f : record_.fusions) {
    EXPECT_EQ(files.at("runs/" + f.run_tag + ".run"), store_.get_blob(f.fused_run));
  }
  for (auto& [name, content] : export_plot_data(table, reports)) {
    EXPECT_EQ(files.at("plots/" + name), content);
  }
  EXPECT_EQ(files.size(), 1 + record_.fusions.size() + table.metrics.size() + 1);
}

TEST_F(ExportTest, PendingSpecsBlockTableExports) {
  ExperimentRecord pending = engine_.append_fusion(
      record_.id, {{"algorithm", "probfuse"}, {"params", {{"segments", 3}}}});
  EvaluationTable table = engine_.table(pending);
  EXPECT_EQ(table.pending.size(), 1u);
  try {
    export_bundle(store_, pending, table, engine_.reports(pending));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIncompleteTable);
  }
  EXPECT_THROW(export_plot_data(table, engine_.reports(pending)), Error);
}

TEST(Zip, RoundTrip) {
  std::map<std::string, std::string> files{{"a.txt", "hello"},
                                           {"dir/empty", ""},
                                           {"big.bin", std::string(100000, 'x')}};
  const std::string archive = write_zip(files);
  EXPECT_EQ(read_zip(archive), files);
  EXPECT_EQ(write_zip(files), archive);
  EXPECT_THROW(read_zip("not a zip"), Error);
}

}  // namespace
}  // namespace fuseval
