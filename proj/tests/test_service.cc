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

#include <algorithm>
#include <condition_variable>
#include <map>
#include <mutex>

#include "httplib.h"
#include "fuseval/engine.h"
#include "fuseval/export.h"
#include "fuseval/service.h"
#include "fuseval/store.h"
#include "fuseval/zip.h"
#include "support/sample_data.h"
#include "support/test_util.h"

namespace fuseval {
namespace {

using nlohmann::json;

constexpr const char* kJsonType = "application/json";

// Blocks the engine before a chosen spec until released.
class Gate {
 public:
  void hold(const std::string& run_tag) {
    std::lock_guard<std::mutex> guard(mutex_);
    held_tag_ = run_tag;
  }
  void on_spec(const FusionEntry& entry) {
    std::unique_lock<std::mutex> lock(mutex_);
    if (entry.run_tag != held_tag_) return;
    reached_ = true;
    cv_.notify_all();
    cv_.wait(lock, [this] { return released_; });
  }
  void wait_reached() {
    std::unique_lock<std::mutex> lock(mutex_);
    cv_.wait(lock, [this] { return reached_; });
  }
  void release() {
    std::lock_guard<std::mutex> guard(mutex_);
    released_ = true;
    cv_.notify_all();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::string held_tag_;
  bool reached_ = false;
  bool released_ = false;
};

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    testutil::ingest_sample(store_);
    ServiceOptions options;
    options.engine.before_spec = [this](const FusionEntry& e) { gate_.on_spec(e); };
    service_ = std::make_unique<Service>(store_, options);
    const int port = service_->start();
    ASSERT_GT(port, 0);
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port);
    client_->set_read_timeout(30, 0);
  }
  void TearDown() override {
    gate_.release();
    service_->wait_for_jobs();
    service_->stop();
  }

  json definition(json fusions, json split = {{"kind", "all_test"}}) {
    return {{"dataset", "sample"},
            {"runs", {"alpha", "beta", "gamma", "delta"}},
            {"split", split},
            {"fusions", fusions},
            {"metrics", {"map", "P_10", "bpref", "ndcg"}}};
  }

  httplib::Result post(const std::string& path, const json& body) {
    return client_->Post(path, body.dump(), kJsonType);
  }

  std::string create(const json& def) {
    auto res = post("/api/experiments", def);
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 201) << res->body;
    return json::parse(res->body).at("id").get<std::string>();
  }

  json get_json(const std::string& path, int expected = 200) {
    auto res = client_->Get(path);
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, expected) << path << ": " << res->body;
    return json::parse(res->body);
  }

  static void expect_error(const httplib::Result& res, int status, const std::string& code,
                           const std::string& field = "") {
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, status) << res->body;
    json body = json::parse(res->body);
    ASSERT_TRUE(body.contains("error")) << res->body;
    EXPECT_EQ(body["error"]["code"], code);
    EXPECT_TRUE(body["error"]["message"].is_string());
    if (!field.empty()) {
      EXPECT_EQ(body["error"]["field"], field);
    }
  }

  std::string run_to_completion(const json& def) {
    const std::string id = create(def);
    auto res = client_->Post("/api/experiments/" + id + "/execute", "", kJsonType);
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 202) << res->body;
    service_->wait_for_jobs();
    return id;
  }

  testutil::TempDir dir_;
  Store store_{dir_.path() / "store"};
  Gate gate_;
  std::unique_ptr<Service> service_;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(ServiceTest, RegistriesListAlgorithmsAndMetrics) {
  json algorithms = get_json("/api/algorithms");
  ASSERT_TRUE(algorithms.is_array());
  std::vector<std::string> ids;
  for (const json& a : algorithms) ids.push_back(a.at("algorithm"));
  for (const char* id : {"interleave", "combsum", "combmnz", "linear", "probfuse", "segfuse",
                         "slidefuse"}) {
    EXPECT_NE(std::find(ids.begin(), ids.end(), id), ids.end()) << id;
  }
  for (const json& a : algorithms) {
    const bool trained = a["requires_training"].get<bool>();
    if (a["algorithm"] == "probfuse") {
      EXPECT_TRUE(trained);
    }
    if (a["algorithm"] == "combsum") {
      EXPECT_FALSE(trained);
    }
  }

  json metrics = get_json("/api/metrics");
  ASSERT_TRUE(metrics.is_array());
  bool has_map = false;
  for (const json& m : metrics) has_map = has_map || m.at("metric") == "map";
  EXPECT_TRUE(has_map);
}

TEST_F(ServiceTest, DatasetUploadAsJson) {
  const std::string run_text = read_file(testutil::sample_dir() + "/alpha.run");
  const std::string qrels_text = read_file(testutil::sample_dir() + "/qrels.txt");
  auto res = post("/api/datasets", {{"name", "json-upload"},
                                    {"note", "from a test"},
                                    {"runs", {{{"name", "alpha.run"}, {"text", run_text}}}},
                                    {"qrels", {{"name", "qrels.txt"}, {"text", qrels_text}}}});
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 201) << res->body;
  json created = json::parse(res->body);
  EXPECT_EQ(created["name"], "json-upload");

  json listed = get_json("/api/datasets");
  ASSERT_TRUE(listed.is_array());
  bool found = false;
  for (const json& d : listed) found = found || d["id"] == created["id"];
  EXPECT_TRUE(found);
  EXPECT_EQ(listed.size(), 2u);
}

TEST_F(ServiceTest, DatasetUploadAsMultipart) {
  httplib::MultipartFormDataItems items{
      {"name", "multipart-upload", "", ""},
      {"note", "form", "", ""},
      {"runs", read_file(testutil::sample_dir() + "/alpha.run"), "alpha.run", "text/plain"},
      {"runs", read_file(testutil::sample_dir() + "/beta.run"), "beta.run", "text/plain"},
      {"qrels", read_file(testutil::sample_dir() + "/qrels.txt"), "qrels.txt", "text/plain"},
  };
  auto res = client_->Post("/api/datasets", items);
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 201) << res->body;
  json created = json::parse(res->body);
  EXPECT_EQ(created["name"], "multipart-upload");
  EXPECT_EQ(created["runs"].size(), 2u);
}

TEST_F(ServiceTest, DatasetUploadErrors) {
  expect_error(post("/api/datasets", {{"name", "x"}, {"runs", json::array()}}), 400,
               "InvalidDocument", "qrels");
  expect_error(client_->Post("/api/datasets", "{not json", kJsonType), 400, "InvalidDocument",
               "body");
}

TEST_F(ServiceTest, CreateReturnsStoredRecord) {
  auto res = post("/api/experiments", definition({{{"algorithm", "combsum"}}}));
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 201) << res->body;
  json record = json::parse(res->body);
  const std::string id = record["id"];
  EXPECT_EQ(record["status"], "pending");

  auto got = client_->Get("/api/experiments/" + id);
  ASSERT_TRUE(got);
  EXPECT_EQ(got->status, 200);
  EXPECT_EQ(got->body, store_.get_experiment_blob(id));
  EXPECT_EQ(got->body, res->body);

  json listed = get_json("/api/experiments");
  ASSERT_EQ(listed.size(), 1u);
  EXPECT_EQ(listed[0]["id"], id);
}

TEST_F(ServiceTest, CreateValidationErrorsNameTheField) {
  json overlapping = definition({{{"algorithm", "combsum"}}},
                                {{"kind", "holdout"},
                                 {"train", {"301", "302", "303"}},
                                 {"test", {"303", "304"}}});
  expect_error(post("/api/experiments", overlapping), 400, "OverlappingSplit", "split");

  json unknown_run = definition({{{"algorithm", "combsum"}}});
  unknown_run["runs"] = {"alpha", "nope"};
  expect_error(post("/api/experiments", unknown_run), 400, "UnknownRun", "runs");

  json trained_all_test = definition({{{"algorithm", "probfuse"}}});
  auto res = post("/api/experiments", trained_all_test);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400) << res->body;

  json unknown_dataset = definition({{{"algorithm", "combsum"}}});
  unknown_dataset["dataset"] = "missing";
  res = post("/api/experiments", unknown_dataset);
  ASSERT_TRUE(res);
  EXPECT_GE(res->status, 400);
  EXPECT_LT(res->status, 500);
  EXPECT_TRUE(store_.list_experiments().empty());
}

TEST_F(ServiceTest, ExecuteThenNoop) {
  const std::string id = create(definition({{{"algorithm", "combsum"}}, {{"algorithm", "combmnz"}}}));
  auto res = client_->Post("/api/experiments/" + id + "/execute", "", kJsonType);
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 202) << res->body;
  json accepted = json::parse(res->body);
  EXPECT_EQ(accepted["experiment"], id);
  EXPECT_TRUE(accepted.contains("job"));
  EXPECT_TRUE(accepted["split"].is_object());
  service_->wait_for_jobs();

  json results = get_json("/api/experiments/" + id + "/results");
  EXPECT_EQ(results["experiment"]["status"], "completed");
  EXPECT_EQ(results["job"]["state"], "done");
  EXPECT_TRUE(results["table"]["pending"].empty());
  EXPECT_GE(results["table"]["rows"].size(), 6u);

  res = client_->Post("/api/experiments/" + id + "/execute", "", kJsonType);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  json noop = json::parse(res->body);
  EXPECT_TRUE(noop["noop"].get<bool>());
  EXPECT_EQ(noop["table"], results["table"]);
}

TEST_F(ServiceTest, PartialResultsAreVisibleWhileRunning) {
  const std::string id = create(definition({{{"algorithm", "combsum"}}, {{"algorithm", "combmnz"}}}));
  const std::string held = store_.get_experiment(id).fusions[1].run_tag;
  gate_.hold(held);
  auto res = client_->Post("/api/experiments/" + id + "/execute", "", kJsonType);
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 202);
  gate_.wait_reached();

  json partial = get_json("/api/experiments/" + id + "/results");
  EXPECT_EQ(partial["experiment"]["status"], "partial");
  EXPECT_EQ(partial["job"]["state"], "running");
  EXPECT_EQ(partial["table"]["pending"], json::array({held}));
  bool first_done = false;
  for (const json& row : partial["table"]["rows"]) {
    EXPECT_NE(row["system"], held);
    first_done = first_done || row["system"] == store_.get_experiment(id).fusions[0].run_tag;
  }
  EXPECT_TRUE(first_done);

  gate_.release();
  service_->wait_for_jobs();
  json done = get_json("/api/experiments/" + id + "/results");
  EXPECT_EQ(done["experiment"]["status"], "completed");
  EXPECT_TRUE(done["table"]["pending"].empty());
}

TEST_F(ServiceTest, AddFusionKeepsEarlierCells) {
  const std::string id = run_to_completion(definition({{{"algorithm", "combsum"}}}));
  json before = get_json("/api/experiments/" + id + "/results")["table"];

  auto res = post("/api/experiments/" + id + "/fusions", {{"algorithm", "combmnz"}});
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 202) << res->body;
  const std::string tag = json::parse(res->body)["run_tag"];
  service_->wait_for_jobs();

  json after = get_json("/api/experiments/" + id + "/results")["table"];
  std::map<std::string, json> after_rows;
  for (const json& row : after["rows"]) after_rows[row["system"]] = row;
  for (const json& row : before["rows"]) {
    ASSERT_TRUE(after_rows.count(row["system"])) << row["system"];
    EXPECT_EQ(after_rows[row["system"]]["cells"], row["cells"]) << row["system"];
  }
  EXPECT_TRUE(after_rows.count(tag));

  expect_error(post("/api/experiments/" + id + "/fusions", {{"algorithm", "combmnz"}}), 409,
               "DuplicateSpec");
  const std::string blob = store_.get_experiment_blob(id);
  auto missing = post("/api/experiments/" + id + "/fusions",
                      {{"algorithm", "linear"}, {"params", {{"weights", {{"alpha", 1.0}}}}}});
  expect_error(missing, 400, "MissingWeight");
  EXPECT_EQ(store_.get_experiment_blob(id), blob);
}

TEST_F(ServiceTest, UnknownExperimentIsNotFound) {
  const std::string id = "0123456789abcdef";
  expect_error(client_->Get("/api/experiments/" + id), 404, "NotFound");
  expect_error(client_->Get("/api/experiments/" + id + "/results"), 404, "NotFound");
  expect_error(client_->Post("/api/experiments/" + id + "/execute", "", kJsonType), 404,
               "NotFound");
  expect_error(post("/api/experiments/" + id + "/fusions", {{"algorithm", "combsum"}}), 404,
               "NotFound");
  expect_error(client_->Get("/api/experiments/" + id + "/export?format=latex"), 404, "NotFound");
}

TEST_F(ServiceTest, ExportFormats) {
  const std::string id = run_to_completion(
      definition({{{"algorithm", "combsum"}}, {{"algorithm", "combmnz"}}}));
  ExperimentRecord record = store_.get_experiment(id);
  Engine engine(store_);
  EvaluationTable table = engine.table(record);
  const std::string base = "/api/experiments/" + id + "/export";

  auto latex = client_->Get(base + "?format=latex");
  ASSERT_TRUE(latex);
  EXPECT_EQ(latex->status, 200);
  EXPECT_EQ(latex->body, export_latex(table));

  const std::string tag = record.fusions[0].run_tag;
  auto trec = client_->Get(base + "?format=trec&spec=" + tag);
  ASSERT_TRUE(trec);
  EXPECT_EQ(trec->status, 200);
  EXPECT_EQ(trec->body, store_.get_blob(record.fusions[0].fused_run));
  expect_error(client_->Get(base + "?format=trec"), 400, "InvalidDocument", "spec");

  auto plot = export_plot_data(table, engine.reports(record));
  json csv = get_json(base + "?format=csv");
  ASSERT_EQ(csv.size(), plot.size());
  for (const auto& [file, content] : plot) EXPECT_EQ(csv[file], content) << file;
  const std::string first = plot.begin()->first;
  auto one = client_->Get(base + "?format=csv&series=" + first);
  ASSERT_TRUE(one);
  EXPECT_EQ(one->status, 200);
  EXPECT_EQ(one->body, plot.begin()->second);
  expect_error(client_->Get(base + "?format=csv&series=nope"), 404, "NotFound", "series");

  auto bundle = client_->Get(base + "?format=bundle");
  ASSERT_TRUE(bundle);
  EXPECT_EQ(bundle->status, 200);
  EXPECT_EQ(bundle->get_header_value("Content-Type"), "application/zip");
  auto files = read_zip(bundle->body);
  EXPECT_FALSE(files.empty());
  auto again = client_->Get(base + "?format=bundle");
  ASSERT_TRUE(again);
  EXPECT_EQ(again->body, bundle->body);

  expect_error(client_->Get(base + "?format=pdf"), 400, "InvalidDocument", "format");
}

}  // namespace
}  // namespace fuseval
