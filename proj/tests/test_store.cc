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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>

#include "fuseval/digest.h"
#include "fuseval/engine.h"
#include "fuseval/error.h"
#include "fuseval/store.h"
#include "support/test_util.h"

namespace fuseval {
namespace {

namespace fs = std::filesystem;

const char* kRunA =
    "1 Q0 a 1 3.0 A\n1 Q0 b 2 2.0 A\n2 Q0 c 1 1.5 A\n2 Q0 a 2 0.5 A\n";
const char* kRunB = "1 Q0 b 1 9 B\n1 Q0 c 2 8 B\n2 Q0 a 1 7 B\n";
const char* kQrels = "1 0 a 1\n1 0 c 0\n2 0 a 2\n2 0 c 1\n3 0 z 1\n";

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kIo;
}

std::string read_bytes(const fs::path& p) { return read_file(p.string()); }

class StoreTest : public ::testing::Test {
 protected:
  testutil::TempDir dir_;
  Store store_{dir_.path() / "store"};

  DatasetRecord ingest(const std::string& name = "toy") {
    return store_.ingest_dataset(name, {{"a.run", kRunA}, {"b.run", kRunB}},
                                 {"qrels.txt", kQrels}, "synthetic");
  }
};

TEST_F(StoreTest, BlobRoundTripAndDedup) {
  const std::string digest = store_.put_blob("hello");
  EXPECT_EQ(digest, sha256_hex("hello"));
  EXPECT_EQ(store_.put_blob("hello"), digest);
  EXPECT_TRUE(store_.has_blob(digest));
  EXPECT_EQ(store_.get_blob(digest), "hello");
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(store_.root() / "objects")) {
    files += e.is_regular_file();
  }
  EXPECT_EQ(files, 1u);
  EXPECT_EQ(store_.put_blob(""), sha256_hex(""));
  EXPECT_EQ(store_.get_blob(sha256_hex("")), "");
}

TEST_F(StoreTest, MissingAndCorruptBlobs) {
  EXPECT_EQ(code_of([&] { store_.get_blob(sha256_hex("absent")); }), ErrorCode::kNotFound);
  EXPECT_EQ(code_of([&] { store_.get_blob("../../etc/passwd"); }), ErrorCode::kNotFound);
  const std::string digest = store_.put_blob("payload");
  fs::path path = store_.root() / "objects" / digest.substr(0, 2) / digest;
  ASSERT_TRUE(fs::exists(path));
  fs::permissions(path, fs::perms::owner_write, fs::perm_options::add);
  write_file(path.string(), "tampered");
  EXPECT_EQ(code_of([&] { store_.get_blob(digest); }), ErrorCode::kStoreCorrupt);
}

TEST_F(StoreTest, DatasetRoundTrip) {
  DatasetRecord d = ingest();
  EXPECT_EQ(d.id.size(), 16u);
  ASSERT_EQ(d.runs.size(), 2u);
  EXPECT_EQ(d.runs[0].tag, "A");
  EXPECT_EQ(d.topics, (std::vector<std::string>{"1", "2", "3"}));
  EXPECT_FALSE(d.warnings.empty());

  EXPECT_EQ(store_.get_dataset(d.id), d);
  EXPECT_EQ(store_.get_dataset("toy"), d);
  Store reopened(store_.root());
  EXPECT_EQ(reopened.list_datasets().size(), 1u);
  EXPECT_EQ(reopened.list_datasets()[0], d);

  fuseval::Run a = store_.load_run(d.runs[0].digest);
  EXPECT_EQ(a, parse_run(kRunA));
  EXPECT_EQ(store_.load_qrels(d.qrels), parse_qrels(kQrels).qrels);

  // Same content gives the same id and the same blobs.
  DatasetRecord again = ingest();
  EXPECT_EQ(again.id, d.id);
  EXPECT_EQ(again.runs, d.runs);
}

TEST_F(StoreTest, DatasetErrors) {
  EXPECT_EQ(code_of([&] { store_.ingest_dataset("x", {}, {"q", kQrels}); }),
            ErrorCode::kEmptyDataset);
  EXPECT_EQ(code_of([&] {
              store_.ingest_dataset("x", {{"a", kRunA}, {"a2", kRunA}}, {"q", kQrels});
            }),
            ErrorCode::kDuplicateRunTag);
  EXPECT_EQ(code_of([&] { store_.ingest_dataset("x", {{"a", "1 Q0 d\n"}}, {"q", kQrels}); }),
            ErrorCode::kMalformedLine);
  EXPECT_EQ(code_of([&] { store_.get_dataset("nope"); }), ErrorCode::kDatasetMissing);
  EXPECT_TRUE(store_.list_datasets().empty());
}

TEST_F(StoreTest, EmptyRunFileTakesFileStem) {
  DatasetRecord d = store_.ingest_dataset("x", {{"dir/empty.run", ""}, {"b", kRunB}},
                                          {"q", kQrels});
  EXPECT_EQ(d.runs[0].tag, "empty");
  EXPECT_EQ(d.runs[0].topics, 0u);
}

TEST_F(StoreTest, ExperimentRoundTripAndListing) {
  ingest();
  Engine engine(store_);
  ExperimentRecord first = engine.create(nlohmann::json{
      {"dataset", "toy"}, {"runs", {"A", "B"}}, {"fusions", {{{"algorithm", "combsum"}}}}});
  ExperimentRecord second = engine.create(nlohmann::json{
      {"dataset", "toy"}, {"runs", {"B", "A"}}, {"fusions", {{{"algorithm", "interleave"}}}}});
  EXPECT_EQ(store_.get_experiment(first.id), first);
  EXPECT_EQ(nlohmann::json::parse(store_.get_experiment_blob(first.id)), first.to_json());

  auto list = store_.list_experiments();
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(list[0].id, second.id);
  EXPECT_EQ(list[1].id, first.id);
  EXPECT_EQ(list[1].status, "pending");

  ExperimentRecord done = engine.execute(first.id);
  EXPECT_EQ(store_.get_experiment(first.id), done);
  EXPECT_EQ(store_.list_experiments()[1].status, "completed");
  EXPECT_EQ(store_.find_experiment_by_definition(first.definition_digest), first.id);
  EXPECT_EQ(code_of([&] { store_.get_experiment("ffff"); }), ErrorCode::kNotFound);
  EXPECT_NE(store_.new_experiment_id(first.definition_digest), first.id);
}

TEST_F(StoreTest, TornManifestLineIsIgnoredAndRepaired) {
  DatasetRecord d = ingest();
  const fs::path manifest = store_.root() / "manifest.jsonl";
  {
    std::ofstream out(manifest, std::ios::app | std::ios::binary);
    out << R"({"kind":"dataset","id":"deadbeef","na)";
  }
  Store reader(store_.root());
  EXPECT_EQ(reader.manifest().size(), 1u);
  EXPECT_EQ(reader.list_datasets().size(), 1u);

  DatasetRecord other = reader.ingest_dataset("second", {{"b", kRunB}}, {"q", kQrels});
  const std::string text = read_bytes(manifest);
  EXPECT_EQ(text.find("deadbeef"), std::string::npos);
  EXPECT_EQ(text.back(), '\n');
  Store fresh(store_.root());
  ASSERT_EQ(fresh.list_datasets().size(), 2u);
  EXPECT_EQ(fresh.get_dataset("second"), other);
  EXPECT_EQ(fresh.get_dataset(d.id), d);
}

TEST_F(StoreTest, LockTimeout) {
  ingest();
  StoreLock held = store_.lock_experiment("abc");
  EXPECT_EQ(code_of([&] { store_.lock_experiment("abc", std::chrono::milliseconds(50)); }),
            ErrorCode::kStoreLocked);
  StoreLock other = store_.lock_experiment("abd", std::chrono::milliseconds(50));

  StoreOptions quick;
  quick.lock_timeout = std::chrono::milliseconds(50);
  Store impatient(store_.root(), quick);
  StoreLock manifest_lock =
      StoreLock::acquire(store_.root() / "lock", std::chrono::milliseconds(50));
  EXPECT_EQ(code_of([&] { impatient.ingest_dataset("late", {{"b", kRunB}}, {"q", kQrels}); }),
            ErrorCode::kStoreLocked);
  manifest_lock = StoreLock();
  EXPECT_NO_THROW(impatient.ingest_dataset("late", {{"b", kRunB}}, {"q", kQrels}));
}

TEST(StoreRoot, EnvironmentOverride) {
  ::setenv(kStoreEnvVar, "/tmp/elsewhere", 1);
  EXPECT_EQ(Store::default_root(), fs::path("/tmp/elsewhere"));
  ::unsetenv(kStoreEnvVar);
  EXPECT_EQ(Store::default_root(), fs::path(kDefaultStoreDir));
}

TEST(StoreTimestamp, IsoUtc) {
  const std::string ts = utc_timestamp();
  ASSERT_EQ(ts.size(), 24u);
  EXPECT_EQ(ts[10], 'T');
  EXPECT_EQ(ts.back(), 'Z');
}

}  // namespace
}  // namespace fuseval
