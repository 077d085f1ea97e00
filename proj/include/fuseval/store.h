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

// Plain-directory experiment store.
//
// Layout under the store root:
//
//   manifest.jsonl          one JSON entry per line, append-only
//   objects/<aa>/<digest>   immutable blobs named by their SHA-256
//   lock                    advisory lock serializing manifest appends
//   locks/<id>.lock         per-experiment execution locks
//
// Manifest entries are {"kind": "dataset" | "experiment", "id", "digest",
// ...}; the blob `digest` holds the full record. A later entry for the same
// id supersedes earlier ones. A final line without a terminating newline is
// a torn write and is ignored by readers; the next writer cuts it off.

#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fuseval/experiment.h"
#include "fuseval/trec_io.h"
#include "json.hpp"

namespace fuseval {

inline constexpr const char* kStoreEnvVar = "FUSEVAL_STORE";
inline constexpr const char* kDefaultStoreDir = "fuseval-store";

struct RunRef {
  std::string tag;
  std::string digest;
  std::size_t topics = 0;

  friend bool operator==(const RunRef&, const RunRef&) = default;
};

struct DatasetRecord {
  std::string id;
  std::string name;
  std::string note;
  std::string created;
  std::vector<RunRef> runs;
  std::string qrels;  // blob digest
  std::vector<std::string> topics;  // qrels topics, sorted
  std::vector<std::string> warnings;

  const RunRef* find_run(std::string_view tag) const;

  nlohmann::json to_json() const;
  static DatasetRecord from_json(const nlohmann::json& doc);

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

struct ExperimentSummary {
  std::string id;
  std::string created;
  std::string status;
  std::string dataset_id;
  std::string definition_digest;
  std::string digest;

  nlohmann::json to_json() const;
};

// Named input file: the name is used as the run tag when the file is empty.
struct NamedText {
  std::string name;
  std::string text;
};

struct StoreOptions {
  std::chrono::milliseconds lock_timeout{5000};
};

// RAII holder of an advisory file lock.
class StoreLock {
 public:
  StoreLock() = default;
  StoreLock(StoreLock&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  StoreLock& operator=(StoreLock&& other) noexcept;
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;
  ~StoreLock();

  // Throws kStoreLocked when the lock is not acquired within `timeout`.
  static StoreLock acquire(const std::filesystem::path& path,
                           std::chrono::milliseconds timeout);

 private:
  explicit StoreLock(int fd) : fd_(fd) {}
  int fd_ = -1;
};

class Store {
 public:
  explicit Store(std::filesystem::path root, StoreOptions options = {});

  // $FUSEVAL_STORE, or ./fuseval-store.
  static std::filesystem::path default_root();

  const std::filesystem::path& root() const { return root_; }

  // Blobs.
  std::string put_blob(std::string_view bytes);
  // Throws kNotFound for unknown digests and kStoreCorrupt when the content
  // no longer matches its digest.
  std::string get_blob(const std::string& digest) const;
  bool has_blob(const std::string& digest) const;
  nlohmann::json get_json(const std::string& digest) const;

  // Datasets.
  DatasetRecord ingest_dataset(const std::string& name,
                               const std::vector<NamedText>& runs,
                               const NamedText& qrels,
                               const std::string& note = {});
  std::vector<DatasetRecord> list_datasets() const;
  // Looks up by id, then by name (latest wins). Throws kDatasetMissing.
  DatasetRecord get_dataset(const std::string& id_or_name) const;
  Run load_run(const std::string& digest) const;
  Qrels load_qrels(const std::string& digest) const;

  // Experiments.
  void put_experiment(const ExperimentRecord& record);
  ExperimentRecord get_experiment(const std::string& id) const;
  // Exact stored bytes of the latest record.
  std::string get_experiment_blob(const std::string& id) const;
  std::vector<ExperimentSummary> list_experiments() const;  // newest first
  std::optional<std::string> find_experiment_by_definition(
      const std::string& definition_digest) const;
  // Fresh id for a definition, checked against existing ids.
  std::string new_experiment_id(const std::string& definition_digest) const;

  StoreLock lock_experiment(const std::string& id,
                            std::optional<std::chrono::milliseconds> timeout = {}) const;

  // Parsed manifest entries in file order, skipping a torn final line.
  std::vector<nlohmann::json> manifest() const;

 private:
  std::filesystem::path blob_path(const std::string& digest) const;
  void append_manifest(const nlohmann::json& entry);

  std::filesystem::path root_;
  StoreOptions options_;
};

std::string utc_timestamp();

}  // namespace fuseval
