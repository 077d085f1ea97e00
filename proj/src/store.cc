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

#include "fuseval/store.h"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "fuseval/digest.h"
#include "fuseval/error.h"

namespace fuseval {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

bool is_digest(const std::string& s) {
  return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

std::string stem_of(const std::string& name) {
  std::string base = fs::path(name).filename().string();
  auto dot = base.find('.');
  return dot == std::string::npos ? base : base.substr(0, dot);
}

std::uint64_t random_nonce() {
  std::random_device rd;
  std::uint64_t hi = rd();
  std::uint64_t lo = rd();
  auto now = std::chrono::steady_clock::now().time_since_epoch().count();
  return ((hi << 32) | lo) ^ static_cast<std::uint64_t>(now);
}

}  // namespace

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                now.time_since_epoch()) % 1000;
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, static_cast<int>(ms.count()));
  return buf;
}

// ---- StoreLock ----

StoreLock& StoreLock::operator=(StoreLock&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

StoreLock::~StoreLock() {
  if (fd_ >= 0) ::close(fd_);
}

StoreLock StoreLock::acquire(const fs::path& path, std::chrono::milliseconds timeout) {
  int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw Error(ErrorCode::kIo, "cannot open lock file " + path.string() + ": " +
                                    std::strerror(errno));
  }
  auto deadline = std::chrono::steady_clock::now() + timeout;
  while (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
    if (errno != EWOULDBLOCK && errno != EINTR) {
      ::close(fd);
      throw Error(ErrorCode::kIo, "cannot lock " + path.string());
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      ::close(fd);
      throw Error(ErrorCode::kStoreLocked, "store is locked: " + path.string());
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return StoreLock(fd);
}

// ---- records ----

const RunRef* DatasetRecord::find_run(std::string_view tag) const {
  for (const RunRef& r : runs) {
    if (r.tag == tag) return &r;
  }
  return nullptr;
}

json DatasetRecord::to_json() const {
  json runs_json = json::array();
  for (const RunRef& r : runs) {
    runs_json.push_back({{"tag", r.tag}, {"digest", r.digest}, {"topics", r.topics}});
  }
  return json{{"id", id},         {"name", name},   {"note", note},
              {"created", created}, {"runs", runs_json}, {"qrels", qrels},
              {"topics", topics}, {"warnings", warnings}};
}

DatasetRecord DatasetRecord::from_json(const json& doc) {
  DatasetRecord d;
  d.id = doc.at("id").get<std::string>();
  d.name = doc.at("name").get<std::string>();
  d.note = doc.at("note").get<std::string>();
  d.created = doc.at("created").get<std::string>();
  for (const json& r : doc.at("runs")) {
    d.runs.push_back({r.at("tag").get<std::string>(), r.at("digest").get<std::string>(),
                      r.at("topics").get<std::size_t>()});
  }
  d.qrels = doc.at("qrels").get<std::string>();
  d.topics = doc.at("topics").get<std::vector<std::string>>();
  d.warnings = doc.at("warnings").get<std::vector<std::string>>();
  return d;
}

json ExperimentSummary::to_json() const {
  return json{{"id", id},
              {"created", created},
              {"status", status},
              {"dataset_id", dataset_id},
              {"definition_digest", definition_digest}};
}

// ---- Store ----

Store::Store(fs::path root, StoreOptions options)
    : root_(std::move(root)), options_(options) {
  std::error_code ec;
  fs::create_directories(root_ / "objects", ec);
  if (!ec) fs::create_directories(root_ / "locks", ec);
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot create store at " + root_.string() + ": " +
                                    ec.message());
  }
}

fs::path Store::default_root() {
  const char* env = std::getenv(kStoreEnvVar);
  if (env != nullptr && *env != '\0') return fs::path(env);
  return fs::path(kDefaultStoreDir);
}

fs::path Store::blob_path(const std::string& digest) const {
  return root_ / "objects" / digest.substr(0, 2) / digest;
}

std::string Store::put_blob(std::string_view bytes) {
  const std::string digest = sha256_hex(bytes);
  const fs::path path = blob_path(digest);
  std::error_code ec;
  if (fs::exists(path, ec)) return digest;
  fs::create_directories(path.parent_path(), ec);
  std::ostringstream tmp_name;
  tmp_name << ".tmp-" << std::hex << random_nonce();
  const fs::path tmp = path.parent_path() / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "cannot write blob " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot store blob " + digest);
  }
  return digest;
}

bool Store::has_blob(const std::string& digest) const {
  std::error_code ec;
  return is_digest(digest) && fs::exists(blob_path(digest), ec);
}

std::string Store::get_blob(const std::string& digest) const {
  if (!is_digest(digest)) throw Error(ErrorCode::kNotFound, "no blob '" + digest + "'");
  const fs::path path = blob_path(digest);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "no blob '" + digest + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (sha256_hex(bytes) != digest) {
    throw Error(ErrorCode::kStoreCorrupt, "blob " + digest + " fails verification");
  }
  return bytes;
}

json Store::get_json(const std::string& digest) const {
  json doc = json::parse(get_blob(digest), nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorCode::kStoreCorrupt, "blob " + digest + " is not a JSON document");
  }
  return doc;
}

std::vector<json> Store::manifest() const {
  std::vector<json> entries;
  std::ifstream in(root_ / "manifest.jsonl", std::ios::binary);
  if (!in) return entries;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string::npos) break;  // torn final line
    std::string_view line(content.data() + pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    json entry = json::parse(line, nullptr, false);
    if (entry.is_discarded() || !entry.is_object()) continue;
    entries.push_back(std::move(entry));
  }
  return entries;
}

void Store::append_manifest(const json& entry) {
  StoreLock lock = StoreLock::acquire(root_ / "lock", options_.lock_timeout);
  const fs::path path = root_ / "manifest.jsonl";
  int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  // Drop a torn tail left by an interrupted writer.
  off_t size = ::lseek(fd, 0, SEEK_END);
  off_t keep = size;
  while (keep > 0) {
    char c = 0;
    if (::pread(fd, &c, 1, keep - 1) != 1) break;
    if (c == '\n') break;
    --keep;
  }
  bool ok = keep == size || ::ftruncate(fd, keep) == 0;
  const std::string line = entry.dump() + "\n";
  ok = ok && ::pwrite(fd, line.data(), line.size(), keep) ==
                 static_cast<ssize_t>(line.size());
  ok = ok && ::fsync(fd) == 0;
  ::close(fd);
  if (!ok) throw Error(ErrorCode::kIo, "cannot append to " + path.string());
}

DatasetRecord Store::ingest_dataset(const std::string& name,
                                    const std::vector<NamedText>& runs,
                                    const NamedText& qrels, const std::string& note) {
  if (runs.empty()) throw Error(ErrorCode::kEmptyDataset, "a dataset needs at least one run", "runs");
  if (name.empty()) throw Error(ErrorCode::kInvalidDocument, "dataset name is empty", "name");

  ParsedQrels parsed_qrels = parse_qrels(qrels.text);
  DatasetRecord record;
  record.name = name;
  record.note = note;
  record.created = utc_timestamp();
  for (const auto& [topic, judgments] : parsed_qrels.qrels.topics) {
    record.topics.push_back(topic);
  }
  if (parsed_qrels.clamped_negative > 0) {
    record.warnings.push_back(std::to_string(parsed_qrels.clamped_negative) +
                              " negative grades clamped to 0");
  }

  std::vector<std::pair<std::string, std::string>> texts;  // tag, canonical text
  std::set<std::string> tags;
  for (const NamedText& file : runs) {
    Run run = parse_run(file.text);
    if (run.tag.empty()) run.tag = stem_of(file.name);
    if (!tags.insert(run.tag).second) {
      throw Error(ErrorCode::kDuplicateRunTag, "run tag '" + run.tag + "' appears twice", "runs");
    }
    std::size_t covered = 0;
    for (const auto& [topic, list] : run.topics) {
      if (parsed_qrels.qrels.find(topic) != nullptr) ++covered;
    }
    if (covered == 0) {
      record.warnings.push_back("run '" + run.tag + "' covers no qrels topic");
    } else if (covered < record.topics.size() || covered < run.topics.size()) {
      record.warnings.push_back("run '" + run.tag + "' covers " + std::to_string(covered) +
                                " of " + std::to_string(record.topics.size()) +
                                " qrels topics");
    }
    record.runs.push_back({run.tag, "", run.topics.size()});
    texts.emplace_back(run.tag, write_run(run));
  }

  for (std::size_t i = 0; i < texts.size(); ++i) {
    record.runs[i].digest = put_blob(texts[i].second);
  }
  record.qrels = put_blob(write_qrels(parsed_qrels.qrels));

  std::string id_source = name;
  for (const RunRef& r : record.runs) id_source += "\n" + r.tag + " " + r.digest;
  id_source += "\n" + record.qrels;
  record.id = sha256_hex(id_source).substr(0, 16);

  const std::string digest = put_blob(record.to_json().dump());
  append_manifest({{"kind", "dataset"}, {"id", record.id}, {"name", name}, {"digest", digest}});
  return record;
}

std::vector<DatasetRecord> Store::list_datasets() const {
  std::vector<std::string> order;
  std::map<std::string, std::string> latest;
  for (const json& e : manifest()) {
    if (e.value("kind", "") != "dataset") continue;
    const std::string id = e.value("id", "");
    if (latest.find(id) == latest.end()) order.push_back(id);
    latest[id] = e.value("digest", "");
  }
  std::vector<DatasetRecord> out;
  for (const std::string& id : order) {
    out.push_back(DatasetRecord::from_json(get_json(latest[id])));
  }
  return out;
}

DatasetRecord Store::get_dataset(const std::string& id_or_name) const {
  std::optional<std::string> by_id;
  std::optional<std::string> by_name;
  for (const json& e : manifest()) {
    if (e.value("kind", "") != "dataset") continue;
    if (e.value("id", "") == id_or_name) by_id = e.value("digest", "");
    if (e.value("name", "") == id_or_name) by_name = e.value("digest", "");
  }
  if (!by_id && !by_name) {
    throw Error(ErrorCode::kDatasetMissing, "unknown dataset '" + id_or_name + "'", "dataset");
  }
  return DatasetRecord::from_json(get_json(by_id ? *by_id : *by_name));
}

Run Store::load_run(const std::string& digest) const {
  return parse_run(get_blob(digest));
}

Qrels Store::load_qrels(const std::string& digest) const {
  return parse_qrels(get_blob(digest)).qrels;
}

void Store::put_experiment(const ExperimentRecord& record) {
  const std::string digest = put_blob(record.to_json().dump());
  append_manifest({{"kind", "experiment"},
                   {"id", record.id},
                   {"digest", digest},
                   {"created", record.created},
                   {"status", record.status()},
                   {"dataset_id", record.dataset_id},
                   {"definition_digest", record.definition_digest}});
}

std::string Store::get_experiment_blob(const std::string& id) const {
  std::optional<std::string> digest;
  for (const json& e : manifest()) {
    if (e.value("kind", "") == "experiment" && e.value("id", "") == id) {
      digest = e.value("digest", "");
    }
  }
  if (!digest) throw Error(ErrorCode::kNotFound, "unknown experiment '" + id + "'");
  return get_blob(*digest);
}

ExperimentRecord Store::get_experiment(const std::string& id) const {
  json doc = json::parse(get_experiment_blob(id), nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorCode::kStoreCorrupt, "experiment '" + id + "' is unreadable");
  }
  return ExperimentRecord::from_json(doc);
}

std::vector<ExperimentSummary> Store::list_experiments() const {
  std::vector<std::string> order;
  std::map<std::string, ExperimentSummary> latest;
  for (const json& e : manifest()) {
    if (e.value("kind", "") != "experiment") continue;
    ExperimentSummary s{e.value("id", ""),         e.value("created", ""),
                        e.value("status", ""),     e.value("dataset_id", ""),
                        e.value("definition_digest", ""), e.value("digest", "")};
    if (latest.find(s.id) == latest.end()) order.push_back(s.id);
    latest[s.id] = std::move(s);
  }
  std::vector<ExperimentSummary> out;
  for (auto it = order.rbegin(); it != order.rend(); ++it) out.push_back(latest[*it]);
  return out;
}

std::optional<std::string> Store::find_experiment_by_definition(
    const std::string& definition_digest) const {
  std::optional<std::string> found;
  for (const json& e : manifest()) {
    if (e.value("kind", "") == "experiment" &&
        e.value("definition_digest", "") == definition_digest) {
      found = e.value("id", "");
    }
  }
  return found;
}

std::string Store::new_experiment_id(const std::string& definition_digest) const {
  std::set<std::string> existing;
  for (const json& e : manifest()) {
    if (e.value("kind", "") == "experiment") existing.insert(e.value("id", ""));
  }
  for (;;) {
    std::string id =
        sha256_hex(definition_digest + std::to_string(random_nonce())).substr(0, 16);
    if (existing.count(id) == 0) return id;
  }
}

StoreLock Store::lock_experiment(const std::string& id,
                                 std::optional<std::chrono::milliseconds> timeout) const {
  return StoreLock::acquire(root_ / "locks" / (id + ".lock"),
                            timeout.value_or(options_.lock_timeout));
}

}  // namespace fuseval
