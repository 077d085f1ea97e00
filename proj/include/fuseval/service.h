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

// HTTP/JSON API over the store and the engine.
//
// Routes:
//   GET  /api/datasets
//   POST /api/datasets                       multipart: name, note, runs*, qrels
//   GET  /api/algorithms
//   GET  /api/metrics
//   GET  /api/experiments
//   POST /api/experiments                    experiment document
//   POST /api/experiments/{id}/execute       202 + job, or 200 when complete
//   POST /api/experiments/{id}/fusions       {algorithm, params}
//   GET  /api/experiments/{id}               stored record, verbatim
//   GET  /api/experiments/{id}/results       {experiment, table, job}
//   GET  /api/experiments/{id}/export?format=latex|trec|csv|bundle
//                                            [&spec=<run tag>] [&series=<file>]
//
// Errors are {"error": {"code", "field", "message"}} with status 400
// (validation), 404 (not found), 409 (duplicate spec), 503 (store locked) or
// 500 (I/O).

#pragma once

#include <memory>
#include <string>

#include "fuseval/engine.h"
#include "fuseval/store.h"

namespace fuseval {

struct ServiceOptions {
  EngineOptions engine;
};

class Service {
 public:
  Service(Store& store, ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Blocks serving on host:port until stop().
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port, serves on a background thread and returns the
  // port (or -1).
  int start(const std::string& host = "127.0.0.1");
  void stop();
  // Waits for every running execution job.
  void wait_for_jobs();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fuseval
