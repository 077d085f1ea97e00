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

#include "fuseval/service.h"

#include <map>
#include <mutex>
#include <thread>

#include "fuseval/error.h"
#include "fuseval/export.h"
#include "fuseval/metrics.h"
#include "httplib.h"

namespace fuseval {
namespace {

using nlohmann::json;

constexpr const char* kJson = "application/json";

int http_status(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kValidation: return 400;
    case ErrorCategory::kNotFound: return 404;
    case ErrorCategory::kConflict: return 409;
    case ErrorCategory::kUnavailable: return 503;
    case ErrorCategory::kIo: return 500;
  }
  return 500;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, int status, std::string_view code,
                const std::string& field, const std::string& message) {
  send_json(res, status,
            {{"error", {{"code", std::string(code)}, {"field", field}, {"message", message}}}});
}

json parse_body(const httplib::Request& req) {
  json doc = json::parse(req.body, nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorCode::kInvalidDocument, "request body is not valid JSON", "body");
  }
  return doc;
}

}  // namespace

struct Service::Impl {
  struct Job {
    std::thread thread;
    std::string state = "running";  // running, done, failed
    std::string error;
  };

  Impl(Store& s, ServiceOptions o) : store(s), options(std::move(o)), engine(store, options.engine) {
    routes();
  }

  Store& store;
  ServiceOptions options;
  Engine engine;
  httplib::Server server;
  std::thread listener;
  std::mutex jobs_mutex;
  std::map<std::string, std::shared_ptr<Job>> jobs;

  // Wraps a handler so that every Error becomes a structured response.
  template <typename F>
  httplib::Server::Handler guarded(F handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const Error& e) {
        send_error(res, http_status(e.category()), error_code_name(e.code()), e.field(),
                   e.what());
      } catch (const json::exception& e) {
        send_error(res, 400, "InvalidDocument", "body", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "Internal", "", e.what());
      }
    };
  }

  json job_json(const std::string& id) {
    std::lock_guard<std::mutex> guard(jobs_mutex);
    auto it = jobs.find(id);
    if (it == jobs.end()) return nullptr;
    json j{{"experiment", id}, {"state", it->second->state}};
    if (!it->second->error.empty()) j["error"] = it->second->error;
    return j;
  }

  // Starts an execution job unless one is already running.
  void launch(const std::string& id) {
    std::lock_guard<std::mutex> guard(jobs_mutex);
    auto& slot = jobs[id];
    if (slot && slot->state == "running") return;
    if (slot && slot->thread.joinable()) slot->thread.join();
    auto job = std::make_shared<Job>();
    slot = job;
    job->thread = std::thread([this, id, job] {
      std::string state = "done";
      std::string error;
      try {
        do {
          engine.execute(id);
        } while (store.get_experiment(id).has_pending());
      } catch (const std::exception& e) {
        state = "failed";
        error = e.what();
      }
      std::lock_guard<std::mutex> inner(jobs_mutex);
      job->state = state;
      job->error = error;
    });
  }

  void join_all() {
    std::vector<std::shared_ptr<Job>> all;
    {
      std::lock_guard<std::mutex> guard(jobs_mutex);
      for (auto& [id, job] : jobs) all.push_back(job);
    }
    for (auto& job : all) {
      if (job->thread.joinable()) job->thread.join();
    }
  }

  json results(const std::string& id) {
    const std::string blob = store.get_experiment_blob(id);
    json record = json::parse(blob);
    json table = store.get_json(record.at("table").get<std::string>());
    return json{{"experiment", std::move(record)}, {"table", std::move(table)}, {"job", job_json(id)}};
  }

  void routes() {
    server.Get("/api/algorithms", guarded([](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, algorithm_registry());
    }));
    server.Get("/api/metrics", guarded([](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, metric_registry_json());
    }));

    server.Get("/api/datasets", guarded([this](const httplib::Request&, httplib::Response& res) {
      json out = json::array();
      for (const DatasetRecord& d : store.list_datasets()) out.push_back(d.to_json());
      send_json(res, 200, out);
    }));

    server.Post("/api/datasets", guarded([this](const httplib::Request& req,
                                                httplib::Response& res) {
      std::string name;
      std::string note;
      std::vector<NamedText> runs;
      NamedText qrels;
      bool have_qrels = false;
      if (req.is_multipart_form_data()) {
        name = req.get_file_value("name").content;
        note = req.get_file_value("note").content;
        for (const auto& f : req.get_file_values("runs")) {
          runs.push_back({f.filename.empty() ? f.name : f.filename, f.content});
        }
        if (req.has_file("qrels")) {
          auto f = req.get_file_value("qrels");
          qrels = {f.filename, f.content};
          have_qrels = true;
        }
      } else {
        json doc = parse_body(req);
        name = doc.value("name", "");
        note = doc.value("note", "");
        for (const json& r : doc.value("runs", json::array())) {
          runs.push_back({r.value("name", ""), r.value("text", "")});
        }
        if (doc.contains("qrels")) {
          qrels = {doc["qrels"].value("name", ""), doc["qrels"].value("text", "")};
          have_qrels = true;
        }
      }
      if (!have_qrels) {
        throw Error(ErrorCode::kInvalidDocument, "a qrels file is required", "qrels");
      }
      send_json(res, 201, store.ingest_dataset(name, runs, qrels, note).to_json());
    }));

    server.Get("/api/experiments", guarded([this](const httplib::Request&,
                                                  httplib::Response& res) {
      json out = json::array();
      for (const ExperimentSummary& s : store.list_experiments()) out.push_back(s.to_json());
      send_json(res, 200, out);
    }));

    server.Post("/api/experiments", guarded([this](const httplib::Request& req,
                                                   httplib::Response& res) {
      ExperimentRecord record = engine.create(parse_body(req));
      res.status = 201;
      res.set_content(store.get_experiment_blob(record.id), kJson);
    }));

    server.Post(R"(/api/experiments/([0-9a-f]+)/execute)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string id = req.matches[1];
                  ExperimentRecord record = store.get_experiment(id);
                  if (record.status() == "completed") {
                    json body = results(id);
                    body["noop"] = true;
                    send_json(res, 200, body);
                    return;
                  }
                  launch(id);
                  send_json(res, 202, {{"job", job_json(id)},
                                       {"experiment", id},
                                       {"split", record.split.to_json()}});
                }));

    server.Post(R"(/api/experiments/([0-9a-f]+)/fusions)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string id = req.matches[1];
                  ExperimentRecord record = engine.append_fusion(id, parse_body(req));
                  launch(id);
                  send_json(res, 202, {{"job", job_json(id)},
                                       {"experiment", id},
                                       {"run_tag", record.fusions.back().run_tag},
                                       {"split", record.split.to_json()}});
                }));

    server.Get(R"(/api/experiments/([0-9a-f]+))",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 res.status = 200;
                 res.set_content(store.get_experiment_blob(req.matches[1]), kJson);
               }));

    server.Get(R"(/api/experiments/([0-9a-f]+)/results)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, 200, results(req.matches[1]));
               }));

    server.Get(R"(/api/experiments/([0-9a-f]+)/export)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 export_handler(req, res);
               }));
  }

  void export_handler(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    ExperimentRecord record = store.get_experiment(id);
    const std::string format = req.get_param_value("format");
    if (format == "trec") {
      if (!req.has_param("spec")) {
        throw Error(ErrorCode::kInvalidDocument, "format=trec needs a spec", "spec");
      }
      res.set_content(export_trec_run(store, record, req.get_param_value("spec")),
                      "text/plain");
      return;
    }
    EvaluationTable table = engine.table(record);
    if (format == "latex") {
      res.set_content(export_latex(table), "application/x-tex");
    } else if (format == "csv") {
      auto files = export_plot_data(table, engine.reports(record));
      if (req.has_param("series")) {
        std::string series = req.get_param_value("series");
        if (series.size() < 4 || series.substr(series.size() - 4) != ".csv") series += ".csv";
        auto it = files.find(series);
        if (it == files.end()) {
          throw Error(ErrorCode::kNotFound, "no series '" + series + "'", "series");
        }
        res.set_content(it->second, "text/csv");
      } else {
        send_json(res, 200, files);
      }
    } else if (format == "bundle") {
      res.set_header("Content-Disposition",
                     "attachment; filename=\"" + id + ".zip\"");
      res.set_content(export_bundle(store, record, table, engine.reports(record)),
                      "application/zip");
    } else {
      throw Error(ErrorCode::kInvalidDocument,
                  "format must be one of latex, trec, csv, bundle", "format");
    }
  }
};

Service::Service(Store& store, ServiceOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {}

Service::~Service() {
  stop();
  impl_->join_all();
}

bool Service::listen(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

int Service::start(const std::string& host) {
  int port = impl_->server.bind_to_any_port(host);
  if (port < 0) return -1;
  impl_->listener = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void Service::stop() {
  impl_->server.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
}

void Service::wait_for_jobs() { impl_->join_all(); }

}  // namespace fuseval
