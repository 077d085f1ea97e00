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

// fuseval command-line interface.
//
//   fuseval fuse --algorithm ID --run A.run [--run B.run ...] [--param k=v ...]
//                [--qrels Q --train TOPICS] [--output F]
//   fuseval eval --run F --qrels Q [--metric M ...] [--depth N]
//   fuseval dataset ingest --name N --run A.run ... --qrels Q [--note TEXT]
//   fuseval dataset list
//   fuseval exp create --file DEF.json
//   fuseval exp run (--file DEF.json | --id ID)
//   fuseval exp add --id ID --algorithm ID [--param k=v ...]
//   fuseval exp list | show --id ID | verify --id ID
//   fuseval export --id ID --format latex|trec|csv|bundle [--spec S]
//                  [--series NAME] [--output PATH]
//   fuseval serve [--host H] [--port N]
//
// --store PATH (or $FUSEVAL_STORE) selects the store. Exit status: 0 on
// success, 1 for invalid input, 2 for I/O and storage failures.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "fuseval/engine.h"
#include "fuseval/error.h"
#include "fuseval/export.h"
#include "fuseval/fusion.h"
#include "fuseval/metrics.h"
#include "fuseval/service.h"
#include "fuseval/store.h"
#include "fuseval/trec_io.h"

namespace {

using fuseval::Error;
using fuseval::ErrorCode;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitIo = 2;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

json param_value(const std::string& v) {
  char* end = nullptr;
  double d = std::strtod(v.c_str(), &end);
  if (!v.empty() && end == v.c_str() + v.size()) {
    if (v.find_first_of(".eE") == std::string::npos) return static_cast<long long>(d);
    return d;
  }
  return v;
}

// "--param k=v" pairs into a spec document. Linear weights are given as
// weight.<tag>=w or weights=<tag>:<w>,<tag>:<w>.
json spec_document(const std::string& algorithm, const std::vector<std::string>& params) {
  json p = json::object();
  for (const std::string& kv : params) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidParameter, "parameter '" + kv + "' is not k=v", "params");
    }
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if (key.rfind("weight.", 0) == 0) {
      p["weights"][key.substr(7)] = param_value(value);
    } else if (key == "weights") {
      for (const std::string& item : split_list(value)) {
        auto colon = item.rfind(':');
        if (colon == std::string::npos) {
          throw Error(ErrorCode::kInvalidParameter, "weight '" + item + "' is not tag:w",
                      "params");
        }
        p["weights"][item.substr(0, colon)] = param_value(item.substr(colon + 1));
      }
    } else {
      p[key] = param_value(value);
    }
  }
  return json{{"algorithm", algorithm}, {"params", p}};
}

std::string table_text(const fuseval::EvaluationTable& table) {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-24s", "system");
  out += buf;
  for (const std::string& m : table.metrics) {
    std::snprintf(buf, sizeof(buf), " %12s", m.c_str());
    out += buf;
  }
  out += "\n";
  for (const fuseval::TableRow& row : table.rows) {
    std::snprintf(buf, sizeof(buf), "%-24s", row.system.c_str());
    out += buf;
    for (const std::string& m : table.metrics) {
      std::string_view marker;
      auto sig = row.significance.find(m);
      if (sig != row.significance.end()) {
        marker = fuseval::significance_marker(sig->second.t_test.p_value);
      }
      std::snprintf(buf, sizeof(buf), " %12.4f", row.cells.at(m));
      out += buf;
      out += marker.empty() ? std::string(" ") : std::string(marker);
    }
    out += "\n";
  }
  for (const std::string& tag : table.pending) out += "pending: " + tag + "\n";
  return out;
}

void print_experiment(const fuseval::ExperimentRecord& record,
                      const fuseval::Engine& engine) {
  std::cout << "experiment " << record.id << " (" << record.status() << ")\n";
  std::cout << table_text(engine.table(record));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IR data fusion evaluation platform"};
  app.require_subcommand(1);
  std::string store_path;
  app.add_option("--store", store_path, "Store directory (default $FUSEVAL_STORE)");

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Fuse runs");
  std::string algorithm;
  std::vector<std::string> run_files;
  std::vector<std::string> params;
  std::string qrels_file;
  std::string train_topics;
  std::string output;
  fuse->add_option("--algorithm", algorithm, "Algorithm id")->required();
  fuse->add_option("--run", run_files, "Run file (repeat; order matters)")->required();
  fuse->add_option("--param", params, "Parameter k=v (repeatable)");
  fuse->add_option("--qrels", qrels_file, "Qrels for trained algorithms");
  fuse->add_option("--train", train_topics, "Comma-separated training topics");
  fuse->add_option("--output,-o", output, "Output file (default stdout)");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a run");
  std::string eval_run;
  std::vector<std::string> metrics;
  std::size_t depth = fuseval::kDefaultEvalDepth;
  eval->add_option("--run", eval_run, "Run file")->required();
  eval->add_option("--qrels", qrels_file, "Qrels file")->required();
  eval->add_option("--metric,-m", metrics, "Metric id or family (repeatable)");
  eval->add_option("--depth", depth, "Evaluation depth");

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Manage datasets");
  dataset->require_subcommand(1);
  auto* ingest = dataset->add_subcommand("ingest", "Ingest runs and qrels");
  std::string name;
  std::string note;
  ingest->add_option("--name", name, "Dataset name")->required();
  ingest->add_option("--run", run_files, "Run file (repeatable)")->required();
  ingest->add_option("--qrels", qrels_file, "Qrels file")->required();
  ingest->add_option("--note", note, "Provenance note");
  auto* dataset_list = dataset->add_subcommand("list", "List datasets");

  // exp
  auto* exp = app.add_subcommand("exp", "Manage experiments");
  exp->require_subcommand(1);
  std::string def_file;
  std::string exp_id;
  auto* exp_create = exp->add_subcommand("create", "Create an experiment");
  exp_create->add_option("--file", def_file, "Experiment definition (JSON)")->required();
  auto* exp_run = exp->add_subcommand("run", "Create if needed and execute");
  auto* run_file_opt = exp_run->add_option("--file", def_file, "Experiment definition");
  exp_run->add_option("--id", exp_id, "Experiment id")->excludes(run_file_opt);
  auto* exp_add = exp->add_subcommand("add", "Add a fusion spec to an experiment");
  exp_add->add_option("--id", exp_id, "Experiment id")->required();
  exp_add->add_option("--algorithm", algorithm, "Algorithm id")->required();
  exp_add->add_option("--param", params, "Parameter k=v (repeatable)");
  auto* exp_list = exp->add_subcommand("list", "List experiments, newest first");
  auto* exp_show = exp->add_subcommand("show", "Show an experiment");
  exp_show->add_option("--id", exp_id, "Experiment id")->required();
  bool show_json = false;
  exp_show->add_flag("--json", show_json, "Print the stored record");
  auto* exp_verify = exp->add_subcommand("verify", "Recompute and compare an experiment");
  exp_verify->add_option("--id", exp_id, "Experiment id")->required();

  // export
  auto* exp_export = app.add_subcommand("export", "Export experiment artifacts");
  std::string format;
  std::string spec;
  std::string series;
  exp_export->add_option("--id", exp_id, "Experiment id")->required();
  exp_export->add_option("--format", format, "latex, trec, csv or bundle")
      ->required()
      ->check(CLI::IsMember({"latex", "trec", "csv", "bundle"}));
  exp_export->add_option("--spec", spec, "Fusion run tag or algorithm id (trec)");
  exp_export->add_option("--series", series, "Single CSV series (csv)");
  exp_export->add_option("--output,-o", output, "Output file or directory");

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  auto open_store = [&]() {
    return fuseval::Store(store_path.empty() ? fuseval::Store::default_root()
                                             : std::filesystem::path(store_path));
  };
  auto emit = [&](const std::string& content) {
    if (output.empty()) {
      std::cout << content;
    } else {
      fuseval::write_file(output, content);
    }
  };

  try {
    if (*fuse) {
      std::vector<fuseval::Run> runs;
      std::set<std::string> topics;
      for (const std::string& f : run_files) {
        runs.push_back(fuseval::parse_run(fuseval::read_file(f)));
        for (const auto& [topic, list] : runs.back().topics) topics.insert(topic);
      }
      fuseval::FusionSpec fspec = fuseval::FusionSpec::from_json(spec_document(algorithm, params));
      std::vector<std::string> tags;
      for (const fuseval::Run& r : runs) tags.push_back(r.tag);
      fspec.validate_for_runs(tags);
      std::optional<fuseval::FusionModel> model;
      if (fspec.requires_training()) {
        if (qrels_file.empty()) {
          throw Error(ErrorCode::kNoTrainingTopics, "trained algorithms need --qrels", "qrels");
        }
        fuseval::Qrels qrels = fuseval::parse_qrels(fuseval::read_file(qrels_file)).qrels;
        model = fuseval::train(fspec, runs, qrels, split_list(train_topics));
      }
      std::vector<std::string> topic_list(topics.begin(), topics.end());
      emit(fuseval::write_run(
          fuseval::fuse_run(fspec, model ? &*model : nullptr, runs, topic_list)));
    } else if (*eval) {
      fuseval::Run run = fuseval::parse_run(fuseval::read_file(eval_run));
      fuseval::Qrels qrels = fuseval::parse_qrels(fuseval::read_file(qrels_file)).qrels;
      if (metrics.empty()) metrics = {"map", "P_10", "bpref", "ndcg", "set_recall"};
      fuseval::EvalOptions options;
      options.depth = depth;
      fuseval::EvalReport report = fuseval::evaluate(run, qrels, metrics, std::nullopt, options);
      std::cout << fuseval::format_report(report, metrics);
    } else if (*ingest) {
      fuseval::Store store = open_store();
      std::vector<fuseval::NamedText> runs;
      for (const std::string& f : run_files) runs.push_back({f, fuseval::read_file(f)});
      fuseval::DatasetRecord d = store.ingest_dataset(
          name, runs, {qrels_file, fuseval::read_file(qrels_file)}, note);
      std::cout << d.id << "\n";
      for (const std::string& w : d.warnings) std::cerr << "warning: " << w << "\n";
    } else if (*dataset_list) {
      fuseval::Store store = open_store();
      for (const fuseval::DatasetRecord& d : store.list_datasets()) {
        std::cout << d.id << "\t" << d.name << "\t" << d.runs.size() << " runs\t"
                  << d.topics.size() << " topics\n";
      }
    } else if (*exp_create) {
      fuseval::Store store = open_store();
      fuseval::Engine engine(store);
      std::cout << engine.create(json::parse(fuseval::read_file(def_file))).id << "\n";
    } else if (*exp_run) {
      fuseval::Store store = open_store();
      fuseval::Engine engine(store);
      if (exp_id.empty()) {
        if (def_file.empty()) {
          throw Error(ErrorCode::kInvalidDocument, "exp run needs --file or --id", "file");
        }
        auto def = fuseval::ExperimentDefinition::from_json(
            json::parse(fuseval::read_file(def_file)));
        auto existing = store.find_experiment_by_definition(def.digest());
        exp_id = existing ? *existing : engine.create(def).id;
      }
      fuseval::ExperimentRecord before = store.get_experiment(exp_id);
      if (before.status() == "completed") {
        std::cout << "no-op: experiment " << exp_id << " is already complete\n";
        print_experiment(before, engine);
      } else {
        print_experiment(engine.execute(exp_id), engine);
      }
    } else if (*exp_add) {
      fuseval::Store store = open_store();
      fuseval::Engine engine(store);
      print_experiment(engine.add_fusion(exp_id, spec_document(algorithm, params)), engine);
    } else if (*exp_list) {
      fuseval::Store store = open_store();
      for (const fuseval::ExperimentSummary& s : store.list_experiments()) {
        std::cout << s.id << "\t" << s.status << "\t" << s.dataset_id << "\t" << s.created
                  << "\n";
      }
    } else if (*exp_show) {
      fuseval::Store store = open_store();
      fuseval::Engine engine(store);
      if (show_json) {
        std::cout << store.get_experiment_blob(exp_id) << "\n";
      } else {
        print_experiment(store.get_experiment(exp_id), engine);
      }
    } else if (*exp_verify) {
      fuseval::Store store = open_store();
      fuseval::Engine engine(store);
      fuseval::VerifyReport v = engine.verify(exp_id);
      for (const std::string& m : v.mismatches) std::cout << "mismatch: " << m << "\n";
      std::cout << (v.identical ? "identical" : "differs") << "\n";
      return v.identical ? kExitOk : kExitInvalid;
    } else if (*exp_export) {
      fuseval::Store store = open_store();
      fuseval::Engine engine(store);
      fuseval::ExperimentRecord record = store.get_experiment(exp_id);
      if (format == "trec") {
        emit(fuseval::export_trec_run(store, record, spec));
      } else if (format == "latex") {
        emit(fuseval::export_latex(engine.table(record)));
      } else if (format == "csv") {
        auto files = fuseval::export_plot_data(engine.table(record), engine.reports(record));
        if (!series.empty()) {
          if (series.find(".csv") == std::string::npos) series += ".csv";
          auto it = files.find(series);
          if (it == files.end()) {
            throw Error(ErrorCode::kNotFound, "no series '" + series + "'", "series");
          }
          emit(it->second);
        } else if (!output.empty()) {
          std::filesystem::create_directories(output);
          for (const auto& [file, content] : files) {
            fuseval::write_file((std::filesystem::path(output) / file).string(), content);
          }
        } else {
          for (const auto& [file, content] : files) std::cout << "# " << file << "\n" << content;
        }
      } else {
        std::string zip = fuseval::export_bundle(store, record, engine.table(record),
                                                 engine.reports(record));
        if (output.empty()) output = exp_id + ".zip";
        fuseval::write_file(output, zip);
        std::cout << output << "\n";
      }
    } else if (*serve) {
      fuseval::Store store = open_store();
      fuseval::Service service(store);
      std::cerr << "serving on http://" << host << ":" << port << " (store "
                << store.root().string() << ")\n";
      if (!service.listen(host, port)) {
        std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
        return kExitIo;
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << fuseval::error_code_name(e.code()) << ": " << e.what();
    if (!e.field().empty()) std::cerr << " (field: " << e.field() << ")";
    std::cerr << "\n";
    switch (e.category()) {
      case fuseval::ErrorCategory::kIo:
      case fuseval::ErrorCategory::kUnavailable:
        return kExitIo;
      default:
        return kExitInvalid;
    }
  } catch (const json::exception& e) {
    std::cerr << "error: invalid JSON: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
