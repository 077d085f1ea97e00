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
#include <array>
#include <cmath>

#include "fuseval/digest.h"
#include "fuseval/error.h"
#include "fuseval/fusion.h"

namespace fuseval {
namespace {

using nlohmann::json;

struct AlgorithmInfo {
  Algorithm algorithm;
  std::string_view id;
  std::string_view display_name;
  bool trained;
};

constexpr std::array<AlgorithmInfo, 7> kAlgorithms{{
    {Algorithm::kInterleave, "interleave", "Interleaving", false},
    {Algorithm::kCombSum, "combsum", "CombSum", false},
    {Algorithm::kCombMnz, "combmnz", "CombMNZ", false},
    {Algorithm::kLinear, "linear", "Linear Combination", false},
    {Algorithm::kProbFuse, "probfuse", "ProbFuse", true},
    {Algorithm::kSegFuse, "segfuse", "SegFuse", true},
    {Algorithm::kSlideFuse, "slidefuse", "SlideFuse", true},
}};

const AlgorithmInfo& info(Algorithm algorithm) {
  for (const AlgorithmInfo& i : kAlgorithms) {
    if (i.algorithm == algorithm) return i;
  }
  throw Error(ErrorCode::kUnknownAlgorithm, "unknown algorithm");
}

[[noreturn]] void bad_param(const std::string& message) {
  throw Error(ErrorCode::kInvalidParameter, message, "params");
}

int integer_param(const json& value, const std::string& name) {
  if (value.is_number_integer()) return value.get<int>();
  if (value.is_number_float()) {
    double d = value.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 1e9) {
      return static_cast<int>(d);
    }
  }
  bad_param("parameter '" + name + "' must be an integer");
}

std::string_view variant_name(ProbFuseVariant variant) {
  return variant == ProbFuseVariant::kAll ? "all" : "judged";
}

}  // namespace

std::string_view algorithm_id(Algorithm algorithm) { return info(algorithm).id; }

bool requires_training(Algorithm algorithm) { return info(algorithm).trained; }

Algorithm parse_algorithm(std::string_view id) {
  std::string valid;
  for (const AlgorithmInfo& i : kAlgorithms) {
    if (i.id == id) return i.algorithm;
    valid += valid.empty() ? "" : ", ";
    valid += i.id;
  }
  throw Error(ErrorCode::kUnknownAlgorithm,
              "unknown algorithm '" + std::string(id) + "'; valid: " + valid,
              "algorithm");
}

FusionSpec FusionSpec::from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("algorithm") ||
      !doc["algorithm"].is_string()) {
    throw Error(ErrorCode::kInvalidDocument,
                "fusion entry needs a string 'algorithm'", "fusions");
  }
  FusionSpec spec;
  spec.algorithm = parse_algorithm(doc["algorithm"].get<std::string>());
  json params = doc.value("params", json::object());
  if (params.is_null()) params = json::object();
  if (!params.is_object()) bad_param("'params' must be an object");

  for (const auto& [key, value] : params.items()) {
    switch (spec.algorithm) {
      case Algorithm::kLinear:
        if (key == "weights") {
          if (!value.is_object()) bad_param("'weights' must map run tags to numbers");
          for (const auto& [tag, w] : value.items()) {
            if (!w.is_number()) bad_param("weight for '" + tag + "' is not a number");
            double weight = w.get<double>();
            if (!std::isfinite(weight) || weight < 0.0) {
              bad_param("weight for '" + tag + "' must be finite and >= 0");
            }
            spec.params.weights[tag] = weight;
          }
          continue;
        }
        break;
      case Algorithm::kProbFuse:
        if (key == "segments" || key == "x") {
          spec.params.segments = integer_param(value, key);
          if (spec.params.segments < 1) {
            throw Error(ErrorCode::kInvalidSegmentCount,
                        "segment count must be at least 1", "params");
          }
          continue;
        }
        if (key == "variant") {
          std::string v = value.is_string() ? value.get<std::string>() : "";
          if (v == "all") {
            spec.params.variant = ProbFuseVariant::kAll;
          } else if (v == "judged") {
            spec.params.variant = ProbFuseVariant::kJudged;
          } else {
            bad_param("variant must be 'all' or 'judged'");
          }
          continue;
        }
        break;
      case Algorithm::kSlideFuse:
        if (key == "window" || key == "a") {
          spec.params.window = integer_param(value, key);
          if (spec.params.window < 0) {
            throw Error(ErrorCode::kNegativeWindow,
                        "window width must be >= 0", "params");
          }
          continue;
        }
        break;
      default:
        break;
    }
    bad_param("unknown parameter '" + key + "' for " +
              std::string(algorithm_id(spec.algorithm)));
  }
  if (spec.algorithm == Algorithm::kLinear) {
    if (spec.params.weights.empty()) {
      throw Error(ErrorCode::kMissingWeight, "linear needs per-run weights",
                  "params");
    }
    bool any = false;
    for (const auto& [tag, w] : spec.params.weights) any = any || w > 0.0;
    if (!any) {
      throw Error(ErrorCode::kAllWeightsZero, "all linear weights are zero",
                  "params");
    }
  }
  return spec;
}

json FusionSpec::to_json() const {
  json params = json::object();
  switch (algorithm) {
    case Algorithm::kLinear:
      params["weights"] = json(this->params.weights);
      break;
    case Algorithm::kProbFuse:
      params["segments"] = this->params.segments;
      params["variant"] = std::string(variant_name(this->params.variant));
      break;
    case Algorithm::kSlideFuse:
      params["window"] = this->params.window;
      break;
    default:
      break;
  }
  return json{{"algorithm", std::string(algorithm_id(algorithm))},
              {"params", params}};
}

std::string FusionSpec::identity() const { return to_json().dump(); }

std::string FusionSpec::run_tag() const {
  return std::string(algorithm_id(algorithm)) + "-" +
         sha256_hex(to_json()["params"].dump()).substr(0, 8);
}

void FusionSpec::validate_for_runs(std::span<const std::string> run_tags) const {
  if (algorithm != Algorithm::kLinear) return;
  for (const std::string& tag : run_tags) {
    if (params.weights.count(tag) == 0) {
      throw Error(ErrorCode::kMissingWeight,
                  "no weight given for run '" + tag + "'", "params");
    }
  }
  for (const auto& [tag, w] : params.weights) {
    if (std::find(run_tags.begin(), run_tags.end(), tag) == run_tags.end()) {
      bad_param("weight given for run '" + tag + "', which is not selected");
    }
  }
}

json algorithm_registry() {
  json out = json::array();
  for (const AlgorithmInfo& i : kAlgorithms) {
    json params = json::array();
    switch (i.algorithm) {
      case Algorithm::kLinear:
        params.push_back({{"name", "weights"},
                          {"type", "weights"},
                          {"per_run", true},
                          {"min", 0.0},
                          {"description", "non-negative weight per run tag"}});
        break;
      case Algorithm::kProbFuse:
        params.push_back({{"name", "segments"},
                          {"type", "integer"},
                          {"default", kDefaultProbFuseSegments},
                          {"min", 1},
                          {"description", "number of segments per result list"}});
        params.push_back({{"name", "variant"},
                          {"type", "enum"},
                          {"values", {"all", "judged"}},
                          {"default", "all"},
                          {"description", "treat unjudged documents as nonrelevant (all) "
                                          "or ignore them (judged)"}});
        break;
      case Algorithm::kSlideFuse:
        params.push_back({{"name", "window"},
                          {"type", "integer"},
                          {"default", kDefaultSlideFuseWindow},
                          {"min", 0},
                          {"description", "positions averaged on each side"}});
        break;
      default:
        break;
    }
    out.push_back({{"algorithm", std::string(i.id)},
                   {"display_name", std::string(i.display_name)},
                   {"requires_training", i.trained},
                   {"parameters", params}});
  }
  return out;
}

json FusionModel::to_json() const {
  json doc{{"algorithm", std::string(algorithm_id(algorithm))},
           {"training_topics", training_topics},
           {"probabilities", probabilities}};
  if (algorithm == Algorithm::kProbFuse) {
    doc["segments"] = segments;
    doc["variant"] = std::string(variant_name(variant));
  }
  if (algorithm == Algorithm::kSlideFuse) {
    doc["window"] = window;
    doc["windowed"] = windowed;
  }
  return doc;
}

FusionModel FusionModel::from_json(const json& doc) {
  FusionModel model;
  model.algorithm = parse_algorithm(doc.at("algorithm").get<std::string>());
  model.training_topics = doc.at("training_topics").get<std::vector<std::string>>();
  model.probabilities =
      doc.at("probabilities").get<std::map<std::string, std::vector<double>>>();
  model.segments = doc.value("segments", 0);
  model.variant = doc.value("variant", std::string("all")) == "judged"
                      ? ProbFuseVariant::kJudged
                      : ProbFuseVariant::kAll;
  model.window = doc.value("window", 0);
  if (doc.contains("windowed")) {
    model.windowed =
        doc["windowed"].get<std::map<std::string, std::vector<double>>>();
  }
  return model;
}

}  // namespace fuseval
