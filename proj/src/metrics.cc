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

#include "fuseval/metrics.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>

#include "fuseval/error.h"

namespace fuseval {
namespace {

using nlohmann::json;

enum class Measure { kPrecision, kRecall, kSetRecall, kMap, kRprec, kBpref, kNdcg, kIprec };

struct MetricSpec {
  Measure measure;
  std::size_t param = 0;  // cutoff, or iprec point 0..10
};

bool parse_size(std::string_view s, std::size_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && out > 0;
}

std::optional<MetricSpec> parse_metric(std::string_view id) {
  std::size_t n = 0;
  if (id == "map") return MetricSpec{Measure::kMap};
  if (id == "Rprec") return MetricSpec{Measure::kRprec};
  if (id == "bpref") return MetricSpec{Measure::kBpref};
  if (id == "ndcg") return MetricSpec{Measure::kNdcg};
  if (id == "set_recall") return MetricSpec{Measure::kSetRecall};
  if (id.starts_with("P_") && parse_size(id.substr(2), n)) {
    return MetricSpec{Measure::kPrecision, n};
  }
  if (id.starts_with("recall_") && parse_size(id.substr(7), n)) {
    return MetricSpec{Measure::kRecall, n};
  }
  constexpr std::string_view kIprec = "iprec_at_recall_";
  if (id.starts_with(kIprec)) {
    for (std::size_t p = 0; p <= 10; ++p) {
      if (id == iprec_metric_id(p)) return MetricSpec{Measure::kIprec, p};
    }
  }
  return std::nullopt;
}

// Relevance of the depth-truncated ranking for one topic.
struct Judged {
  std::vector<int> grades;  // per rank; -1 when unjudged
  std::size_t relevant = 0;
  std::size_t nonrelevant = 0;
  std::vector<int> ideal;  // positive grades, descending
};

Judged judge(const RankedList* list, const Qrels::Judgments& judgments,
             std::size_t depth) {
  Judged j;
  for (const auto& [doc, grade] : judgments) {
    if (grade > 0) {
      ++j.relevant;
      j.ideal.push_back(grade);
    } else {
      ++j.nonrelevant;
    }
  }
  std::sort(j.ideal.begin(), j.ideal.end(), std::greater<>());
  if (list != nullptr) {
    std::size_t n = std::min(depth, list->size());
    j.grades.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto it = judgments.find((*list)[i].doc_id);
      j.grades.push_back(it == judgments.end() ? -1 : it->second);
    }
  }
  return j;
}

std::size_t relevant_in_top(const Judged& j, std::size_t n) {
  std::size_t count = 0;
  std::size_t end = std::min(n, j.grades.size());
  for (std::size_t i = 0; i < end; ++i) count += j.grades[i] > 0 ? 1 : 0;
  return count;
}

double precision_of(const Judged& j, std::size_t n) {
  return static_cast<double>(relevant_in_top(j, n)) / static_cast<double>(n);
}

double recall_of(const Judged& j, std::size_t n) {
  return static_cast<double>(relevant_in_top(j, n)) /
         static_cast<double>(j.relevant);
}

double ap_of(const Judged& j) {
  double sum = 0.0;
  std::size_t found = 0;
  for (std::size_t i = 0; i < j.grades.size(); ++i) {
    if (j.grades[i] > 0) {
      ++found;
      sum += static_cast<double>(found) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(j.relevant);
}

double rprec_of(const Judged& j) { return precision_of(j, j.relevant); }

double bpref_of(const Judged& j) {
  const double r = static_cast<double>(j.relevant);
  const double denom = static_cast<double>(std::min(j.relevant, j.nonrelevant));
  std::size_t nonrel_above = 0;
  double sum = 0.0;
  for (int grade : j.grades) {
    if (grade > 0) {
      if (nonrel_above > 0) {
        sum += 1.0 - static_cast<double>(std::min(nonrel_above, j.relevant)) / denom;
      } else {
        sum += 1.0;
      }
    } else if (grade == 0) {
      ++nonrel_above;
    }
  }
  return sum / r;
}

double ndcg_of(const Judged& j) {
  double dcg = 0.0;
  for (std::size_t i = 0; i < j.grades.size(); ++i) {
    if (j.grades[i] > 0) dcg += j.grades[i] / std::log2(static_cast<double>(i + 2));
  }
  double ideal = 0.0;
  for (std::size_t i = 0; i < j.ideal.size(); ++i) {
    ideal += j.ideal[i] / std::log2(static_cast<double>(i + 2));
  }
  return ideal > 0.0 ? dcg / ideal : 0.0;
}

std::array<double, 11> iprec_of(const Judged& j) {
  // Relevant count and precision at every relevant document, in rank order.
  std::vector<std::pair<std::size_t, double>> points;
  std::size_t found = 0;
  for (std::size_t i = 0; i < j.grades.size(); ++i) {
    if (j.grades[i] > 0) {
      ++found;
      points.emplace_back(found, static_cast<double>(found) /
                                     static_cast<double>(i + 1));
    }
  }
  std::array<double, 11> out{};
  double best = 0.0;
  std::size_t next = points.size();
  for (int p = 10; p >= 0; --p) {
    // The reference evaluator turns each recall level into a relevant-document
    // count with this rounding, which is slightly looser than h/R >= level.
    const double level = static_cast<double>(p) / 10.0;
    const auto needed = static_cast<std::size_t>(
        level * static_cast<double>(j.relevant) + 0.9);
    while (next > 0 && points[next - 1].first >= needed) {
      best = std::max(best, points[next - 1].second);
      --next;
    }
    out[static_cast<std::size_t>(p)] = best;
  }
  return out;
}

double compute(const MetricSpec& m, const Judged& j) {
  switch (m.measure) {
    case Measure::kPrecision: return precision_of(j, m.param);
    case Measure::kRecall: return recall_of(j, m.param);
    case Measure::kSetRecall: return recall_of(j, j.grades.size());
    case Measure::kMap: return ap_of(j);
    case Measure::kRprec: return rprec_of(j);
    case Measure::kBpref: return bpref_of(j);
    case Measure::kNdcg: return ndcg_of(j);
    case Measure::kIprec: return iprec_of(j)[m.param];
  }
  return 0.0;
}

const Qrels::Judgments& topic_judgments(const Qrels& qrels,
                                        std::string_view topic) {
  const Qrels::Judgments* judgments = qrels.find(topic);
  if (judgments == nullptr) {
    throw Error(ErrorCode::kUnknownTopic,
                "topic '" + std::string(topic) + "' has no relevance judgments");
  }
  return *judgments;
}

Judged judge_with_relevant(const Run& run, const Qrels& qrels,
                           std::string_view topic, const EvalOptions& options) {
  Judged j = judge(run.find(topic), topic_judgments(qrels, topic), options.depth);
  if (j.relevant == 0) {
    throw Error(ErrorCode::kNoRelevant,
                "topic '" + std::string(topic) + "' has no relevant documents");
  }
  return j;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

std::string iprec_metric_id(std::size_t point) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "iprec_at_recall_%.2f",
                static_cast<double>(point) / 10.0);
  return buf;
}

const std::vector<MetricInfo>& metric_registry() {
  static const std::vector<MetricInfo> kRegistry{
      {"P", "Precision at n", true, false},
      {"recall", "Recall at n", true, false},
      {"set_recall", "Recall", false, false},
      {"map", "MAP", false, false},
      {"bpref", "bpref", false, false},
      {"ndcg", "NDCG", false, false},
      {"Rprec", "R-prec", false, true},
      {"iprec_at_recall", "Interpolated precision-recall curve", false, true},
  };
  return kRegistry;
}

json metric_registry_json() {
  json out = json::array();
  for (const MetricInfo& m : metric_registry()) {
    json entry{{"metric", m.id},
               {"display_name", m.display_name},
               {"needs_cutoff", m.needs_cutoff},
               {"extended", m.extended}};
    if (m.needs_cutoff) {
      entry["default_cutoffs"] = kDefaultCutoffs;
      entry["pattern"] = m.id + "_<n>";
    }
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<std::string> expand_metrics(std::span<const std::string> requested) {
  std::vector<std::string> out;
  auto add = [&out](std::string id) {
    if (std::find(out.begin(), out.end(), id) == out.end()) {
      out.push_back(std::move(id));
    }
  };
  for (const std::string& id : requested) {
    if (id == "P" || id == "recall") {
      for (std::size_t c : kDefaultCutoffs) add(id + "_" + std::to_string(c));
    } else if (id == "iprec_at_recall") {
      for (std::size_t p = 0; p <= 10; ++p) add(iprec_metric_id(p));
    } else if (parse_metric(id)) {
      add(id);
    } else {
      throw Error(ErrorCode::kUnknownMetric,
                  "unknown metric '" + id +
                      "'; valid: P, P_<n>, recall, recall_<n>, set_recall, map, "
                      "Rprec, bpref, ndcg, iprec_at_recall",
                  "metrics");
    }
  }
  return out;
}

std::string metric_label(std::string_view id) {
  auto m = parse_metric(id);
  if (!m) return std::string(id);
  switch (m->measure) {
    case Measure::kPrecision: return "P@" + std::to_string(m->param);
    case Measure::kRecall: return "Recall@" + std::to_string(m->param);
    case Measure::kSetRecall: return "Recall";
    case Measure::kMap: return "MAP";
    case Measure::kRprec: return "R-prec";
    case Measure::kBpref: return "bpref";
    case Measure::kNdcg: return "NDCG";
    case Measure::kIprec: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "iP@%.1f", static_cast<double>(m->param) / 10.0);
      return buf;
    }
  }
  return std::string(id);
}

double precision_at(const Run& run, const Qrels& qrels, std::string_view topic,
                    std::size_t n, const EvalOptions& options) {
  if (n == 0) {
    throw Error(ErrorCode::kUnknownMetric, "precision cutoff must be >= 1");
  }
  Judged j = judge(run.find(topic), topic_judgments(qrels, topic), options.depth);
  return precision_of(j, n);
}

double recall_at(const Run& run, const Qrels& qrels, std::string_view topic,
                 std::optional<std::size_t> n, const EvalOptions& options) {
  Judged j = judge_with_relevant(run, qrels, topic, options);
  return recall_of(j, n.value_or(j.grades.size()));
}

double average_precision(const Run& run, const Qrels& qrels,
                         std::string_view topic, const EvalOptions& options) {
  return ap_of(judge_with_relevant(run, qrels, topic, options));
}

double r_precision(const Run& run, const Qrels& qrels, std::string_view topic,
                   const EvalOptions& options) {
  return rprec_of(judge_with_relevant(run, qrels, topic, options));
}

double bpref(const Run& run, const Qrels& qrels, std::string_view topic,
             const EvalOptions& options) {
  return bpref_of(judge_with_relevant(run, qrels, topic, options));
}

double ndcg(const Run& run, const Qrels& qrels, std::string_view topic,
            const EvalOptions& options) {
  return ndcg_of(judge_with_relevant(run, qrels, topic, options));
}

std::array<double, 11> pr_curve(const Run& run, const Qrels& qrels,
                                std::string_view topic,
                                const EvalOptions& options) {
  return iprec_of(judge_with_relevant(run, qrels, topic, options));
}

EvalReport evaluate(const Run& run, const Qrels& qrels,
                    std::span<const std::string> metrics,
                    std::optional<std::span<const std::string>> topics,
                    const EvalOptions& options) {
  std::vector<std::string> ids = expand_metrics(metrics);
  std::vector<MetricSpec> specs;
  for (const std::string& id : ids) specs.push_back(*parse_metric(id));

  std::vector<std::string> subset;
  if (topics) {
    subset.assign(topics->begin(), topics->end());
    if (subset.empty()) {
      throw Error(ErrorCode::kEmptyTopicSubset, "topic subset is empty", "topics");
    }
  } else {
    for (const auto& [topic, judgments] : qrels.topics) subset.push_back(topic);
  }
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());

  EvalReport report;
  report.run_tag = run.tag;
  for (const std::string& topic : subset) {
    Judged j = judge(run.find(topic), topic_judgments(qrels, topic), options.depth);
    if (j.relevant == 0) continue;
    TopicEval te;
    te.topic = topic;
    te.relevant = j.relevant;
    te.nonrelevant = j.nonrelevant;
    for (std::size_t m = 0; m < specs.size(); ++m) {
      te.values.emplace(ids[m], compute(specs[m], j));
    }
    report.topics.push_back(std::move(te));
  }
  report.eligible = report.topics.size();
  for (const std::string& id : ids) {
    double sum = 0.0;
    for (const TopicEval& te : report.topics) sum += te.values.at(id);
    report.aggregates[id] =
        report.eligible > 0 ? sum / static_cast<double>(report.eligible) : 0.0;
  }
  return report;
}

std::string format_report(const EvalReport& report,
                          std::span<const std::string> metrics) {
  std::vector<std::string> ids = expand_metrics(metrics);
  std::string out;
  char buf[256];
  for (const TopicEval& te : report.topics) {
    for (const std::string& id : ids) {
      std::snprintf(buf, sizeof(buf), "%-22s\t%s\t%s\n", id.c_str(),
                    te.topic.c_str(), format_value(te.values.at(id)).c_str());
      out += buf;
    }
  }
  for (const std::string& id : ids) {
    std::snprintf(buf, sizeof(buf), "%-22s\tall\t%s\n", id.c_str(),
                  format_value(report.aggregates.at(id)).c_str());
    out += buf;
  }
  return out;
}

json EvalReport::to_json() const {
  json topic_list = json::array();
  for (const TopicEval& te : topics) {
    topic_list.push_back({{"topic", te.topic},
                          {"R", te.relevant},
                          {"N", te.nonrelevant},
                          {"values", te.values}});
  }
  return json{{"run_tag", run_tag},
              {"eligible", eligible},
              {"aggregates", aggregates},
              {"topics", std::move(topic_list)}};
}

EvalReport EvalReport::from_json(const json& doc) {
  EvalReport report;
  report.run_tag = doc.at("run_tag").get<std::string>();
  report.eligible = doc.at("eligible").get<std::size_t>();
  report.aggregates = doc.at("aggregates").get<std::map<std::string, double>>();
  for (const json& t : doc.at("topics")) {
    TopicEval te;
    te.topic = t.at("topic").get<std::string>();
    te.relevant = t.at("R").get<std::size_t>();
    te.nonrelevant = t.at("N").get<std::size_t>();
    te.values = t.at("values").get<std::map<std::string, double>>();
    report.topics.push_back(std::move(te));
  }
  return report;
}

}  // namespace fuseval
