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

#include "fuseval/significance.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "fuseval/error.h"

namespace fuseval {
namespace {

using nlohmann::json;

std::vector<double> differences(const PairedSample& sample) {
  const std::size_t n = sample.baseline.size();
  if (sample.treatment.size() != n || sample.topics.size() != n) {
    throw Error(ErrorCode::kMisalignedTopics,
                "paired sample sides have different lengths");
  }
  if (n < 2) {
    throw Error(ErrorCode::kTooFewPairs,
                "significance tests need at least 2 paired topics");
  }
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = sample.treatment[i] - sample.baseline[i];
  return d;
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h;
}

// Average ranks (1-based) of `values`, ties sharing the mean rank. Also
// returns the tie-group sizes.
std::vector<double> average_ranks(const std::vector<double>& values,
                                  std::vector<std::size_t>* ties) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    if (ties != nullptr) ties->push_back(j - i + 1);
    i = j + 1;
  }
  return ranks;
}

double clamp_p(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

PairedSample PairedSample::from_differences(std::vector<double> diffs) {
  PairedSample s;
  s.metric = "diff";
  for (std::size_t i = 0; i < diffs.size(); ++i) s.topics.push_back(std::to_string(i + 1));
  s.baseline.assign(diffs.size(), 0.0);
  s.treatment = std::move(diffs);
  return s;
}

PairedSample pair_reports(const EvalReport& baseline, const EvalReport& treatment,
                          const std::string& metric) {
  if (baseline.topics.size() != treatment.topics.size()) {
    throw Error(ErrorCode::kMisalignedTopics,
                "reports for '" + baseline.run_tag + "' and '" + treatment.run_tag +
                    "' cover different topic sets");
  }
  PairedSample s;
  s.metric = metric;
  for (std::size_t i = 0; i < baseline.topics.size(); ++i) {
    const TopicEval& b = baseline.topics[i];
    const TopicEval& t = treatment.topics[i];
    if (b.topic != t.topic) {
      throw Error(ErrorCode::kMisalignedTopics,
                  "topic '" + b.topic + "' is not paired with '" + t.topic + "'");
    }
    s.topics.push_back(b.topic);
    s.baseline.push_back(b.values.at(metric));
    s.treatment.push_back(t.values.at(metric));
  }
  return s;
}

std::string_view test_id(TestKind kind) {
  return kind == TestKind::kTTest ? "t_test" : "wilcoxon";
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

TestResult paired_t_test(const PairedSample& sample) {
  std::vector<double> d = differences(sample);
  const double n = static_cast<double>(d.size());
  TestResult r;
  r.test = TestKind::kTTest;
  r.n_effective = d.size();

  double sum = 0.0;
  for (double v : d) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double variance = ss / (n - 1.0);

  if (std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; })) {
    r.statistic = 0.0;
    r.p_value = 1.0;
    r.degenerate = true;
    return r;
  }
  // Identical differences have zero spread even when the computed mean
  // carries rounding error.
  const bool constant = std::all_of(d.begin(), d.end(), [&](double v) { return v == d.front(); });
  if (constant || variance == 0.0) {
    r.statistic = std::copysign(std::numeric_limits<double>::infinity(), mean);
    r.p_value = 0.0;
    r.degenerate = true;
    r.unbounded = true;
    return r;
  }
  const double t = mean / std::sqrt(variance / n);
  const double dof = n - 1.0;
  r.statistic = t;
  r.p_value = clamp_p(regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t)));
  return r;
}

double wilcoxon_exact_p(const std::vector<double>& ranks, double w_plus) {
  // Ranks are multiples of 1/2; work with doubled integer ranks.
  std::vector<std::uint64_t> counts(1, 1);
  std::size_t total = 0;
  for (double rank : ranks) {
    const std::size_t r2 = static_cast<std::size_t>(std::lround(2.0 * rank));
    std::vector<std::uint64_t> next(counts.size() + r2, 0);
    for (std::size_t s = 0; s < counts.size(); ++s) {
      next[s] += counts[s];
      next[s + r2] += counts[s];
    }
    counts = std::move(next);
    total += r2;
  }
  const std::size_t w2 = static_cast<std::size_t>(std::lround(2.0 * w_plus));
  std::uint64_t lower = 0;
  std::uint64_t upper = 0;
  for (std::size_t s = 0; s <= total; ++s) {
    if (s <= w2) lower += counts[s];
    if (s >= w2) upper += counts[s];
  }
  const double patterns = std::ldexp(1.0, static_cast<int>(ranks.size()));
  const double tail = static_cast<double>(std::min(lower, upper)) / patterns;
  return clamp_p(2.0 * tail);
}

TestResult wilcoxon_signed_rank(const PairedSample& sample) {
  std::vector<double> d = differences(sample);
  TestResult r;
  r.test = TestKind::kWilcoxon;

  std::vector<double> magnitudes;
  std::vector<bool> positive;
  for (double v : d) {
    if (v == 0.0) continue;
    magnitudes.push_back(std::abs(v));
    positive.push_back(v > 0.0);
  }
  r.n_effective = magnitudes.size();
  if (magnitudes.empty()) {
    r.statistic = 0.0;
    r.p_value = 1.0;
    r.degenerate = true;
    return r;
  }

  std::vector<std::size_t> ties;
  std::vector<double> ranks = average_ranks(magnitudes, &ties);
  double w_plus = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (positive[i]) w_plus += ranks[i];
  }
  r.statistic = w_plus;

  const double n = static_cast<double>(ranks.size());
  if (ranks.size() <= kWilcoxonExactLimit) {
    r.p_value = wilcoxon_exact_p(ranks, w_plus);
    return r;
  }
  double tie_term = 0.0;
  for (std::size_t t : ties) {
    const double tt = static_cast<double>(t);
    tie_term += tt * tt * tt - tt;
  }
  const double mean = n * (n + 1.0) / 4.0;
  const double variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
  double z = (std::abs(w_plus - mean) - 0.5) / std::sqrt(variance);
  if (z < 0.0) z = 0.0;
  r.p_value = clamp_p(std::erfc(z / std::sqrt(2.0)));
  return r;
}

json TestResult::to_json() const {
  json stat;
  if (std::isfinite(statistic)) {
    stat = statistic;
  } else {
    stat = statistic > 0 ? "inf" : "-inf";
  }
  return json{{"test", std::string(test_id(test))},
              {"statistic", stat},
              {"p_value", p_value},
              {"n_effective", n_effective},
              {"degenerate", degenerate},
              {"unbounded", unbounded}};
}

TestResult TestResult::from_json(const json& doc) {
  TestResult r;
  r.test = doc.at("test").get<std::string>() == "t_test" ? TestKind::kTTest
                                                          : TestKind::kWilcoxon;
  const json& stat = doc.at("statistic");
  if (stat.is_string()) {
    r.statistic = std::numeric_limits<double>::infinity();
    if (stat.get<std::string>() == "-inf") r.statistic = -r.statistic;
  } else {
    r.statistic = stat.get<double>();
  }
  r.p_value = doc.at("p_value").get<double>();
  r.n_effective = doc.at("n_effective").get<std::size_t>();
  r.degenerate = doc.at("degenerate").get<bool>();
  r.unbounded = doc.at("unbounded").get<bool>();
  return r;
}

}  // namespace fuseval
