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

// Two-sided paired significance tests over per-topic metric values.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "fuseval/metrics.h"
#include "json.hpp"

namespace fuseval {

// Topic-aligned (baseline, treatment) pairs for one metric.
struct PairedSample {
  std::string metric;
  std::vector<std::string> topics;
  std::vector<double> baseline;
  std::vector<double> treatment;

  // Pairs are differences against a zero baseline; topics are "1".."n".
  static PairedSample from_differences(std::vector<double> diffs);
};

// Aligns two reports on `metric`. Throws kMisalignedTopics when the reports
// do not cover the same topics.
PairedSample pair_reports(const EvalReport& baseline, const EvalReport& treatment,
                          const std::string& metric);

enum class TestKind { kTTest, kWilcoxon };

std::string_view test_id(TestKind kind);

struct TestResult {
  TestKind test = TestKind::kTTest;
  // t for the t-test, W+ for Wilcoxon. Infinite when `unbounded`.
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_effective = 0;
  bool degenerate = false;
  bool unbounded = false;

  nlohmann::json to_json() const;
  static TestResult from_json(const nlohmann::json& doc);

  friend bool operator==(const TestResult&, const TestResult&) = default;
};

inline constexpr std::size_t kWilcoxonExactLimit = 25;
inline constexpr const char* kWilcoxonCaveat =
    "Wilcoxon signed-rank results are reported for comparison with prior "
    "work; this test has been found unsuitable for IR evaluation.";

TestResult paired_t_test(const PairedSample& sample);
TestResult wilcoxon_signed_rank(const PairedSample& sample);

// I_x(a, b), the regularized incomplete beta function.
double regularized_incomplete_beta(double a, double b, double x);

// Exact two-sided Wilcoxon p-value for the given |d| ranks (average ranks
// on ties) and observed W+.
double wilcoxon_exact_p(const std::vector<double>& ranks, double w_plus);

}  // namespace fuseval
