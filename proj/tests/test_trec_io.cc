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

#include <algorithm>
#include <random>
#include <sstream>

#include "fuseval/error.h"
#include "fuseval/trec_io.h"
#include "support/test_util.h"

namespace fuseval {
namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

TEST(ParseRun, SingleLine) {
  fuseval::Run run = parse_run("401 Q0 FT911-1 1 8.73 runA\n");
  EXPECT_EQ(run.tag, "runA");
  ASSERT_EQ(run.topics.size(), 1u);
  ASSERT_EQ(run.topics.at("401").size(), 1u);
  EXPECT_EQ(run.topics.at("401")[0].doc_id, "FT911-1");
  EXPECT_DOUBLE_EQ(run.topics.at("401")[0].score, 8.73);
}

TEST(ParseRun, WrongFieldCountNamesLine) {
  try {
    parse_run("401 Q0 d1 1 8.73");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedLine);
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}

TEST(ParseRun, TieBreakIsDocIdDescending) {
  fuseval::Run run = parse_run("1 Q0 A 1 1.0 r\n1 Q0 B 2 1.0 r\n");
  const RankedList& list = run.topics.at("1");
  EXPECT_EQ(list[0].doc_id, "B");
  EXPECT_EQ(list[1].doc_id, "A");
}

TEST(ParseRun, RankColumnIsIgnored) {
  fuseval::Run run = parse_run("1 Q0 a 1 0.5 r\n1 Q0 b 2 0.9 r\n");
  EXPECT_EQ(run.topics.at("1")[0].doc_id, "b");
}

TEST(ParseRun, Errors) {
  EXPECT_EQ(code_of([] { parse_run("1 Q0 a 1 x r\n"); }), ErrorCode::kMalformedLine);
  EXPECT_EQ(code_of([] { parse_run("1 Q0 a 1 nan r\n"); }), ErrorCode::kMalformedLine);
  EXPECT_EQ(code_of([] { parse_run("1 Q0 a 1 inf r\n"); }), ErrorCode::kMalformedLine);
  EXPECT_EQ(code_of([] { parse_run("1 Q1 a 1 1 r\n"); }), ErrorCode::kMalformedLine);
  EXPECT_EQ(code_of([] { parse_run("1 Q0 a 1 1 r\n1 Q0 a 2 0.5 r\n"); }),
            ErrorCode::kDuplicateDocument);
  EXPECT_EQ(code_of([] { parse_run("1 Q0 a 1 1 r\n1 Q0 b 2 0.5 s\n"); }),
            ErrorCode::kRunTagMismatch);
  RunParseOptions cap;
  cap.topic_cap = 1;
  EXPECT_EQ(code_of([&] { parse_run("1 Q0 a 1 1 r\n1 Q0 b 2 0.5 r\n", cap); }),
            ErrorCode::kTopicListTooLong);
}

TEST(ParseRun, Q0IsCaseInsensitiveAndWrittenUpper) {
  fuseval::Run run = parse_run("1 q0 a 1 1 r\n");
  EXPECT_EQ(write_run(run), "1 Q0 a 1 1.00000 r\n");
}

TEST(ParseRun, EmptyInputIsEmptyRun) {
  fuseval::Run run = parse_run("");
  EXPECT_TRUE(run.topics.empty());
  EXPECT_TRUE(parse_run("\n\n  \n").topics.empty());
}

TEST(ParseRun, FiftyTopicsOfTenThousand) {
  std::string text;
  text.reserve(50 * 10000 * 32);
  char buf[96];
  for (int t = 0; t < 50; ++t) {
    for (int d = 0; d < 10000; ++d) {
      std::snprintf(buf, sizeof(buf), "%d Q0 doc%d-%d %d %.4f big\n", 400 + t, t, d, d + 1,
                    10000.0 - d);
      text += buf;
    }
  }
  fuseval::Run run = parse_run(text);
  EXPECT_EQ(run.topics.size(), 50u);
  for (const auto& [topic, list] : run.topics) EXPECT_EQ(list.size(), 10000u);
}

TEST(ParseRun, ShuffledLinesGiveSameRun) {
  std::mt19937_64 rng(11);
  std::vector<std::string> lines;
  for (int t = 0; t < 4; ++t) {
    for (int d = 0; d < 30; ++d) {
      lines.push_back(std::to_string(t) + " Q0 d" + std::to_string(d) + " 1 " +
                      std::to_string(static_cast<int>(rng() % 5)) + " r\n");
    }
  }
  std::string a;
  for (const auto& l : lines) a += l;
  std::shuffle(lines.begin(), lines.end(), rng);
  std::string b;
  for (const auto& l : lines) b += l;
  EXPECT_EQ(parse_run(a), parse_run(b));
}

TEST(ParseRun, CanonicalOrderIsTotal) {
  std::mt19937_64 rng(5);
  auto runs = testutil::random_runs(rng, 3, 20, {"1", "2", "3"});
  for (const fuseval::Run& run : runs) {
    for (const auto& [topic, list] : run.topics) {
      for (std::size_t i = 1; i < list.size(); ++i) {
        EXPECT_TRUE(canonical_before(list[i - 1], list[i]));
        EXPECT_FALSE(canonical_before(list[i], list[i - 1]));
      }
    }
  }
}

TEST(ParseQrels, Basics) {
  ParsedQrels q = parse_qrels("401 0 FT911-1 1\n");
  EXPECT_EQ(q.qrels.grade("401", "FT911-1"), 1);
  EXPECT_EQ(q.clamped_negative, 0u);
  EXPECT_FALSE(q.qrels.grade("401", "other").has_value());
}

TEST(ParseQrels, ConflictingGradesAreRejected) {
  EXPECT_EQ(code_of([] { parse_qrels("401 0 d1 1\n401 0 d1 2\n"); }),
            ErrorCode::kDuplicateJudgment);
  ParsedQrels same = parse_qrels("401 0 d1 1\n401 0 d1 1\n");
  EXPECT_EQ(same.qrels.topics.at("401").size(), 1u);
}

TEST(ParseQrels, NegativeGradesClamp) {
  ParsedQrels q = parse_qrels("401 0 d1 -2\n");
  EXPECT_EQ(q.qrels.grade("401", "d1"), 0);
  EXPECT_EQ(q.clamped_negative, 1u);
}

TEST(ParseQrels, Malformed) {
  EXPECT_EQ(code_of([] { parse_qrels("401 0 d1\n"); }), ErrorCode::kMalformedLine);
  EXPECT_EQ(code_of([] { parse_qrels("401 0 d1 1.5\n"); }), ErrorCode::kMalformedLine);
}

TEST(WriteRun, Examples) {
  fuseval::Run run;
  run.tag = "f";
  run.topics["401"] = {{"d1", 1.0}};
  EXPECT_EQ(write_run(run), "401 Q0 d1 1 1.00000 f\n");
  EXPECT_EQ(write_run(fuseval::Run{}), "");
  EXPECT_EQ(write_run(run, std::string("g")), "401 Q0 d1 1 1.00000 g\n");
}

TEST(WriteRun, TopicsAscendingRanksSequential) {
  fuseval::Run run = parse_run("b Q0 x 9 1 r\na Q0 y 4 2 r\na Q0 z 1 3 r\n");
  EXPECT_EQ(write_run(run), "a Q0 z 1 3.00000 r\na Q0 y 2 2.00000 r\nb Q0 x 1 1.00000 r\n");
}

TEST(WriteRun, RoundTripsRandomRuns) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> wide(-1e6, 1e6);
  for (int trial = 0; trial < 200; ++trial) {
    fuseval::Run run;
    run.tag = "rt";
    for (int t = 0; t < 3; ++t) {
      RankedList list;
      for (int d = 0; d < 25; ++d) {
        double s = trial % 3 == 0 ? std::ldexp(wide(rng), -40) : wide(rng);
        if (d % 7 == 0) s = 1.0 / 3.0;
        list.push_back({"doc" + std::to_string(d), s});
      }
      sort_canonical(list);
      run.topics["t" + std::to_string(t)] = std::move(list);
    }
    ASSERT_EQ(parse_run(write_run(run)), run);
  }
}

TEST(WriteRun, ScoresHaveAtLeastSixSignificantDigits) {
  EXPECT_EQ(format_score(1.0), "1.00000");
  EXPECT_EQ(format_score(8.73), "8.73000");
  EXPECT_EQ(format_score(0.25), "0.250000");
  double third = 1.0 / 3.0;
  double back = std::stod(format_score(third));
  EXPECT_EQ(back, third);
}

TEST(WriteQrels, RoundTrip) {
  ParsedQrels q = parse_qrels("2 0 b 0\n1 0 a 2\n1 0 c 1\n");
  EXPECT_EQ(parse_qrels(write_qrels(q.qrels)).qrels, q.qrels);
}

}  // namespace
}  // namespace fuseval
