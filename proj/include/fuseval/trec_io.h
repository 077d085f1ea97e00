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

// TREC run and qrels files.
//
// A run line has six whitespace-separated columns:
//
//   <topic> Q0 <docid> <rank> <score> <tag>
//
// and a qrels line has four:
//
//   <topic> <iteration> <docid> <grade>
//
// The rank column of a run is read but never used for ordering. Every list
// is kept in canonical order: descending score, ties broken by descending
// doc id (byte-wise). This is the order the reference evaluator uses, so
// metric values only agree when the same rule is applied here.

#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fuseval {

inline constexpr std::size_t kDefaultTopicCap = 10000;

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

using RankedList = std::vector<ScoredDoc>;

// Strict weak order realising the canonical ranking.
inline bool canonical_before(const ScoredDoc& a, const ScoredDoc& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc_id > b.doc_id;
}

void sort_canonical(RankedList& list);

struct Run {
  std::string tag;
  std::map<std::string, RankedList, std::less<>> topics;

  // Null when the run has no list for `topic`.
  const RankedList* find(std::string_view topic) const;

  friend bool operator==(const Run&, const Run&) = default;
};

struct Qrels {
  using Judgments = std::unordered_map<std::string, int>;
  std::map<std::string, Judgments, std::less<>> topics;

  const Judgments* find(std::string_view topic) const;
  // Grade of (topic, doc), or nullopt when unjudged.
  std::optional<int> grade(std::string_view topic, const std::string& doc) const;

  friend bool operator==(const Qrels&, const Qrels&) = default;
};

struct RunParseOptions {
  std::size_t topic_cap = kDefaultTopicCap;
};

Run parse_run(std::string_view text, const RunParseOptions& options = {});
Run parse_run(std::istream& in, const RunParseOptions& options = {});

struct ParsedQrels {
  Qrels qrels;
  // Number of judgments whose negative grade was clamped to 0.
  std::size_t clamped_negative = 0;
};

ParsedQrels parse_qrels(std::string_view text);
ParsedQrels parse_qrels(std::istream& in);

// Serializes in ascending topic order with 1-based canonical ranks. Scores
// carry at least six significant digits, and more only when needed for the
// text to parse back to the identical double.
std::string write_run(const Run& run,
                      const std::optional<std::string>& tag_override = {});
std::string write_qrels(const Qrels& qrels);

std::string format_score(double score);

// Convenience wrappers that map I/O failures onto ErrorCode::kIo.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace fuseval
