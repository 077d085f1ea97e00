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

#include "fuseval/trec_io.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "fuseval/error.h"

namespace fuseval {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
         c == '\f';
}

// Splits `line` into at most N+1 tokens; returns the total token count.
template <std::size_t N>
std::size_t tokenize(std::string_view line,
                     std::array<std::string_view, N>& out) {
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    if (i == line.size()) break;
    std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (count < N) out[count] = line.substr(start, i - start);
    ++count;
  }
  return count;
}

// Calls fn(line_no, line) for every line of `text`.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    fn(line_no, text.substr(pos, end - pos));
    pos = end + 1;
  }
}

[[noreturn]] void malformed(std::size_t line_no, std::string_view why) {
  throw Error(ErrorCode::kMalformedLine,
              "malformed line " + std::to_string(line_no) + ": " +
                  std::string(why));
}

bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

template <typename Int>
bool parse_int(std::string_view token, Int& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string slurp(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

}  // namespace

void sort_canonical(RankedList& list) {
  std::sort(list.begin(), list.end(), canonical_before);
}

const RankedList* Run::find(std::string_view topic) const {
  auto it = topics.find(topic);
  return it == topics.end() ? nullptr : &it->second;
}

const Qrels::Judgments* Qrels::find(std::string_view topic) const {
  auto it = topics.find(topic);
  return it == topics.end() ? nullptr : &it->second;
}

std::optional<int> Qrels::grade(std::string_view topic,
                                const std::string& doc) const {
  const Judgments* judgments = find(topic);
  if (judgments == nullptr) return std::nullopt;
  auto it = judgments->find(doc);
  if (it == judgments->end()) return std::nullopt;
  return it->second;
}

Run parse_run(std::string_view text, const RunParseOptions& options) {
  Run run;
  bool have_tag = false;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    std::array<std::string_view, 6> f;
    std::size_t n = tokenize(line, f);
    if (n == 0) return;
    if (n != 6) {
      malformed(line_no, "expected 6 fields, found " + std::to_string(n));
    }
    if (!iequals(f[1], "Q0")) malformed(line_no, "second field must be Q0");
    long long rank = 0;
    if (!parse_int(f[3], rank)) malformed(line_no, "rank is not an integer");
    double score = 0.0;
    if (!parse_double(f[4], score) || !std::isfinite(score)) {
      malformed(line_no, "score is not a finite number");
    }
    if (!have_tag) {
      run.tag = std::string(f[5]);
      have_tag = true;
    } else if (f[5] != run.tag) {
      throw Error(ErrorCode::kRunTagMismatch,
                  "run tag changes from '" + run.tag + "' to '" +
                      std::string(f[5]) + "' at line " +
                      std::to_string(line_no));
    }
    auto it = run.topics.find(f[0]);
    if (it == run.topics.end()) {
      it = run.topics.emplace(std::string(f[0]), RankedList{}).first;
    }
    it->second.push_back({std::string(f[2]), score});
  });

  for (auto& [topic, list] : run.topics) {
    std::sort(list.begin(), list.end(),
              [](const ScoredDoc& a, const ScoredDoc& b) {
                return a.doc_id < b.doc_id;
              });
    auto dup = std::adjacent_find(list.begin(), list.end(),
                                  [](const ScoredDoc& a, const ScoredDoc& b) {
                                    return a.doc_id == b.doc_id;
                                  });
    if (dup != list.end()) {
      throw Error(ErrorCode::kDuplicateDocument,
                  "document '" + dup->doc_id + "' appears twice for topic '" +
                      topic + "'");
    }
    if (list.size() > options.topic_cap) {
      throw Error(ErrorCode::kTopicListTooLong,
                  "topic '" + topic + "' has " + std::to_string(list.size()) +
                      " entries; the limit is " +
                      std::to_string(options.topic_cap));
    }
    sort_canonical(list);
  }
  return run;
}

Run parse_run(std::istream& in, const RunParseOptions& options) {
  return parse_run(slurp(in), options);
}

ParsedQrels parse_qrels(std::string_view text) {
  ParsedQrels parsed;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    std::array<std::string_view, 4> f;
    std::size_t n = tokenize(line, f);
    if (n == 0) return;
    if (n != 4) {
      malformed(line_no, "expected 4 fields, found " + std::to_string(n));
    }
    int grade = 0;
    if (!parse_int(f[3], grade)) {
      malformed(line_no, "relevance grade is not an integer");
    }
    if (grade < 0) {
      grade = 0;
      ++parsed.clamped_negative;
    }
    auto topic = parsed.qrels.topics.find(f[0]);
    if (topic == parsed.qrels.topics.end()) {
      topic = parsed.qrels.topics.emplace(std::string(f[0]),
                                          Qrels::Judgments{}).first;
    }
    auto [it, inserted] = topic->second.emplace(std::string(f[2]), grade);
    if (!inserted && it->second != grade) {
      throw Error(ErrorCode::kDuplicateJudgment,
                  "conflicting grades for topic '" + topic->first +
                      "', document '" + it->first + "' at line " +
                      std::to_string(line_no));
    }
  });
  return parsed;
}

ParsedQrels parse_qrels(std::istream& in) { return parse_qrels(slurp(in)); }

std::string format_score(double score) {
  char buf[64];
  int len = std::snprintf(buf, sizeof(buf), "%#.6g", score);
  double back = 0.0;
  if (parse_double(std::string_view(buf, len), back) && back == score) {
    return std::string(buf, len);
  }
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), score);
  return std::string(buf, ptr);
}

std::string write_run(const Run& run,
                      const std::optional<std::string>& tag_override) {
  const std::string& tag = tag_override ? *tag_override : run.tag;
  std::string out;
  for (const auto& [topic, list] : run.topics) {
    std::size_t rank = 0;
    for (const ScoredDoc& doc : list) {
      out += topic;
      out += " Q0 ";
      out += doc.doc_id;
      out += ' ';
      out += std::to_string(++rank);
      out += ' ';
      out += format_score(doc.score);
      out += ' ';
      out += tag;
      out += '\n';
    }
  }
  return out;
}

std::string write_qrels(const Qrels& qrels) {
  std::string out;
  for (const auto& [topic, judgments] : qrels.topics) {
    std::vector<std::pair<std::string, int>> sorted(judgments.begin(),
                                                    judgments.end());
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [doc, grade] : sorted) {
      out += topic + " 0 " + doc + " " + std::to_string(grade) + "\n";
    }
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  return slurp(in);
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

}  // namespace fuseval
