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

// Structural validation of exported LaTeX tabulars. No TeX engine is
// assumed; the check covers what the exporter can get wrong: environment
// nesting, column counts, brace and math balance, unescaped specials and
// unknown macros.

#pragma once

#include <cctype>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace testutil {

namespace latex_detail {

inline const std::set<std::string>& allowed_macros() {
  static const std::set<std::string> macros{
      "begin", "end", "hline", "textbf", "dagger", "ddagger", "textasciitilde",
      "textasciicircum", "textbackslash"};
  return macros;
}

// Problems in one row or header line; `cells` receives the cell count.
inline void check_line(const std::string& line, std::size_t line_no, std::size_t& cells,
                       std::vector<std::string>& problems) {
  auto report = [&](const std::string& what) {
    problems.push_back("line " + std::to_string(line_no) + ": " + what);
  };
  int depth = 0;
  bool math = false;
  cells = 1;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '\\') {
      if (i + 1 >= line.size()) {
        report("dangling backslash");
        break;
      }
      const char n = line[i + 1];
      if (n == '\\') {
        if (i + 2 != line.size()) report("row break before end of line");
        ++i;
        continue;
      }
      if (std::string("_&%#${}").find(n) != std::string::npos) {
        ++i;
        continue;
      }
      std::size_t j = i + 1;
      while (j < line.size() && std::isalpha(static_cast<unsigned char>(line[j]))) ++j;
      const std::string name = line.substr(i + 1, j - i - 1);
      if (name.empty() || allowed_macros().count(name) == 0) report("unknown macro \\" + name);
      i = j - 1;
      continue;
    }
    switch (c) {
      case '{': ++depth; break;
      case '}':
        if (--depth < 0) report("unbalanced }");
        break;
      case '$': math = !math; break;
      case '&':
        if (depth != 0 || math) report("& inside a group");
        ++cells;
        break;
      case '^':
        if (!math) report("^ outside math");
        break;
      case '_': case '#': case '%': case '~':
        report(std::string("unescaped ") + c);
        break;
      default: break;
    }
  }
  if (depth != 0) report("unbalanced braces");
  if (math) report("unterminated math");
}

}  // namespace latex_detail

inline std::vector<std::string> latex_tabular_problems(const std::string& tex) {
  std::vector<std::string> problems;
  std::istringstream in(tex);
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  enum { kPreamble, kBody, kDone } state = kPreamble;
  while (std::getline(in, line)) {
    ++line_no;
    if (state == kPreamble) {
      if (line.empty() || line[0] == '%') continue;
      const std::string open = "\\begin{tabular}{";
      if (line.rfind(open, 0) != 0 || line.back() != '}') {
        problems.push_back("line " + std::to_string(line_no) + ": expected \\begin{tabular}");
        return problems;
      }
      const std::string spec = line.substr(open.size(), line.size() - open.size() - 1);
      for (char c : spec) {
        if (c != 'l' && c != 'r' && c != 'c') problems.push_back("bad column spec " + spec);
      }
      columns = spec.size();
      state = kBody;
      continue;
    }
    if (state == kDone) {
      if (!line.empty()) problems.push_back("line " + std::to_string(line_no) + ": text after tabular");
      continue;
    }
    if (line == "\\end{tabular}") {
      state = kDone;
      continue;
    }
    if (line == "\\hline") continue;
    if (line.size() < 3 || line.substr(line.size() - 3) != " \\\\") {
      problems.push_back("line " + std::to_string(line_no) + ": row without \\\\");
      continue;
    }
    std::size_t cells = 0;
    latex_detail::check_line(line, line_no, cells, problems);
    if (cells != columns) {
      problems.push_back("line " + std::to_string(line_no) + ": " + std::to_string(cells) +
                         " cells for " + std::to_string(columns) + " columns");
    }
  }
  if (state != kDone) problems.push_back("missing \\end{tabular}");
  return problems;
}

}  // namespace testutil
