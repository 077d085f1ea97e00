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

#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fuseval/trec_io.h"

namespace testutil {

inline std::string data_dir() { return FUSEVAL_TEST_DATA_DIR; }
inline std::string sample_dir() { return FUSEVAL_SAMPLE_DIR; }

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "fuseval-XXXXXX").string();
    path_ = mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

struct Doc {
  std::string id;
  double score;
};

inline fuseval::Run make_run(const std::string& tag,
                             const std::vector<std::pair<std::string, std::vector<Doc>>>& topics) {
  fuseval::Run run;
  run.tag = tag;
  for (const auto& [topic, docs] : topics) {
    fuseval::RankedList list;
    for (const Doc& d : docs) list.push_back({d.id, d.score});
    fuseval::sort_canonical(list);
    run.topics[topic] = std::move(list);
  }
  return run;
}

// Random run set over shared document pools. Scores are drawn from a small
// set of values now and then to force ties.
inline std::vector<fuseval::Run> random_runs(std::mt19937_64& rng, int n_runs,
                                             int max_docs, const std::vector<std::string>& topics,
                                             double missing_topic_rate = 0.15) {
  std::vector<fuseval::Run> runs;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int r = 0; r < n_runs; ++r) {
    fuseval::Run run;
    run.tag = "run" + std::string(1, static_cast<char>('A' + r));
    for (const std::string& t : topics) {
      if (unit(rng) < missing_topic_rate) continue;
      int n = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_docs));
      std::vector<int> pool(max_docs + 5);
      for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<int>(i);
      std::shuffle(pool.begin(), pool.end(), rng);
      const bool ties = unit(rng) < 0.3;
      fuseval::RankedList list;
      for (int i = 0; i < n; ++i) {
        double score = ties ? static_cast<double>(rng() % 3) : unit(rng) * 20.0 - 5.0;
        list.push_back({"d" + std::to_string(pool[i]), score});
      }
      fuseval::sort_canonical(list);
      run.topics[t] = std::move(list);
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

inline fuseval::Qrels random_qrels(std::mt19937_64& rng, int max_docs,
                                   const std::vector<std::string>& topics) {
  fuseval::Qrels q;
  for (const std::string& t : topics) {
    auto& j = q.topics[t];
    for (int d = 0; d < max_docs + 5; ++d) {
      unsigned roll = static_cast<unsigned>(rng() % 10);
      if (roll < 3) continue;  // unjudged
      j["d" + std::to_string(d)] = roll < 7 ? 0 : static_cast<int>(roll - 6);
    }
  }
  return q;
}

}  // namespace testutil
