// Copyright 2026 The OAT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Loading a directory of .taskgraph.json files.

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "oat/error.hpp"
#include "oat/taskgraph.hpp"

namespace oat {

inline constexpr std::string_view kGraphSuffix = ".taskgraph.json";

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("write failed for " + path.string());
}

/// Files read while loading a corpus directory.
struct CorpusReport {
  std::vector<std::string> indexed;
  struct Skip {
    std::string file;
    std::string reason;
  };
  std::vector<Skip> skipped;

  Json to_json() const {
    Json skipped_json = Json::array();
    for (const auto& s : skipped) skipped_json.push_back({{"file", s.file}, {"reason", s.reason}});
    return Json{{"indexed", indexed}, {"skipped", skipped_json}};
  }
};

struct Corpus {
  std::vector<TaskGraph> graphs;  // sorted by id
  CorpusReport report;

  const TaskGraph* find(std::string_view id) const {
    auto it = std::lower_bound(graphs.begin(), graphs.end(), id,
                               [](const TaskGraph& g, std::string_view v) { return g.id < v; });
    return it != graphs.end() && it->id == id ? &*it : nullptr;
  }
};

/// Sorts graphs by id; throws InputError on a duplicate id.
inline Corpus make_corpus(std::vector<TaskGraph> graphs, CorpusReport report = {}) {
  std::sort(graphs.begin(), graphs.end(), [](const TaskGraph& a, const TaskGraph& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < graphs.size(); ++i) {
    if (graphs[i].id == graphs[i - 1].id) throw InputError("duplicate task id '" + graphs[i].id + "'");
  }
  return Corpus{std::move(graphs), std::move(report)};
}

/// Loads every `*.taskgraph.json` directly under `dir`. Unreadable or
/// invalid graphs are skipped and listed in the report. A missing directory
/// is an InputError; an empty one yields an empty corpus.
inline Corpus load_corpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw InputError("corpus directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > kGraphSuffix.size() && name.ends_with(kGraphSuffix))
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<TaskGraph> graphs;
  CorpusReport report;
  for (const auto& f : files) {
    auto name = f.filename().string();
    try {
      auto g = load(read_file(f));
      auto v = validate(g);
      if (!v.ok()) {
        report.skipped.push_back({name, v.violations.front().rule + ": " + v.violations.front().message});
        continue;
      }
      graphs.push_back(std::move(g));
      report.indexed.push_back(name);
    } catch (const Error& e) {
      report.skipped.push_back({name, e.what()});
    }
  }
  return make_corpus(std::move(graphs), std::move(report));
}

}  // namespace oat
