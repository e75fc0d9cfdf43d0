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

#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "oat/taskgraph.hpp"

namespace oat::testing {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fixture(const std::string& rel) { return std::string(OAT_FIXTURE_DIR) + "/" + rel; }
inline std::string data_path(const std::string& rel) { return std::string(OAT_DATA_DIR) + "/" + rel; }

inline TaskGraph pasta_graph() { return load(read_file(fixture("graphs/creamy_zucchini_pasta.taskgraph.json"))); }

inline Node step(std::string id, std::string summary = "") {
  if (summary.empty()) summary = "Do " + id + ".";
  return Node{std::move(id), StepPayload{std::move(summary), std::nullopt, std::nullopt, std::nullopt}};
}
inline Node condition(std::string id, std::string q = "") {
  if (q.empty()) q = "Is " + id + " true?";
  return Node{std::move(id), ConditionPayload{std::move(q)}};
}
inline Node logic(std::string id, LogicOp op) { return Node{std::move(id), LogicPayload{op}}; }
inline Node timer_action(std::string id, std::string span) {
  return Node{std::move(id), ActionPayload{ActionKind::Timer, {{"span", std::move(span)}}}};
}
inline Node requirement(std::string id, std::string name, std::optional<std::string> qty = std::nullopt) {
  return Node{std::move(id), RequirementPayload{std::move(name), std::move(qty), RequirementCategory::Ingredient}};
}
inline Node extra(std::string id, std::string text, ExtraKind kind = ExtraKind::Tip) {
  return Node{std::move(id), ExtraInfoPayload{kind, std::move(text)}};
}

/// Linear chain s1 -> s2 -> ... -> sN.
inline TaskGraph linear(int n) {
  TaskGraph g;
  g.id = "linear-" + std::to_string(n);
  g.title = "Linear task";
  for (int i = 1; i <= n; ++i) {
    g.nodes.push_back(step("s" + std::to_string(i)));
    if (i > 1) g.edges.push_back({"s" + std::to_string(i - 1), "s" + std::to_string(i), EdgeLabel::Seq});
  }
  return g;
}

}  // namespace oat::testing
