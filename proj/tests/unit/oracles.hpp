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

// Test-only reference implementations. Nothing here calls into the engine,
// search or media code paths they are compared against.

#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oat/taskgraph.hpp"

namespace oat::oracle {

/// Outcome of executing a graph for one assignment of condition answers.
struct BruteRun {
  std::vector<NodeId> presented;  // steps, in order
  std::vector<NodeId> fired;      // actions, in order
  std::vector<NodeId> asked;      // conditions, in order
};

/// Declarative executor: a node runs iff it has no incoming flow edge or at
/// least one incoming edge whose source ran and whose branch was taken. The
/// visiting order is the declaration-index-minimal topological order,
/// computed here by repeated scanning.
inline BruteRun brute_force_execute(const TaskGraph& g, const std::map<NodeId, bool>& answers) {
  const std::size_t n = g.nodes.size();
  auto idx = [&](const NodeId& id) { return *g.index_of(id); };
  std::vector<std::vector<const Edge*>> incoming(n);
  for (const auto& e : g.edges)
    if (is_flow(e.label)) incoming[idx(e.to)].push_back(&e);

  std::map<std::size_t, bool> live_memo;
  std::map<std::size_t, bool> value_memo;
  std::function<bool(std::size_t)> live;
  std::function<bool(std::size_t)> value;
  auto branch_taken = [&](const Edge& e) {
    auto s = idx(e.from);
    auto kind = g.nodes[s].kind();
    if (kind == NodeKind::Condition) {
      if (e.label == EdgeLabel::Yes) return value(s);
      if (e.label == EdgeLabel::No) return !value(s);
      return true;
    }
    if (kind == NodeKind::Logic && e.label == EdgeLabel::Seq) return value(s);
    return true;
  };
  live = [&](std::size_t v) {
    if (auto it = live_memo.find(v); it != live_memo.end()) return it->second;
    bool result = incoming[v].empty();
    for (const Edge* e : incoming[v])
      if (live(idx(e->from)) && branch_taken(*e)) result = true;
    live_memo[v] = result;
    return result;
  };
  value = [&](std::size_t v) {
    if (auto it = value_memo.find(v); it != value_memo.end()) return it->second;
    bool result = false;
    if (g.nodes[v].kind() == NodeKind::Condition) {
      auto it = answers.find(g.nodes[v].id);
      result = it != answers.end() && it->second;
    } else {
      std::vector<bool> in;
      for (const Edge* e : incoming[v])
        if (e->label == EdgeLabel::In) in.push_back(live(idx(e->from)) && value(idx(e->from)));
      switch (g.nodes[v].as<LogicPayload>().op) {
        case LogicOp::And: result = !in.empty(); for (bool b : in) result = result && b; break;
        case LogicOp::Or: for (bool b : in) result = result || b; break;
        case LogicOp::Not: result = !in.at(0); break;
      }
    }
    value_memo[v] = result;
    return result;
  };

  // Minimal topological order by declaration index.
  std::vector<bool> done(n, false);
  std::vector<std::size_t> order;
  for (;;) {
    bool progressed = false;
    for (std::size_t v = 0; v < n; ++v) {
      if (done[v] || !is_executable(g.nodes[v].kind())) continue;
      bool ready = true;
      for (const Edge* e : incoming[v]) ready = ready && done[idx(e->from)];
      if (!ready) continue;
      done[v] = true;
      order.push_back(v);
      progressed = true;
      break;
    }
    if (!progressed) break;
  }

  BruteRun run;
  for (auto v : order) {
    if (!live(v)) continue;
    switch (g.nodes[v].kind()) {
      case NodeKind::Step: run.presented.push_back(g.nodes[v].id); break;
      case NodeKind::Action: run.fired.push_back(g.nodes[v].id); break;
      case NodeKind::Condition: run.asked.push_back(g.nodes[v].id); break;
      default: break;
    }
  }
  return run;
}

/// Random "diamond chain" TaskGraph with at most `max_nodes` nodes: a main
/// line of steps interleaved with yes/no diamonds, optional timer actions on
/// branches and occasional NOT/AND gates feeding a side step.
inline TaskGraph random_diamond_graph(std::mt19937& rng, std::size_t max_nodes = 12) {
  TaskGraph g;
  g.id = "diamond";
  g.title = "Generated";
  std::uniform_int_distribution<int> branch_len(0, 2);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution rare(0.25);
  int counter = 0;
  auto fresh = [&](const char* prefix) { return std::string(prefix) + std::to_string(++counter); };
  auto add_step = [&]() {
    auto id = fresh("s");
    g.nodes.push_back(Node{id, StepPayload{"Do " + id + ".", std::nullopt, std::nullopt, std::nullopt}});
    return id;
  };
  auto room = [&](std::size_t k) { return g.nodes.size() + k <= max_nodes; };

  std::vector<NodeId> conditions;
  NodeId tail = add_step();
  while (room(1)) {
    if (room(4) && coin(rng)) {
      auto c = fresh("c");
      g.nodes.push_back(Node{c, ConditionPayload{"Question " + c + "?"}});
      conditions.push_back(c);
      g.edges.push_back({tail, c, EdgeLabel::Seq});
      // Each branch ends at its last node, or at the condition itself when empty.
      std::vector<std::pair<EdgeLabel, NodeId>> ends;
      for (EdgeLabel label : {EdgeLabel::Yes, EdgeLabel::No}) {
        NodeId prev = c;
        EdgeLabel edge = label;
        int len = branch_len(rng);
        for (int k = 0; k < len && room(2); ++k) {
          NodeId id;
          if (rare(rng)) {
            id = fresh("a");
            g.nodes.push_back(Node{id, ActionPayload{ActionKind::Timer, {{"span", "2 minutes"}}}});
          } else {
            id = add_step();
          }
          g.edges.push_back({prev, id, edge});
          edge = EdgeLabel::Seq;
          prev = id;
        }
        ends.emplace_back(edge, prev);
      }
      auto join = add_step();
      for (const auto& [label, end] : ends) g.edges.push_back({end, join, label});
      tail = join;
    } else if (!conditions.empty() && room(3) && rare(rng)) {
      auto l = fresh("l");
      bool use_and = conditions.size() >= 2 && coin(rng);
      g.nodes.push_back(Node{l, LogicPayload{use_and ? LogicOp::And : LogicOp::Not}});
      g.edges.push_back({conditions.back(), l, EdgeLabel::In});
      if (use_and) g.edges.push_back({conditions[conditions.size() - 2], l, EdgeLabel::In});
      auto side = add_step();
      g.edges.push_back({l, side, EdgeLabel::Seq});
      auto next = add_step();
      g.edges.push_back({tail, next, EdgeLabel::Seq});
      g.edges.push_back({side, next, EdgeLabel::Seq});
      tail = next;
    } else {
      auto s = add_step();
      g.edges.push_back({tail, s, EdgeLabel::Seq});
      tail = s;
    }
  }
  return g;
}

/// Direct-formula Okapi BM25 over bags of words: for each query term t,
/// idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avglen)), with
/// idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)).
inline std::vector<double> bm25_reference(const std::vector<std::vector<std::string>>& docs,
                                          const std::vector<std::string>& query_terms, double k1 = 1.2,
                                          double b = 0.75) {
  const double n = static_cast<double>(docs.size());
  double total = 0;
  for (const auto& d : docs) total += static_cast<double>(d.size());
  const double avg = docs.empty() ? 0.0 : total / n;
  std::set<std::string> unique(query_terms.begin(), query_terms.end());
  std::vector<double> scores(docs.size(), 0.0);
  for (const auto& t : unique) {
    double df = 0;
    for (const auto& d : docs) df += std::count(d.begin(), d.end(), t) > 0 ? 1 : 0;
    if (df == 0) continue;
    double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    for (std::size_t i = 0; i < docs.size(); ++i) {
      double tf = static_cast<double>(std::count(docs[i].begin(), docs[i].end(), t));
      if (tf == 0) continue;
      double len = static_cast<double>(docs[i].size());
      scores[i] += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avg));
    }
  }
  return scores;
}

/// Trigram cosine written from the definition: regex-free normalization,
/// explicit trigram multiset, FNV-1a 64, bucket counts, cosine of counts.
inline double trigram_cosine(const std::string& a, const std::string& b, std::size_t dim = 256) {
  auto prep = [](const std::string& s) {
    std::string t;
    for (char c : s) {
      char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      bool keep = (l >= 'a' && l <= 'z') || (l >= '0' && l <= '9');
      if (keep) t += l;
      else if (!t.empty() && t.back() != ' ') t += ' ';
    }
    while (!t.empty() && t.back() == ' ') t.pop_back();
    return " " + t + " ";
  };
  auto counts = [&](const std::string& s) {
    std::vector<double> v(dim, 0.0);
    std::string p = prep(s);
    for (std::size_t i = 0; i + 2 < p.size(); ++i) {
      std::uint64_t h = 14695981039346656037ULL;
      for (std::size_t k = i; k < i + 3; ++k) {
        h ^= static_cast<unsigned char>(p[k]);
        h *= 1099511628211ULL;
      }
      v[h % dim] += 1;
    }
    return v;
  };
  auto va = counts(a), vb = counts(b);
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    ab += va[i] * vb[i];
    aa += va[i] * va[i];
    bb += vb[i] * vb[i];
  }
  return ab / std::sqrt(aa * bb);
}

}  // namespace oat::oracle
