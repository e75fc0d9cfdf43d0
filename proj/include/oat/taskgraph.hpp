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

// TaskGraph data model: typed nodes, labeled edges, validation, the
// `.taskgraph.json` corpus format and the deterministic execution schedule.

#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "oat/error.hpp"
#include "oat/text.hpp"

namespace oat {

using Json = nlohmann::json;
using NodeId = std::string;

struct MediaRef {
  std::string url;
  std::optional<std::string> caption;

  bool operator==(const MediaRef&) const = default;
};

enum class NodeKind { Step, Requirement, Condition, Logic, Action, ExtraInfo };

struct StepPayload {
  std::string summary;
  std::optional<std::string> details;
  std::optional<MediaRef> image;
  std::optional<MediaRef> video;

  bool operator==(const StepPayload&) const = default;
};

enum class RequirementCategory { Ingredient, Tool };

struct RequirementPayload {
  std::string name;
  std::optional<std::string> quantity;
  RequirementCategory category = RequirementCategory::Ingredient;

  bool operator==(const RequirementPayload&) const = default;
};

struct ConditionPayload {
  std::string question;

  bool operator==(const ConditionPayload&) const = default;
};

enum class LogicOp { And, Or, Not };

struct LogicPayload {
  LogicOp op = LogicOp::And;

  bool operator==(const LogicPayload&) const = default;
};

enum class ActionKind { Timer, AddToList };

struct ActionPayload {
  ActionKind action = ActionKind::Timer;
  std::map<std::string, std::string> args;

  bool operator==(const ActionPayload&) const = default;
};

enum class ExtraKind { Tip, Fact, Warning };

struct ExtraInfoPayload {
  ExtraKind kind = ExtraKind::Tip;
  std::string text;

  bool operator==(const ExtraInfoPayload&) const = default;
};

// Alternative order must follow NodeKind.
using NodePayload = std::variant<StepPayload, RequirementPayload, ConditionPayload, LogicPayload,
                                 ActionPayload, ExtraInfoPayload>;

/// A graph node. The kind is the active payload alternative, so a node can
/// never carry a payload that disagrees with its kind.
struct Node {
  NodeId id;
  NodePayload payload;

  NodeKind kind() const { return static_cast<NodeKind>(payload.index()); }

  template <typename P>
  const P& as() const {
    return std::get<P>(payload);
  }
  template <typename P>
  P& as() {
    return std::get<P>(payload);
  }
  template <typename P>
  const P* try_as() const {
    return std::get_if<P>(&payload);
  }

  bool operator==(const Node&) const = default;
};

enum class EdgeLabel { Seq, Yes, No, In, Requires, Enriches };

struct Edge {
  NodeId from;
  NodeId to;
  EdgeLabel label = EdgeLabel::Seq;

  bool operator==(const Edge&) const = default;
};

/// Edges that order execution. `requires` and `enriches` only decorate steps.
inline bool is_flow(EdgeLabel label) {
  return label == EdgeLabel::Seq || label == EdgeLabel::Yes || label == EdgeLabel::No || label == EdgeLabel::In;
}

/// Kinds that take part in the schedule.
inline bool is_executable(NodeKind kind) {
  return kind == NodeKind::Step || kind == NodeKind::Condition || kind == NodeKind::Logic ||
         kind == NodeKind::Action;
}

struct TaskGraph {
  std::string id;
  std::string title;
  std::string description;
  std::optional<std::string> source_url;
  std::vector<std::string> tags;
  std::vector<Node> nodes;
  std::vector<Edge> edges;

  std::optional<std::size_t> index_of(std::string_view node_id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].id == node_id) return i;
    }
    return std::nullopt;
  }

  const Node* find(std::string_view node_id) const {
    auto idx = index_of(node_id);
    return idx ? &nodes[*idx] : nullptr;
  }

  bool has_tag(std::string_view tag) const { return std::find(tags.begin(), tags.end(), tag) != tags.end(); }

  bool operator==(const TaskGraph&) const = default;
};

// ---------------------------------------------------------------------------
// Names

inline std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Step: return "step";
    case NodeKind::Requirement: return "requirement";
    case NodeKind::Condition: return "condition";
    case NodeKind::Logic: return "logic";
    case NodeKind::Action: return "action";
    case NodeKind::ExtraInfo: return "extra";
  }
  return "?";
}

inline std::string_view to_string(EdgeLabel l) {
  switch (l) {
    case EdgeLabel::Seq: return "seq";
    case EdgeLabel::Yes: return "yes";
    case EdgeLabel::No: return "no";
    case EdgeLabel::In: return "in";
    case EdgeLabel::Requires: return "requires";
    case EdgeLabel::Enriches: return "enriches";
  }
  return "?";
}

inline std::string_view to_string(LogicOp op) {
  switch (op) {
    case LogicOp::And: return "and";
    case LogicOp::Or: return "or";
    case LogicOp::Not: return "not";
  }
  return "?";
}

inline std::string_view to_string(ActionKind a) { return a == ActionKind::Timer ? "timer" : "add_to_list"; }

inline std::string_view to_string(RequirementCategory c) {
  return c == RequirementCategory::Ingredient ? "ingredient" : "tool";
}

inline std::string_view to_string(ExtraKind k) {
  switch (k) {
    case ExtraKind::Tip: return "tip";
    case ExtraKind::Fact: return "fact";
    case ExtraKind::Warning: return "warning";
  }
  return "?";
}

inline std::optional<NodeKind> node_kind_from(std::string_view s) {
  for (auto k : {NodeKind::Step, NodeKind::Requirement, NodeKind::Condition, NodeKind::Logic, NodeKind::Action,
                 NodeKind::ExtraInfo}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

inline std::optional<EdgeLabel> edge_label_from(std::string_view s) {
  for (auto l : {EdgeLabel::Seq, EdgeLabel::Yes, EdgeLabel::No, EdgeLabel::In, EdgeLabel::Requires,
                 EdgeLabel::Enriches}) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

inline std::optional<LogicOp> logic_op_from(std::string_view s) {
  auto lower = text::to_lower(s);
  for (auto op : {LogicOp::And, LogicOp::Or, LogicOp::Not}) {
    if (to_string(op) == lower) return op;
  }
  return std::nullopt;
}

inline std::optional<ActionKind> action_kind_from(std::string_view s) {
  if (s == "timer") return ActionKind::Timer;
  if (s == "add_to_list") return ActionKind::AddToList;
  return std::nullopt;
}

inline std::optional<RequirementCategory> category_from(std::string_view s) {
  if (s == "ingredient") return RequirementCategory::Ingredient;
  if (s == "tool") return RequirementCategory::Tool;
  return std::nullopt;
}

inline std::optional<ExtraKind> extra_kind_from(std::string_view s) {
  if (s == "tip") return ExtraKind::Tip;
  if (s == "fact") return ExtraKind::Fact;
  if (s == "warning") return ExtraKind::Warning;
  return std::nullopt;
}

/// The argument an action must carry.
inline std::string_view required_action_arg(ActionKind a) { return a == ActionKind::Timer ? "span" : "item"; }

// ---------------------------------------------------------------------------
// Validation

inline constexpr std::size_t kMaxSummaryLength = 200;

struct Violation {
  std::string rule;
  NodeId node;                       // empty for graph-level violations
  std::optional<std::size_t> edge;   // index into TaskGraph::edges
  std::string message;

  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }

  bool has(std::string_view rule) const {
    return std::any_of(violations.begin(), violations.end(), [&](const auto& v) { return v.rule == rule; });
  }

  std::size_t count(std::string_view rule) const {
    return static_cast<std::size_t>(
        std::count_if(violations.begin(), violations.end(), [&](const auto& v) { return v.rule == rule; }));
  }

  bool operator==(const ValidationReport&) const = default;
};

namespace detail {

// Strongly connected components of the flow subgraph (Tarjan). Only
// components that form a cycle are returned; each is sorted by declaration.
inline std::vector<std::vector<std::size_t>> flow_cycles(const TaskGraph& g,
                                                         const std::unordered_map<std::string, std::size_t>& ids) {
  const std::size_t n = g.nodes.size();
  std::vector<std::vector<std::size_t>> adj(n);
  std::vector<bool> self_loop(n, false);
  for (const auto& e : g.edges) {
    if (!is_flow(e.label)) continue;
    auto f = ids.find(e.from);
    auto t = ids.find(e.to);
    if (f == ids.end() || t == ids.end()) continue;
    adj[f->second].push_back(t->second);
    if (f->second == t->second) self_loop[f->second] = true;
  }

  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  int counter = 0;

  std::function<void(std::size_t)> strong = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (auto w : adj[v]) {
      if (index[w] < 0) {
        strong(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> comp;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(w);
      } while (w != v);
      if (comp.size() > 1 || self_loop[v]) {
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] < 0) strong(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Checks every TaskGraph invariant and reports all violations. Pure; the
/// report is ordered by node id, then edge index.
inline ValidationReport validate(const TaskGraph& g) {
  std::vector<Violation> out;
  auto add = [&](std::string rule, NodeId node, std::optional<std::size_t> edge, std::string msg) {
    out.push_back({std::move(rule), std::move(node), edge, std::move(msg)});
  };

  std::unordered_map<std::string, std::size_t> ids;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    if (n.id.empty()) {
      add("empty_id", "", std::nullopt, "node #" + std::to_string(i) + " has an empty id");
      continue;
    }
    if (!ids.emplace(n.id, i).second) add("duplicate_id", n.id, std::nullopt, "duplicate node id '" + n.id + "'");
  }

  bool any_step = false;
  for (const auto& n : g.nodes) {
    std::visit(
        [&](const auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, StepPayload>) {
            any_step = true;
            if (text::trim(p.summary).empty()) add("empty_field", n.id, std::nullopt, "step summary is empty");
            if (p.summary.size() > kMaxSummaryLength)
              add("summary_too_long", n.id, std::nullopt,
                  "step summary exceeds " + std::to_string(kMaxSummaryLength) + " characters");
          } else if constexpr (std::is_same_v<P, RequirementPayload>) {
            if (text::trim(p.name).empty()) add("empty_field", n.id, std::nullopt, "requirement name is empty");
          } else if constexpr (std::is_same_v<P, ConditionPayload>) {
            if (text::trim(p.question).empty()) add("empty_field", n.id, std::nullopt, "condition question is empty");
          } else if constexpr (std::is_same_v<P, ActionPayload>) {
            auto key = std::string(required_action_arg(p.action));
            if (!p.args.count(key))
              add("action_args", n.id, std::nullopt,
                  std::string(to_string(p.action)) + " action requires argument '" + key + "'");
          } else if constexpr (std::is_same_v<P, ExtraInfoPayload>) {
            if (text::trim(p.text).empty()) add("empty_field", n.id, std::nullopt, "extra info text is empty");
          }
        },
        n.payload);
  }
  if (!any_step) add("missing_step", "", std::nullopt, "graph must contain at least one Step node");

  // Edge endpoints and label placement.
  std::vector<std::size_t> in_count(g.nodes.size(), 0);
  std::vector<bool> has_branch(g.nodes.size(), false);
  for (std::size_t ei = 0; ei < g.edges.size(); ++ei) {
    const auto& e = g.edges[ei];
    auto f = ids.find(e.from);
    auto t = ids.find(e.to);
    if (f == ids.end() || t == ids.end()) {
      std::string missing = f == ids.end() ? e.from : e.to;
      add("dangling_edge", e.from, ei, "edge references unknown node '" + missing + "'");
      continue;
    }
    NodeKind fk = g.nodes[f->second].kind();
    NodeKind tk = g.nodes[t->second].kind();
    auto bad = [&](const std::string& why) {
      add("label_placement", e.from, ei,
          "'" + std::string(to_string(e.label)) + "' edge " + e.from + "->" + e.to + ": " + why);
    };
    switch (e.label) {
      case EdgeLabel::Yes:
      case EdgeLabel::No:
        if (fk != NodeKind::Condition) bad("yes/no edges must originate at a condition");
        else has_branch[f->second] = true;
        if (!is_executable(tk)) bad("branch target must be executable");
        break;
      case EdgeLabel::In:
        if (tk != NodeKind::Logic) bad("'in' edges must terminate at a logic node");
        else ++in_count[t->second];
        if (fk != NodeKind::Condition && fk != NodeKind::Logic) bad("'in' edges must originate at a condition or logic node");
        break;
      case EdgeLabel::Requires:
        if (fk != NodeKind::Requirement || tk != NodeKind::Step) bad("'requires' edges run requirement -> step");
        break;
      case EdgeLabel::Enriches:
        if (fk != NodeKind::ExtraInfo || tk != NodeKind::Step) bad("'enriches' edges run extra -> step");
        break;
      case EdgeLabel::Seq:
        if (!is_executable(fk)) bad("'seq' edges must originate at a step, condition, logic or action node");
        if (!is_executable(tk)) bad("'seq' target must be executable");
        break;
    }
  }

  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    if (n.id.empty()) continue;
    if (auto* lp = n.try_as<LogicPayload>()) {
      if (lp->op == LogicOp::Not && in_count[i] != 1)
        add("logic_arity", n.id, std::nullopt,
            "NOT needs exactly one 'in' edge, found " + std::to_string(in_count[i]));
      if (lp->op != LogicOp::Not && in_count[i] < 2)
        add("logic_arity", n.id, std::nullopt,
            std::string(lp->op == LogicOp::And ? "AND" : "OR") + " needs at least two 'in' edges, found " +
                std::to_string(in_count[i]));
    }
    if (n.kind() == NodeKind::Condition && !has_branch[i])
      add("condition_branch", n.id, std::nullopt, "condition has no outgoing yes/no edge");
  }

  for (const auto& comp : detail::flow_cycles(g, ids)) {
    std::vector<std::string> names;
    for (auto i : comp) names.push_back(g.nodes[i].id);
    std::sort(names.begin(), names.end());
    add("cycle", names.front(), std::nullopt, "flow edges form a cycle through: " + text::join(names, ", "));
  }

  std::stable_sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
    if (a.node != b.node) return a.node < b.node;
    // Node-level violations precede edge-level ones for the same node.
    auto ae = a.edge ? static_cast<long long>(*a.edge) : -1LL;
    auto be = b.edge ? static_cast<long long>(*b.edge) : -1LL;
    return ae < be;
  });
  return {std::move(out)};
}

// ---------------------------------------------------------------------------
// Scheduling

/// Executable nodes (steps, conditions, logic, actions) in Kahn order over the
/// flow edges; ready nodes are taken in declaration order. Throws CycleError
/// when the flow subgraph is cyclic.
inline std::vector<NodeId> topological_schedule(const TaskGraph& g) {
  const std::size_t n = g.nodes.size();
  std::unordered_map<std::string, std::size_t> ids;
  for (std::size_t i = 0; i < n; ++i) ids.emplace(g.nodes[i].id, i);

  std::vector<std::vector<std::size_t>> succ(n);
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& e : g.edges) {
    if (!is_flow(e.label)) continue;
    auto f = ids.find(e.from);
    auto t = ids.find(e.to);
    if (f == ids.end() || t == ids.end()) continue;
    if (!is_executable(g.nodes[f->second].kind()) || !is_executable(g.nodes[t->second].kind())) continue;
    succ[f->second].push_back(t->second);
    ++indegree[t->second];
  }

  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  std::size_t executable = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_executable(g.nodes[i].kind())) continue;
    ++executable;
    if (indegree[i] == 0) ready.push(i);
  }

  std::vector<NodeId> order;
  order.reserve(executable);
  while (!ready.empty()) {
    auto v = ready.top();
    ready.pop();
    order.push_back(g.nodes[v].id);
    for (auto w : succ[v]) {
      if (--indegree[w] == 0) ready.push(w);
    }
  }
  if (order.size() != executable) throw CycleError("task graph '" + g.id + "' has a cycle among its flow edges");
  return order;
}

/// Step nodes in schedule order; position k (1-based) is "step k".
inline std::vector<NodeId> step_index(const TaskGraph& g) {
  std::vector<NodeId> steps;
  for (auto& id : topological_schedule(g)) {
    if (g.find(id)->kind() == NodeKind::Step) steps.push_back(std::move(id));
  }
  return steps;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline Json media_to_json(const std::optional<MediaRef>& m) {
  if (!m) return nullptr;
  Json j;
  j["url"] = m->url;
  j["caption"] = m->caption ? Json(*m->caption) : Json(nullptr);
  return j;
}

inline Json opt_string(const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); }

/// Reads fields from a JSON object while tracking which keys were consumed,
/// so leftovers (fields that belong to another kind) can be rejected.
class FieldReader {
 public:
  FieldReader(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw SchemaError(path_ + ": expected an object");
  }

  std::string required_string(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) throw SchemaError(path_ + "." + key + ": missing required field");
    if (!it->is_string()) throw SchemaError(path_ + "." + key + ": expected a string");
    return it->get<std::string>();
  }

  std::optional<std::string> optional_string(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw SchemaError(path_ + "." + key + ": expected a string or null");
    return it->get<std::string>();
  }

  const Json* optional(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  const Json& required(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) throw SchemaError(path_ + "." + key + ": missing required field");
    return *it;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw SchemaError(path_ + "." + it.key() + ": unexpected field");
    }
  }

  const std::string& path() const { return path_; }

 private:
  const Json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

inline std::optional<MediaRef> media_from_json(const Json* j, const std::string& path) {
  if (!j) return std::nullopt;
  FieldReader r(*j, path);
  MediaRef m;
  m.url = r.required_string("url");
  m.caption = r.optional_string("caption");
  r.finish();
  return m;
}

}  // namespace detail

inline Json node_to_json(const Node& n) {
  Json j;
  j["id"] = n.id;
  j["kind"] = std::string(to_string(n.kind()));
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, StepPayload>) {
          j["summary"] = p.summary;
          j["details"] = detail::opt_string(p.details);
          j["image"] = detail::media_to_json(p.image);
          j["video"] = detail::media_to_json(p.video);
        } else if constexpr (std::is_same_v<P, RequirementPayload>) {
          j["name"] = p.name;
          j["quantity"] = detail::opt_string(p.quantity);
          j["category"] = std::string(to_string(p.category));
        } else if constexpr (std::is_same_v<P, ConditionPayload>) {
          j["question"] = p.question;
        } else if constexpr (std::is_same_v<P, LogicPayload>) {
          j["op"] = std::string(to_string(p.op));
        } else if constexpr (std::is_same_v<P, ActionPayload>) {
          j["action"] = std::string(to_string(p.action));
          j["args"] = p.args;
        } else if constexpr (std::is_same_v<P, ExtraInfoPayload>) {
          j["extra_kind"] = std::string(to_string(p.kind));
          j["text"] = p.text;
        }
      },
      n.payload);
  return j;
}

inline Json edge_to_json(const Edge& e) {
  return Json{{"from", e.from}, {"to", e.to}, {"label", std::string(to_string(e.label))}};
}

inline Node node_from_json(const Json& j, const std::string& path) {
  detail::FieldReader r(j, path);
  Node n;
  n.id = r.required_string("id");
  auto kind_name = r.required_string("kind");
  auto kind = node_kind_from(kind_name);
  if (!kind) throw SchemaError(path + ".kind: unknown node kind '" + kind_name + "'");
  switch (*kind) {
    case NodeKind::Step: {
      StepPayload p;
      p.summary = r.required_string("summary");
      p.details = r.optional_string("details");
      p.image = detail::media_from_json(r.optional("image"), path + ".image");
      p.video = detail::media_from_json(r.optional("video"), path + ".video");
      n.payload = std::move(p);
      break;
    }
    case NodeKind::Requirement: {
      RequirementPayload p;
      p.name = text::to_lower(text::trim(r.required_string("name")));
      p.quantity = r.optional_string("quantity");
      auto cat = r.required_string("category");
      auto c = category_from(cat);
      if (!c) throw SchemaError(path + ".category: unknown category '" + cat + "'");
      p.category = *c;
      n.payload = std::move(p);
      break;
    }
    case NodeKind::Condition: {
      n.payload = ConditionPayload{r.required_string("question")};
      break;
    }
    case NodeKind::Logic: {
      auto op_name = r.required_string("op");
      auto op = logic_op_from(op_name);
      if (!op) throw SchemaError(path + ".op: unknown logic op '" + op_name + "'");
      n.payload = LogicPayload{*op};
      break;
    }
    case NodeKind::Action: {
      ActionPayload p;
      auto a = r.required_string("action");
      auto ak = action_kind_from(a);
      if (!ak) throw SchemaError(path + ".action: unknown action '" + a + "'");
      p.action = *ak;
      if (auto* args = r.optional("args")) {
        if (!args->is_object()) throw SchemaError(path + ".args: expected an object");
        for (auto it = args->begin(); it != args->end(); ++it) {
          if (!it->is_string()) throw SchemaError(path + ".args." + it.key() + ": expected a string");
          p.args.emplace(it.key(), it->get<std::string>());
        }
      }
      n.payload = std::move(p);
      break;
    }
    case NodeKind::ExtraInfo: {
      ExtraInfoPayload p;
      auto k = r.required_string("extra_kind");
      auto ek = extra_kind_from(k);
      if (!ek) throw SchemaError(path + ".extra_kind: unknown extra kind '" + k + "'");
      p.kind = *ek;
      p.text = r.required_string("text");
      n.payload = std::move(p);
      break;
    }
  }
  r.finish();
  return n;
}

inline Edge edge_from_json(const Json& j, const std::string& path) {
  detail::FieldReader r(j, path);
  Edge e;
  e.from = r.required_string("from");
  e.to = r.required_string("to");
  auto label = r.required_string("label");
  auto l = edge_label_from(label);
  if (!l) throw SchemaError(path + ".label: unknown edge label '" + label + "'");
  e.label = *l;
  r.finish();
  return e;
}

inline Json to_json(const TaskGraph& g) {
  Json j;
  j["schema_version"] = 1;
  j["id"] = g.id;
  j["title"] = g.title;
  j["description"] = g.description;
  j["source_url"] = detail::opt_string(g.source_url);
  j["tags"] = g.tags;
  j["nodes"] = Json::array();
  for (const auto& n : g.nodes) j["nodes"].push_back(node_to_json(n));
  j["edges"] = Json::array();
  for (const auto& e : g.edges) j["edges"].push_back(edge_to_json(e));
  return j;
}

inline TaskGraph graph_from_json(const Json& j) {
  detail::FieldReader r(j, "$");
  const auto& version = r.required("schema_version");
  if (!version.is_number_integer() || version.get<long long>() != 1)
    throw SchemaError("$.schema_version: unsupported schema version " + version.dump());
  TaskGraph g;
  g.id = r.required_string("id");
  g.title = r.required_string("title");
  g.description = r.optional_string("description").value_or("");
  g.source_url = r.optional_string("source_url");
  if (auto* tags = r.optional("tags")) {
    if (!tags->is_array()) throw SchemaError("$.tags: expected an array");
    for (std::size_t i = 0; i < tags->size(); ++i) {
      if (!(*tags)[i].is_string()) throw SchemaError("$.tags[" + std::to_string(i) + "]: expected a string");
      g.tags.push_back((*tags)[i].get<std::string>());
    }
  }
  const auto& nodes = r.required("nodes");
  if (!nodes.is_array()) throw SchemaError("$.nodes: expected an array");
  for (std::size_t i = 0; i < nodes.size(); ++i)
    g.nodes.push_back(node_from_json(nodes[i], "$.nodes[" + std::to_string(i) + "]"));
  if (auto* edges = r.optional("edges")) {
    if (!edges->is_array()) throw SchemaError("$.edges: expected an array");
    for (std::size_t i = 0; i < edges->size(); ++i)
      g.edges.push_back(edge_from_json((*edges)[i], "$.edges[" + std::to_string(i) + "]"));
  }
  r.finish();
  return g;
}

/// Parses JSON text, converting parser failures into ParseError with a
/// line/column position.
inline Json parse_json_text(std::string_view bytes, std::string_view what = "document") {
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, bytes.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (bytes[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("malformed " + std::string(what) + " at line " + std::to_string(line) + ", column " +
                     std::to_string(col) + ": " + e.what());
  }
}

/// Reads a `.taskgraph.json` document. Structure is checked here; graph
/// invariants are left to validate().
inline TaskGraph load(std::string_view bytes) { return graph_from_json(parse_json_text(bytes, "task graph")); }

/// Canonical encoding: sorted keys, two-space indent, trailing newline.
inline std::string save(const TaskGraph& g) { return to_json(g).dump(2) + "\n"; }

inline Json to_json(const ValidationReport& report) {
  Json arr = Json::array();
  for (const auto& v : report.violations) {
    Json j;
    j["rule"] = v.rule;
    j["node"] = v.node.empty() ? Json(nullptr) : Json(v.node);
    j["edge"] = v.edge ? Json(*v.edge) : Json(nullptr);
    j["message"] = v.message;
    arr.push_back(std::move(j));
  }
  return Json{{"valid", report.ok()}, {"violations", std::move(arr)}};
}

}  // namespace oat
