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

// Session-level execution of a TaskGraph.
//
// Every executable node carries a status. A flow edge is *dead* when its
// source was skipped, when it is the branch a condition did not take, or
// when it is a `seq` edge out of a logic node that evaluated to false. A
// node with incoming flow edges becomes Skipped once all of them are dead,
// and Available once each is either dead or leaves a finished node. "Next"
// always takes the first Available node in schedule order, so a run that
// only says next() visits exactly the live nodes in schedule order.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "oat/dsl.hpp"
#include "oat/error.hpp"
#include "oat/taskgraph.hpp"
#include "oat/text.hpp"

namespace oat::engine {

/// Milliseconds on a monotonic time line with an arbitrary origin.
using Instant = std::chrono::milliseconds;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Instant now() const = 0;
};

class SteadyClock final : public Clock {
 public:
  Instant now() const override {
    return std::chrono::duration_cast<Instant>(std::chrono::steady_clock::now().time_since_epoch());
  }
};

/// Scripted clock for tests and the `chat --manual-clock` REPL.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Instant start = Instant{0}) : now_(start) {}
  Instant now() const override { return now_; }
  void advance(std::chrono::seconds s) { now_ += std::chrono::duration_cast<Instant>(s); }
  void advance_ms(std::int64_t ms) { now_ += Instant{ms}; }

 private:
  Instant now_;
};

enum class Status { Unseen, Available, Presented, Completed, Skipped, PendingAnswer, Resolved };

struct NodeStatus {
  Status status = Status::Unseen;
  bool value = false;  // meaningful only when Resolved

  static NodeStatus of(Status s) { return {s, false}; }
  static NodeStatus resolved(bool v) { return {Status::Resolved, v}; }
  bool is(Status s) const { return status == s; }
  bool finished() const { return status == Status::Completed || status == Status::Resolved; }

  bool operator==(const NodeStatus&) const = default;
};

struct TimerRecord {
  int id = 0;
  std::string label;
  std::int64_t duration_s = 0;
  Instant started_at{0};
  bool fired = false;

  Instant due() const { return started_at + std::chrono::duration_cast<Instant>(std::chrono::seconds(duration_s)); }
  bool operator==(const TimerRecord&) const = default;
};

struct ExecState {
  std::string graph_id;
  std::map<NodeId, NodeStatus> status;
  std::optional<NodeId> cursor;
  std::vector<NodeId> history;
  std::optional<NodeId> pending_condition;
  std::vector<TimerRecord> timers;
  std::vector<std::string> list_items;
  bool complete = false;
  bool stopped = false;

  NodeStatus of(const NodeId& id) const {
    auto it = status.find(id);
    return it == status.end() ? NodeStatus{} : it->second;
  }

  bool operator==(const ExecState&) const = default;
};

/// What the user needs to see for one step: its text and media plus the
/// requirement and extra-info nodes linked into it (declaration order).
struct StepContext {
  std::optional<NodeId> step;
  std::optional<std::size_t> position;  // 1-based step number
  std::size_t total_steps = 0;
  std::string summary;
  std::optional<std::string> details;
  std::optional<MediaRef> image;
  std::optional<MediaRef> video;
  std::vector<Node> requirements;
  std::vector<Node> extras;

  bool operator==(const StepContext&) const = default;
};

enum class EventKind { PresentStep, AskCondition, ActionFired, TimerFired, TaskComplete, Warning, Stopped };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::PresentStep: return "present_step";
    case EventKind::AskCondition: return "ask_condition";
    case EventKind::ActionFired: return "action_fired";
    case EventKind::TimerFired: return "timer_fired";
    case EventKind::TaskComplete: return "task_complete";
    case EventKind::Warning: return "warning";
    case EventKind::Stopped: return "stopped";
  }
  return "?";
}

struct Event {
  EventKind kind;
  std::optional<StepContext> step{};         // PresentStep
  NodeId node{};                             // PresentStep / AskCondition / ActionFired source
  std::string text{};                        // question, warning text or timer label
  std::string action{};                      // ActionFired: "timer" | "add_to_list"
  std::map<std::string, std::string> args{}; // ActionFired arguments
  int timer_id = 0;                          // TimerFired / timer ActionFired

  bool operator==(const Event&) const = default;
};

struct Transition {
  ExecState state;
  std::vector<Event> events;
};

// ---------------------------------------------------------------------------
// Time spans

namespace detail {

inline std::optional<std::int64_t> number_word(std::string_view w) {
  static const std::map<std::string, std::int64_t, std::less<>> kWords = {
      {"a", 1},        {"an", 1},       {"one", 1},     {"two", 2},       {"three", 3},    {"four", 4},
      {"five", 5},     {"six", 6},      {"seven", 7},   {"eight", 8},     {"nine", 9},     {"ten", 10},
      {"eleven", 11},  {"twelve", 12},  {"fifteen", 15}, {"twenty", 20},  {"thirty", 30},  {"forty", 40},
      {"fortyfive", 45}, {"fifty", 50}, {"sixty", 60},  {"ninety", 90}};
  auto it = kWords.find(w);
  if (it != kWords.end()) return it->second;
  return std::nullopt;
}

inline std::optional<std::int64_t> unit_seconds(std::string_view w) {
  static const std::map<std::string, std::int64_t, std::less<>> kUnits = {
      {"s", 1},       {"sec", 1},     {"secs", 1},    {"second", 1},   {"seconds", 1},
      {"m", 60},      {"min", 60},    {"mins", 60},   {"minute", 60},  {"minutes", 60},
      {"h", 3600},    {"hr", 3600},   {"hrs", 3600},  {"hour", 3600},  {"hours", 3600}};
  auto it = kUnits.find(w);
  if (it != kUnits.end()) return it->second;
  return std::nullopt;
}

inline std::optional<std::int64_t> digits(std::string_view w) {
  if (w.empty() || w.size() > 9) return std::nullopt;
  std::int64_t v = 0;
  for (char c : w) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

}  // namespace detail

/// "5 minutes" -> 300, "1 hour 30 minutes" -> 5400, "90 seconds" -> 90,
/// "half an hour" -> 1800, bare "10" -> 600. Case-insensitive. Throws
/// SpanError when no number/unit pair is recognized.
inline std::int64_t parse_span(std::string_view text) {
  auto toks = text::words(text);
  // Split glued forms such as "5min" or "90s".
  std::vector<std::string> parts;
  for (auto& t : toks) {
    std::size_t i = 0;
    while (i < t.size() && t[i] >= '0' && t[i] <= '9') ++i;
    if (i > 0 && i < t.size() && detail::unit_seconds(t.substr(i))) {
      parts.push_back(t.substr(0, i));
      parts.push_back(t.substr(i));
    } else if (t == "forty" || t == "fourty") {
      parts.push_back("forty");
    } else {
      parts.push_back(t);
    }
  }
  // "forty five" -> one number
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (parts[i] == "forty" && parts[i + 1] == "five") {
      parts[i] = "fortyfive";
      parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(i) + 1);
    }
  }

  if (parts.size() == 1) {
    if (auto n = detail::digits(parts[0])) {
      if (*n <= 0) throw SpanError("time span must be positive: '" + std::string(text) + "'");
      return *n * 60;
    }
  }

  std::int64_t total = 0;
  bool matched = false;
  std::int64_t pending = -1;  // -1: no number seen
  bool half = false;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& p = parts[i];
    if (p == "and" || p == "for" || p == "in") continue;
    if (p == "half") {
      half = true;
      continue;
    }
    if (half && pending < 0 && (p == "a" || p == "an")) continue;
    if (auto n = detail::digits(p)) {
      pending = *n;
      continue;
    }
    if (auto n = detail::number_word(p)) {
      pending = *n;
      continue;
    }
    if (auto u = detail::unit_seconds(p)) {
      if (half && pending < 0) {
        total += *u / 2;  // "half an hour", "half a minute"
        matched = true;
      } else if (pending >= 0) {
        total += pending * *u;
        if (half) total += *u / 2;  // "1 and a half hours"
        matched = true;
      }
      pending = -1;
      half = false;
      continue;
    }
    pending = -1;
  }
  if (!matched) throw SpanError("cannot understand time span '" + std::string(text) + "'");
  if (total <= 0) throw SpanError("time span must be positive: '" + std::string(text) + "'");
  return total;
}

/// "5 minutes", "1 hour 30 minutes", "45 seconds".
inline std::string format_duration(std::int64_t seconds) {
  auto unit = [](std::int64_t n, const char* word) {
    return std::to_string(n) + " " + word + (n == 1 ? "" : "s");
  };
  std::vector<std::string> parts;
  if (seconds >= 3600) parts.push_back(unit(seconds / 3600, "hour"));
  if (seconds % 3600 >= 60) parts.push_back(unit((seconds % 3600) / 60, "minute"));
  if (seconds % 60 || parts.empty()) parts.push_back(unit(seconds % 60, "second"));
  return text::join(parts, " ");
}

// ---------------------------------------------------------------------------
// Executor

/// Runs one TaskGraph. The executor borrows the graph (which must outlive
/// it) and holds only precomputed, immutable lookup tables, so a single
/// instance may serve many sessions. All operations are value-in/value-out:
/// on error the input state is untouched.
class Executor {
 public:
  explicit Executor(const TaskGraph& graph) : g_(graph) {
    auto report = validate(graph);
    if (!report.ok())
      throw SchemaError("task graph '" + graph.id + "' is invalid: " + report.violations.front().message);
    const std::size_t n = g_.nodes.size();
    for (std::size_t i = 0; i < n; ++i) ids_.emplace(g_.nodes[i].id, i);
    in_.resize(n);
    out_.resize(n);
    requires_.resize(n);
    enriches_.resize(n);
    for (std::size_t e = 0; e < g_.edges.size(); ++e) {
      const auto& edge = g_.edges[e];
      auto f = ids_.at(edge.from);
      auto t = ids_.at(edge.to);
      if (is_flow(edge.label)) {
        in_[t].push_back(e);
        out_[f].push_back(e);
      } else if (edge.label == EdgeLabel::Requires) {
        requires_[t].push_back(f);
      } else {
        enriches_[t].push_back(f);
      }
    }
    for (auto& v : requires_) std::sort(v.begin(), v.end());
    for (auto& v : enriches_) std::sort(v.begin(), v.end());
    for (const auto& id : topological_schedule(g_)) schedule_.push_back(ids_.at(id));
    for (auto i : schedule_) {
      if (g_.nodes[i].kind() == NodeKind::Step) steps_.push_back(i);
    }
  }

  const TaskGraph& graph() const { return g_; }
  std::size_t step_count() const { return steps_.size(); }

  /// 1-based position of a step in the step index.
  std::optional<std::size_t> step_position(const NodeId& id) const {
    for (std::size_t k = 0; k < steps_.size(); ++k) {
      if (g_.nodes[steps_[k]].id == id) return k + 1;
    }
    return std::nullopt;
  }

  Transition start(const Clock& clock) const {
    Run r(*this, ExecState{});
    r.s.graph_id = g_.id;
    for (auto i : schedule_) r.s.status[g_.nodes[i].id] = NodeStatus{};
    r.refresh();
    r.advance(clock);
    return r.finish();
  }

  /// Applies one decision. Throws RangeError (step_select out of range),
  /// ProtocolError (call not valid in this state) or SpanError.
  Transition apply(const ExecState& state, const dsl::Call& call, const Clock& clock) const {
    if (state.stopped) throw ProtocolError("task has been stopped");
    Run r(*this, state);
    const auto& fn = call.function;
    if (fn == "next") {
      r.next(clock);
    } else if (fn == "previous") {
      r.previous();
    } else if (fn == "step_select") {
      r.step_select(call.arg("step")->as_int());
    } else if (fn == "condition") {
      r.answer(call.arg("value")->as_bool(), clock);
    } else if (fn == "timer") {
      r.set_timer(call.arg("span")->as_str(), clock);
    } else if (fn == "stop") {
      r.s.stopped = true;
      r.emit({EventKind::Stopped});
    } else {
      throw ProtocolError("'" + fn + "' is not an execution command");
    }
    return r.finish();
  }

  /// Requirement and extra-info nodes linked to the current step.
  StepContext grounded_context(const ExecState& state) const {
    if (!state.cursor) throw ProtocolError("no step is currently presented");
    return context_for(ids_.at(*state.cursor));
  }

  /// Whole-task context: every requirement and extra node, no step.
  StepContext task_context() const {
    StepContext c;
    c.total_steps = steps_.size();
    for (const auto& n : g_.nodes) {
      if (n.kind() == NodeKind::Requirement) c.requirements.push_back(n);
      if (n.kind() == NodeKind::ExtraInfo) c.extras.push_back(n);
    }
    return c;
  }

  StepContext context_for(std::size_t step) const {
    const auto& node = g_.nodes[step];
    const auto& p = node.as<StepPayload>();
    StepContext c;
    c.step = node.id;
    c.position = step_position(node.id);
    c.total_steps = steps_.size();
    c.summary = p.summary;
    c.details = p.details;
    c.image = p.image;
    c.video = p.video;
    for (auto r : requires_[step]) c.requirements.push_back(g_.nodes[r]);
    for (auto x : enriches_[step]) c.extras.push_back(g_.nodes[x]);
    return c;
  }

 private:
  // Mutable working copy of a state for one transition.
  struct Run {
    const Executor& ex;
    ExecState s;
    std::vector<Event> events;

    Run(const Executor& e, ExecState st) : ex(e), s(std::move(st)) {}

    Transition finish() { return {std::move(s), std::move(events)}; }
    void emit(Event e) { events.push_back(std::move(e)); }

    const TaskGraph& g() const { return ex.g_; }
    NodeStatus st(std::size_t i) const { return s.of(g().nodes[i].id); }
    void set(std::size_t i, NodeStatus v) { s.status[g().nodes[i].id] = v; }

    bool dead(std::size_t e) const {
      const auto& edge = g().edges[e];
      auto src = ex.ids_.at(edge.from);
      auto ss = st(src);
      if (ss.is(Status::Skipped)) return true;
      if (!ss.is(Status::Resolved)) return false;
      auto kind = g().nodes[src].kind();
      if (kind == NodeKind::Condition) {
        return (edge.label == EdgeLabel::Yes && !ss.value) || (edge.label == EdgeLabel::No && ss.value);
      }
      if (kind == NodeKind::Logic) return edge.label == EdgeLabel::Seq && !ss.value;
      return false;
    }

    bool satisfied(std::size_t e) const { return !dead(e) && st(ex.ids_.at(g().edges[e].from)).finished(); }

    // Recomputes Unseen/Available/Skipped in schedule order. Sources precede
    // targets in the schedule, so one pass reaches the fixpoint. Logic nodes
    // resolve as soon as all of their inputs are settled.
    void refresh() {
      for (auto i : ex.schedule_) {
        auto cur = st(i);
        if (!cur.is(Status::Unseen) && !cur.is(Status::Available)) continue;
        const auto& ins = ex.in_[i];
        if (ins.empty()) {
          set(i, NodeStatus::of(Status::Available));
          continue;
        }
        bool all_dead = true;
        bool all_clear = true;
        for (auto e : ins) {
          bool d = dead(e);
          all_dead = all_dead && d;
          all_clear = all_clear && (d || satisfied(e));
        }
        if (all_dead) set(i, NodeStatus::of(Status::Skipped));
        else if (!all_clear) set(i, NodeStatus::of(Status::Unseen));
        else if (g().nodes[i].kind() == NodeKind::Logic) set(i, NodeStatus::resolved(evaluate_logic(i)));
        else set(i, NodeStatus::of(Status::Available));
      }
    }

    bool evaluate_logic(std::size_t i) const {
      std::vector<bool> inputs;
      for (auto e : ex.in_[i]) {
        if (g().edges[e].label != EdgeLabel::In) continue;
        auto src = st(ex.ids_.at(g().edges[e].from));
        // A skipped input was never asked; it counts as false.
        inputs.push_back(src.is(Status::Resolved) && src.value);
      }
      switch (g().nodes[i].as<LogicPayload>().op) {
        case LogicOp::And: return std::all_of(inputs.begin(), inputs.end(), [](bool b) { return b; });
        case LogicOp::Or: return std::any_of(inputs.begin(), inputs.end(), [](bool b) { return b; });
        case LogicOp::Not: return !inputs.at(0);
      }
      return false;
    }

    void present(std::size_t i, bool push) {
      set(i, NodeStatus::of(Status::Presented));
      s.cursor = g().nodes[i].id;
      if (push) s.history.push_back(g().nodes[i].id);
      s.complete = false;
      Event e{EventKind::PresentStep};
      e.node = g().nodes[i].id;
      e.step = ex.context_for(i);
      emit(std::move(e));
    }

    void ask(std::size_t i) {
      Event e{EventKind::AskCondition};
      e.node = g().nodes[i].id;
      e.text = g().nodes[i].as<ConditionPayload>().question;
      emit(std::move(e));
    }

    void fire(std::size_t i, const Clock& clock) {
      const auto& a = g().nodes[i].as<ActionPayload>();
      Event e{EventKind::ActionFired};
      e.node = g().nodes[i].id;
      e.action = std::string(to_string(a.action));
      e.args = a.args;
      if (a.action == ActionKind::Timer) {
        const auto& span = a.args.at("span");
        try {
          auto secs = parse_span(span);
          auto label = a.args.count("label") ? a.args.at("label") : span;
          e.timer_id = add_timer(label, secs, clock);
          e.args["seconds"] = std::to_string(secs);
        } catch (const SpanError& err) {
          Event w{EventKind::Warning};
          w.node = e.node;
          w.text = std::string("could not start timer: ") + err.what();
          emit(std::move(w));
          return;
        }
      } else {
        s.list_items.push_back(a.args.at("item"));
      }
      emit(std::move(e));
    }

    int add_timer(std::string label, std::int64_t secs, const Clock& clock) {
      TimerRecord t;
      t.id = static_cast<int>(s.timers.size()) + 1;
      t.label = std::move(label);
      t.duration_s = secs;
      t.started_at = clock.now();
      s.timers.push_back(std::move(t));
      return s.timers.back().id;
    }

    void advance(const Clock& clock) {
      for (;;) {
        if (s.pending_condition) {
          ask(ex.ids_.at(*s.pending_condition));
          return;
        }
        std::optional<std::size_t> pick;
        for (auto i : ex.schedule_) {
          if (st(i).is(Status::Available)) {
            pick = i;
            break;
          }
        }
        if (!pick) {
          s.complete = true;
          s.cursor.reset();
          emit({EventKind::TaskComplete});
          return;
        }
        auto i = *pick;
        switch (g().nodes[i].kind()) {
          case NodeKind::Condition:
            set(i, NodeStatus::of(Status::PendingAnswer));
            s.pending_condition = g().nodes[i].id;
            ask(i);
            return;
          case NodeKind::Logic:
            set(i, NodeStatus::resolved(evaluate_logic(i)));
            refresh();
            break;
          case NodeKind::Action:
            fire(i, clock);
            set(i, NodeStatus::of(Status::Completed));
            refresh();
            break;
          case NodeKind::Step:
            present(i, true);
            return;
          default:
            return;  // not in the schedule
        }
      }
    }

    // The cursor step goes back to waiting; refresh() decides whether it is
    // immediately Available again.
    void leave_cursor() {
      if (!s.cursor) return;
      s.status[*s.cursor] = NodeStatus{};
      s.cursor.reset();
    }

    // Steps downstream of `from` lose their completion so the flow can be
    // replayed from there. Conditions, logic and actions keep their state.
    void reopen_downstream(std::size_t from) {
      std::vector<bool> seen(g().nodes.size(), false);
      std::deque<std::size_t> queue{from};
      seen[from] = true;
      while (!queue.empty()) {
        auto v = queue.front();
        queue.pop_front();
        for (auto e : ex.out_[v]) {
          auto w = ex.ids_.at(g().edges[e].to);
          if (seen[w]) continue;
          seen[w] = true;
          queue.push_back(w);
          if (g().nodes[w].kind() == NodeKind::Step &&
              (st(w).is(Status::Completed) || st(w).is(Status::Presented)))
            set(w, NodeStatus{});
        }
      }
    }

    void next(const Clock& clock) {
      if (s.complete && !s.cursor) {
        emit({EventKind::TaskComplete});
        return;
      }
      if (s.cursor) {
        s.status[*s.cursor] = NodeStatus::of(Status::Completed);
        s.cursor.reset();
        refresh();
      }
      advance(clock);
    }

    void warn(std::string text) {
      Event w{EventKind::Warning};
      w.text = std::move(text);
      emit(std::move(w));
    }

    void previous() {
      std::size_t target;
      if (s.cursor) {
        if (s.history.size() < 2) {
          warn("already at first step");
          return;
        }
        leave_cursor();
        s.history.pop_back();
        target = ex.ids_.at(s.history.back());
      } else {
        if (s.history.empty()) {
          warn("already at first step");
          return;
        }
        target = ex.ids_.at(s.history.back());
      }
      reopen_downstream(target);
      refresh();
      present(target, false);
    }

    void step_select(std::int64_t k) {
      auto total = static_cast<std::int64_t>(ex.steps_.size());
      if (k < 1 || k > total)
        throw RangeError("step " + std::to_string(k) + " is out of range 1.." + std::to_string(total));
      auto target = ex.steps_[static_cast<std::size_t>(k - 1)];
      if (st(target).is(Status::Skipped)) {
        warn("step " + std::to_string(k) + " is not part of this run because of an earlier answer");
        return;
      }
      if (s.cursor && *s.cursor == g().nodes[target].id) {
        present(target, false);
        return;
      }
      leave_cursor();
      reopen_downstream(target);
      refresh();
      auto open = unanswered_conditions_before(target);
      if (!open.empty()) warn("this step depends on unanswered questions: " + text::join(open, " / "));
      present(target, true);
    }

    std::vector<std::string> unanswered_conditions_before(std::size_t target) const {
      std::vector<bool> seen(g().nodes.size(), false);
      std::deque<std::size_t> queue{target};
      seen[target] = true;
      std::vector<std::size_t> found;
      while (!queue.empty()) {
        auto v = queue.front();
        queue.pop_front();
        for (auto e : ex.in_[v]) {
          auto w = ex.ids_.at(g().edges[e].from);
          if (seen[w]) continue;
          seen[w] = true;
          queue.push_back(w);
          if (g().nodes[w].kind() == NodeKind::Condition && !st(w).is(Status::Resolved) &&
              !st(w).is(Status::Skipped))
            found.push_back(w);
        }
      }
      std::sort(found.begin(), found.end());
      std::vector<std::string> out;
      for (auto i : found) out.push_back(g().nodes[i].as<ConditionPayload>().question);
      return out;
    }

    void answer(bool value, const Clock& clock) {
      if (!s.pending_condition) throw ProtocolError("there is no pending question to answer");
      s.status[*s.pending_condition] = NodeStatus::resolved(value);
      s.pending_condition.reset();
      refresh();
      if (s.cursor) {
        present(ex.ids_.at(*s.cursor), false);
        return;
      }
      advance(clock);
    }

    void set_timer(const std::string& span, const Clock& clock) {
      auto secs = parse_span(span);
      Event e{EventKind::ActionFired};
      e.action = "timer";
      e.args = {{"span", span}, {"seconds", std::to_string(secs)}};
      e.timer_id = add_timer(span, secs, clock);
      emit(std::move(e));
    }
  };

  const TaskGraph& g_;
  std::map<std::string, std::size_t, std::less<>> ids_;
  std::vector<std::vector<std::size_t>> in_;   // flow edge indices by target
  std::vector<std::vector<std::size_t>> out_;  // flow edge indices by source
  std::vector<std::vector<std::size_t>> requires_;
  std::vector<std::vector<std::size_t>> enriches_;
  std::vector<std::size_t> schedule_;
  std::vector<std::size_t> steps_;
};

/// Fires every due timer exactly once.
inline Transition poll_timers(const ExecState& state, const Clock& clock) {
  Transition t{state, {}};
  auto now = clock.now();
  for (auto& timer : t.state.timers) {
    if (timer.fired || timer.due() > now) continue;
    timer.fired = true;
    Event e{EventKind::TimerFired};
    e.timer_id = timer.id;
    e.text = timer.label;
    t.events.push_back(std::move(e));
  }
  return t;
}

inline std::int64_t remaining_seconds(const TimerRecord& t, Instant now) {
  if (t.fired || t.due() <= now) return 0;
  auto ms = (t.due() - now).count();
  return (ms + 999) / 1000;
}

// ---------------------------------------------------------------------------
// Snapshot serialization

inline std::string status_name(const NodeStatus& s) {
  switch (s.status) {
    case Status::Unseen: return "unseen";
    case Status::Available: return "available";
    case Status::Presented: return "presented";
    case Status::Completed: return "completed";
    case Status::Skipped: return "skipped";
    case Status::PendingAnswer: return "pending_answer";
    case Status::Resolved: return s.value ? "resolved_true" : "resolved_false";
  }
  return "?";
}

inline NodeStatus status_from_name(std::string_view name) {
  static const std::map<std::string, NodeStatus, std::less<>> kNames = {
      {"unseen", NodeStatus::of(Status::Unseen)},
      {"available", NodeStatus::of(Status::Available)},
      {"presented", NodeStatus::of(Status::Presented)},
      {"completed", NodeStatus::of(Status::Completed)},
      {"skipped", NodeStatus::of(Status::Skipped)},
      {"pending_answer", NodeStatus::of(Status::PendingAnswer)},
      {"resolved_true", NodeStatus::resolved(true)},
      {"resolved_false", NodeStatus::resolved(false)}};
  auto it = kNames.find(name);
  if (it == kNames.end()) throw SchemaError("unknown node status '" + std::string(name) + "'");
  return it->second;
}

inline Json to_json(const ExecState& s, std::optional<Instant> now = std::nullopt) {
  Json j;
  j["graph_id"] = s.graph_id;
  Json st = Json::object();
  for (const auto& [id, v] : s.status) st[id] = status_name(v);
  j["status"] = std::move(st);
  j["cursor"] = s.cursor ? Json(*s.cursor) : Json(nullptr);
  j["history"] = s.history;
  j["pending_condition"] = s.pending_condition ? Json(*s.pending_condition) : Json(nullptr);
  Json timers = Json::array();
  for (const auto& t : s.timers) {
    Json tj{{"id", t.id},
            {"label", t.label},
            {"duration", t.duration_s},
            {"started_at_ms", t.started_at.count()},
            {"fired", t.fired}};
    if (now) tj["remaining"] = remaining_seconds(t, *now);
    timers.push_back(std::move(tj));
  }
  j["timers"] = std::move(timers);
  j["list_items"] = s.list_items;
  j["complete"] = s.complete;
  j["stopped"] = s.stopped;
  return j;
}

inline ExecState exec_state_from_json(const Json& j) {
  try {
    ExecState s;
    s.graph_id = j.at("graph_id").get<std::string>();
    for (auto it = j.at("status").begin(); it != j.at("status").end(); ++it)
      s.status[it.key()] = status_from_name(it->get<std::string>());
    if (!j.at("cursor").is_null()) s.cursor = j.at("cursor").get<std::string>();
    s.history = j.at("history").get<std::vector<std::string>>();
    if (!j.at("pending_condition").is_null()) s.pending_condition = j.at("pending_condition").get<std::string>();
    for (const auto& tj : j.at("timers")) {
      TimerRecord t;
      t.id = tj.at("id").get<int>();
      t.label = tj.at("label").get<std::string>();
      t.duration_s = tj.at("duration").get<std::int64_t>();
      t.started_at = Instant{tj.at("started_at_ms").get<std::int64_t>()};
      t.fired = tj.at("fired").get<bool>();
      s.timers.push_back(std::move(t));
    }
    s.list_items = j.at("list_items").get<std::vector<std::string>>();
    s.complete = j.at("complete").get<bool>();
    s.stopped = j.at("stopped").get<bool>();
    return s;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("malformed execution snapshot: ") + e.what());
  }
}

inline Json to_json(const StepContext& c) {
  Json j;
  j["step"] = c.step ? Json(*c.step) : Json(nullptr);
  j["position"] = c.position ? Json(*c.position) : Json(nullptr);
  j["total_steps"] = c.total_steps;
  j["summary"] = c.summary;
  j["details"] = c.details ? Json(*c.details) : Json(nullptr);
  j["image"] = oat::detail::media_to_json(c.image);
  j["video"] = oat::detail::media_to_json(c.video);
  j["requirements"] = Json::array();
  for (const auto& r : c.requirements) j["requirements"].push_back(node_to_json(r));
  j["extras"] = Json::array();
  for (const auto& x : c.extras) j["extras"].push_back(node_to_json(x));
  return j;
}

}  // namespace oat::engine
