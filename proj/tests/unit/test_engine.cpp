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

#include <gtest/gtest.h>

#include <random>

#include "oat/engine.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace oat::engine {
namespace {

using dsl::make_condition;
using dsl::make_next;
using dsl::make_previous;
using dsl::make_step_select;
using dsl::make_stop;
using dsl::make_timer;

const Event& only(const std::vector<Event>& events, EventKind kind) {
  auto it = std::find_if(events.begin(), events.end(), [&](const Event& e) { return e.kind == kind; });
  if (it == events.end()) throw std::runtime_error("event not found: " + std::string(to_string(kind)));
  return *it;
}

bool has(const std::vector<Event>& events, EventKind kind) {
  return std::any_of(events.begin(), events.end(), [&](const Event& e) { return e.kind == kind; });
}

TEST(ParseSpan, Examples) {
  EXPECT_EQ(parse_span("5 minutes"), 300);
  EXPECT_EQ(parse_span("1 hour 30 minutes"), 5400);
  EXPECT_EQ(parse_span("90 seconds"), 90);
  EXPECT_EQ(parse_span("10"), 600);
  EXPECT_EQ(parse_span("1 Hour and 5 Minutes"), 3900);
  EXPECT_EQ(parse_span("half an hour"), 1800);
  EXPECT_EQ(parse_span("an hour"), 3600);
  EXPECT_EQ(parse_span("forty five minutes"), 2700);
  EXPECT_EQ(parse_span("5min"), 300);
  EXPECT_EQ(parse_span("ten minutes"), 600);
  EXPECT_THROW(parse_span("a while"), SpanError);
  EXPECT_THROW(parse_span(""), SpanError);
  EXPECT_THROW(parse_span("0 minutes"), SpanError);
  EXPECT_THROW(parse_span("minutes"), SpanError);
}

TEST(Engine, LinearRunCompletes) {
  auto g = testing::linear(3);
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  ASSERT_EQ(t.events.size(), 1u);
  EXPECT_EQ(t.events[0].kind, EventKind::PresentStep);
  EXPECT_EQ(t.state.cursor, std::optional<NodeId>("s1"));
  t = ex.apply(t.state, make_next(), clock);
  t = ex.apply(t.state, make_next(), clock);
  EXPECT_EQ(only(t.events, EventKind::PresentStep).node, "s3");
  t = ex.apply(t.state, make_next(), clock);
  EXPECT_TRUE(has(t.events, EventKind::TaskComplete));
  EXPECT_TRUE(t.state.complete);
  // Further next() is idempotent.
  auto again = ex.apply(t.state, make_next(), clock);
  EXPECT_TRUE(has(again.events, EventKind::TaskComplete));
  EXPECT_EQ(again.state, t.state);
}

TEST(Engine, ConditionAtHeadAsksFirst) {
  TaskGraph g;
  g.id = "head";
  g.nodes = {testing::condition("c1", "Do you have an oven?"), testing::step("s1"), testing::step("s2")};
  g.edges = {{"c1", "s1", EdgeLabel::Yes}, {"c1", "s2", EdgeLabel::Seq}};
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  ASSERT_EQ(t.events.size(), 1u);
  EXPECT_EQ(t.events[0].kind, EventKind::AskCondition);
  EXPECT_EQ(t.events[0].text, "Do you have an oven?");
  EXPECT_EQ(t.state.pending_condition, std::optional<NodeId>("c1"));
  EXPECT_FALSE(t.state.cursor);
  // The unconditional successor still runs after a "no".
  t = ex.apply(t.state, make_condition(false), clock);
  EXPECT_EQ(only(t.events, EventKind::PresentStep).node, "s2");
  EXPECT_TRUE(t.state.of("s1").is(Status::Skipped));
}

TEST(Engine, PastaStartsWithFirstPrepStep) {
  auto g = testing::pasta_graph();
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  ASSERT_EQ(t.events.size(), 1u);
  EXPECT_EQ(t.events[0].node, "s1");
  EXPECT_EQ(t.events[0].step->summary, "Bring a large pot of salted water to a boil.");
}

TEST(Engine, PastaDriedBranch) {
  auto g = testing::pasta_graph();
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  t = ex.apply(t.state, make_next(), clock);  // s2
  t = ex.apply(t.state, make_next(), clock);  // question
  EXPECT_EQ(only(t.events, EventKind::AskCondition).text, "Is your pasta fresh?");
  t = ex.apply(t.state, make_condition(false), clock);
  const auto& fired = only(t.events, EventKind::ActionFired);
  EXPECT_EQ(fired.action, "timer");
  EXPECT_EQ(fired.args.at("span"), "10 minutes");
  EXPECT_EQ(fired.args.at("seconds"), "600");
  EXPECT_EQ(only(t.events, EventKind::PresentStep).node, "s4");
  EXPECT_TRUE(t.state.of("s3").is(Status::Skipped));
  ASSERT_EQ(t.state.timers.size(), 1u);
  EXPECT_EQ(t.state.timers[0].duration_s, 600);
}

TEST(Engine, PastaFreshBranchNeverFiresTimer) {
  auto g = testing::pasta_graph();
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  t = ex.apply(t.state, make_next(), clock);
  t = ex.apply(t.state, make_next(), clock);
  t = ex.apply(t.state, make_condition(true), clock);
  EXPECT_EQ(only(t.events, EventKind::PresentStep).node, "s3");
  EXPECT_FALSE(has(t.events, EventKind::ActionFired));
  EXPECT_TRUE(t.state.of("a1").is(Status::Skipped));
  EXPECT_TRUE(t.state.of("s4").is(Status::Skipped));
  t = ex.apply(t.state, make_next(), clock);
  EXPECT_EQ(only(t.events, EventKind::PresentStep).node, "s5");
  EXPECT_TRUE(t.state.timers.empty());
}

TEST(Engine, StepSelectGoesBackAndGrowsHistory) {
  auto g = testing::linear(5);
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  t = ex.apply(t.state, make_next(), clock);
  t = ex.apply(t.state, make_next(), clock);
  ASSERT_EQ(t.state.cursor, std::optional<NodeId>("s3"));
  auto before = t.state.history.size();
  t = ex.apply(t.state, make_step_select(1), clock);
  EXPECT_EQ(only(t.events, EventKind::PresentStep).node, "s1");
  EXPECT_EQ(t.state.history.size(), before + 1);
  // Continuing replays step 2.
  t = ex.apply(t.state, make_next(), clock);
  EXPECT_EQ(only(t.events, EventKind::PresentStep).node, "s2");
}

TEST(Engine, StepSelectOutOfRange) {
  auto g = testing::linear(3);
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  EXPECT_THROW(ex.apply(t.state, make_step_select(0), clock), RangeError);
  EXPECT_THROW(ex.apply(t.state, make_step_select(4), clock), RangeError);
}

TEST(Engine, StepSelectWarnsAboutUnansweredQuestion) {
  auto g = testing::pasta_graph();
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  t = ex.apply(t.state, make_step_select(5), clock);
  const auto& w = only(t.events, EventKind::Warning);
  EXPECT_NE(w.text.find("Is your pasta fresh?"), std::string::npos);
  EXPECT_EQ(only(t.events, EventKind::PresentStep).node, "s5");
}

TEST(Engine, StepSelectOnSkippedStepIsRefused) {
  auto g = testing::pasta_graph();
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  t = ex.apply(t.state, make_next(), clock);
  t = ex.apply(t.state, make_next(), clock);
  t = ex.apply(t.state, make_condition(true), clock);
  auto r = ex.apply(t.state, make_step_select(4), clock);  // s4 is on the dried branch
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0].kind, EventKind::Warning);
  EXPECT_EQ(r.state, t.state);
}

TEST(Engine, PreviousAtFirstStepWarns) {
  auto g = testing::linear(3);
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  auto r = ex.apply(t.state, make_previous(), clock);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0].kind, EventKind::Warning);
  EXPECT_EQ(r.events[0].text, "already at first step");
  EXPECT_EQ(r.state, t.state);
}

TEST(Engine, PreviousWhileQuestionPendingShowsLastStep) {
  auto g = testing::pasta_graph();
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  t = ex.apply(t.state, make_next(), clock);
  t = ex.apply(t.state, make_next(), clock);
  ASSERT_TRUE(t.state.pending_condition);
  t = ex.apply(t.state, make_previous(), clock);
  EXPECT_EQ(only(t.events, EventKind::PresentStep).node, "s2");
  t = ex.apply(t.state, make_next(), clock);
  EXPECT_EQ(only(t.events, EventKind::AskCondition).node, "c1");
}

TEST(Engine, ConditionWithoutPendingIsProtocolError) {
  auto g = testing::linear(2);
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  EXPECT_THROW(ex.apply(t.state, make_condition(true), clock), ProtocolError);
}

TEST(Engine, AnswersAreImmutable) {
  auto g = testing::pasta_graph();
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  t = ex.apply(t.state, make_next(), clock);
  t = ex.apply(t.state, make_next(), clock);
  t = ex.apply(t.state, make_condition(true), clock);
  EXPECT_THROW(ex.apply(t.state, make_condition(false), clock), ProtocolError);
}

TEST(Engine, NotAndTruthTables) {
  TaskGraph g;
  g.id = "logic";
  g.nodes = {testing::condition("c1"), testing::condition("c2"), testing::logic("not1", LogicOp::Not),
             testing::logic("and1", LogicOp::And), testing::step("s_not"), testing::step("s_and"),
             testing::step("end")};
  g.edges = {{"c1", "c2", EdgeLabel::Seq},       {"c1", "end", EdgeLabel::Yes},
             {"c2", "end", EdgeLabel::No},        {"c1", "not1", EdgeLabel::In},
             {"c1", "and1", EdgeLabel::In},       {"c2", "and1", EdgeLabel::In},
             {"not1", "s_not", EdgeLabel::Seq},   {"and1", "s_and", EdgeLabel::Seq}};
  ASSERT_TRUE(validate(g).ok());
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  t = ex.apply(t.state, make_condition(true), clock);
  EXPECT_EQ(t.state.of("not1"), NodeStatus::resolved(false));
  t = ex.apply(t.state, make_condition(false), clock);
  EXPECT_EQ(t.state.of("and1"), NodeStatus::resolved(false));
  EXPECT_TRUE(t.state.of("s_not").is(Status::Skipped));
  EXPECT_TRUE(t.state.of("s_and").is(Status::Skipped));
  EXPECT_EQ(only(t.events, EventKind::PresentStep).node, "end");
}

TEST(Engine, TimerCallAndPolling) {
  auto g = testing::linear(2);
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  t = ex.apply(t.state, make_timer("5 minutes"), clock);
  const auto& fired = only(t.events, EventKind::ActionFired);
  EXPECT_EQ(fired.args.at("seconds"), "300");
  EXPECT_EQ(fired.timer_id, 1);
  EXPECT_EQ(t.state.cursor, std::optional<NodeId>("s1"));

  clock.advance(std::chrono::seconds(299));
  auto p = poll_timers(t.state, clock);
  EXPECT_TRUE(p.events.empty());
  EXPECT_EQ(remaining_seconds(p.state.timers[0], clock.now()), 1);
  clock.advance(std::chrono::seconds(1));
  p = poll_timers(p.state, clock);
  ASSERT_EQ(p.events.size(), 1u);
  EXPECT_EQ(p.events[0].kind, EventKind::TimerFired);
  EXPECT_EQ(p.events[0].text, "5 minutes");
  p = poll_timers(p.state, clock);
  EXPECT_TRUE(p.events.empty());
}

TEST(Engine, BadSpanIsSpanError) {
  auto g = testing::linear(1);
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  EXPECT_THROW(ex.apply(t.state, make_timer("a while"), clock), SpanError);
}

TEST(Engine, StopFreezesState) {
  auto g = testing::linear(2);
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  t = ex.apply(t.state, make_stop(), clock);
  EXPECT_EQ(t.events[0].kind, EventKind::Stopped);
  EXPECT_THROW(ex.apply(t.state, make_next(), clock), ProtocolError);
}

TEST(Engine, AddToListAction) {
  auto g = testing::linear(2);
  g.nodes.push_back(Node{"a1", ActionPayload{ActionKind::AddToList, {{"item", "basil"}}}});
  g.edges = {{"s1", "a1", EdgeLabel::Seq}, {"a1", "s2", EdgeLabel::Seq}};
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  t = ex.apply(t.state, make_next(), clock);
  EXPECT_EQ(t.state.list_items, (std::vector<std::string>{"basil"}));
  EXPECT_EQ(only(t.events, EventKind::ActionFired).action, "add_to_list");
}

TEST(GroundedContext, PastaStepTwo) {
  auto g = testing::pasta_graph();
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  t = ex.apply(t.state, make_next(), clock);
  auto ctx = ex.grounded_context(t.state);
  std::vector<std::string> names;
  for (const auto& r : ctx.requirements) names.push_back(r.as<RequirementPayload>().name);
  EXPECT_EQ(names, (std::vector<std::string>{"zucchini", "olive oil", "grater"}));
  ASSERT_EQ(ctx.extras.size(), 1u);
  EXPECT_EQ(ctx.extras[0].id, "x2");
  EXPECT_EQ(ctx.position, std::optional<std::size_t>(2));
}

TEST(GroundedContext, NoLinksAndNoCursor) {
  auto g = testing::linear(2);
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  auto ctx = ex.grounded_context(t.state);
  EXPECT_TRUE(ctx.requirements.empty());
  EXPECT_TRUE(ctx.extras.empty());
  t = ex.apply(t.state, make_next(), clock);
  t = ex.apply(t.state, make_next(), clock);
  EXPECT_THROW(ex.grounded_context(t.state), ProtocolError);
}

TEST(GroundedContext, TipIncluded) {
  auto g = testing::linear(1);
  g.nodes.push_back(testing::extra("x1", "Use a sharp knife."));
  g.edges.push_back({"x1", "s1", EdgeLabel::Enriches});
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  auto ctx = ex.grounded_context(t.state);
  ASSERT_EQ(ctx.extras.size(), 1u);
  EXPECT_EQ(ctx.extras[0].as<ExtraInfoPayload>().text, "Use a sharp knife.");
}

TEST(Snapshot, JsonRoundTrip) {
  auto g = testing::pasta_graph();
  Executor ex(g);
  ManualClock clock;
  auto t = ex.start(clock);
  t = ex.apply(t.state, make_timer("2 minutes"), clock);
  t = ex.apply(t.state, make_next(), clock);
  auto j = to_json(t.state, clock.now());
  EXPECT_EQ(j["timers"][0]["remaining"], 120);
  EXPECT_EQ(exec_state_from_json(j), t.state);
}

// Drives the engine with next()/condition() until completion.
struct DriveResult {
  oracle::BruteRun run;
  std::size_t applications = 0;
  bool completed = false;
  bool skip_violation = false;
};

DriveResult drive(const TaskGraph& g, const std::map<NodeId, bool>& answers) {
  Executor ex(g);
  ManualClock clock;
  DriveResult out;
  auto record = [&](const Transition& t, const ExecState& before) {
    for (const auto& e : t.events) {
      if (e.kind == EventKind::PresentStep) {
        out.run.presented.push_back(e.node);
        if (before.of(e.node).is(Status::Skipped)) out.skip_violation = true;
      }
      if (e.kind == EventKind::ActionFired) out.run.fired.push_back(e.node);
      if (e.kind == EventKind::AskCondition) out.run.asked.push_back(e.node);
      if (e.kind == EventKind::TaskComplete) out.completed = true;
    }
  };
  auto t = ex.start(clock);
  record(t, ExecState{});
  while (!out.completed && out.applications <= g.nodes.size() + 1) {
    auto before = t.state;
    if (t.state.pending_condition) t = ex.apply(t.state, make_condition(answers.at(*t.state.pending_condition)), clock);
    else t = ex.apply(t.state, make_next(), clock);
    ++out.applications;
    record(t, before);
  }
  // Skipped is permanent: nothing presented or fired may end up Skipped.
  for (const auto& id : out.run.presented)
    if (t.state.of(id).is(Status::Skipped)) out.skip_violation = true;
  for (const auto& id : out.run.fired)
    if (t.state.of(id).is(Status::Skipped)) out.skip_violation = true;
  return out;
}

TEST(Oracle, PastaBothAnswersAgree) {
  auto g = testing::pasta_graph();
  for (bool fresh : {true, false}) {
    std::map<NodeId, bool> answers{{"c1", fresh}};
    auto engine_run = drive(g, answers);
    auto brute = oracle::brute_force_execute(g, answers);
    EXPECT_EQ(engine_run.run.presented, brute.presented);
    EXPECT_EQ(engine_run.run.fired, brute.fired);
    EXPECT_TRUE(engine_run.completed);
  }
  // Frozen from the oracle.
  EXPECT_EQ(oracle::brute_force_execute(g, {{"c1", true}}).presented,
            (std::vector<NodeId>{"s1", "s2", "s3", "s5", "s6"}));
  EXPECT_EQ(oracle::brute_force_execute(g, {{"c1", false}}).presented,
            (std::vector<NodeId>{"s1", "s2", "s4", "s5", "s6"}));
}

TEST(Properties, DiamondFuzz) {
  std::mt19937 rng(1234);
  std::bernoulli_distribution coin;
  for (int trial = 0; trial < 600; ++trial) {
    auto g = oracle::random_diamond_graph(rng);
    ASSERT_TRUE(validate(g).ok()) << save(g);
    std::map<NodeId, bool> answers;
    for (const auto& n : g.nodes)
      if (n.kind() == NodeKind::Condition) answers[n.id] = coin(rng);
    auto r = drive(g, answers);
    auto brute = oracle::brute_force_execute(g, answers);
    ASSERT_TRUE(r.completed) << save(g);
    EXPECT_LE(r.applications, g.nodes.size());
    EXPECT_FALSE(r.skip_violation);
    EXPECT_EQ(r.run.presented, brute.presented) << save(g);
    EXPECT_EQ(r.run.fired, brute.fired);
  }
}

TEST(Properties, HistoryReplaysInReverse) {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 2 + trial % 8;
    auto g = testing::linear(n);
    Executor ex(g);
    ManualClock clock;
    auto t = ex.start(clock);
    std::vector<NodeId> shown{"s1"};
    std::uniform_int_distribution<int> jump(1, n);
    int k = 1 + trial % 5;
    for (int i = 0; i < k; ++i) {
      auto target = jump(rng);
      t = ex.apply(t.state, make_step_select(target), clock);
      if (*t.state.cursor != shown.back()) shown.push_back(*t.state.cursor);
    }
    for (std::size_t i = shown.size() - 1; i > 0; --i) {
      t = ex.apply(t.state, make_previous(), clock);
      EXPECT_EQ(only(t.events, EventKind::PresentStep).node, shown[i - 1]);
    }
    t = ex.apply(t.state, make_previous(), clock);
    EXPECT_EQ(t.events[0].text, "already at first step");
  }
}

TEST(Properties, Determinism) {
  auto g = testing::pasta_graph();
  auto run = [&] {
    Executor ex(g);
    ManualClock clock;
    std::vector<Event> all;
    auto t = ex.start(clock);
    all.insert(all.end(), t.events.begin(), t.events.end());
    for (const auto& call : {make_next(), make_timer("1 minute"), make_next(), make_condition(false),
                             make_step_select(1), make_previous(), make_next()}) {
      t = ex.apply(t.state, call, clock);
      clock.advance(std::chrono::seconds(30));
      all.insert(all.end(), t.events.begin(), t.events.end());
      auto p = poll_timers(t.state, clock);
      t.state = p.state;
      all.insert(all.end(), p.events.begin(), p.events.end());
    }
    return std::make_pair(all, t.state);
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace oat::engine
