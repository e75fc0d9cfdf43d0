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

#include "oat/curation.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "oat/engine.hpp"
#include "test_util.hpp"

namespace oat::curation {
namespace {

namespace fs = std::filesystem;

TaskDocument fixture_doc(const std::string& name) {
  return load_document(testing::read_file(testing::fixture("documents/" + name + ".task.json")));
}

std::set<std::pair<std::string, std::string>> requires_pairs(const TaskGraph& g) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& e : g.edges) {
    if (e.label == EdgeLabel::Requires) out.insert({g.find(e.from)->as<RequirementPayload>().name, e.to});
  }
  return out;
}

TEST(LoadDocument, MinimalAndErrors) {
  auto d = load_document(R"({"title":"  Boil  ","steps":["Boil water."]})");
  EXPECT_EQ(d.title, "Boil");
  ASSERT_EQ(d.steps.size(), 1u);
  EXPECT_THROW(load_document(R"({"title":"x","steps":[]})"), SchemaError);
  EXPECT_THROW(load_document(R"({"steps":["a"]})"), SchemaError);
  EXPECT_THROW(load_document(R"({"title":"","steps":["a"]})"), SchemaError);
  EXPECT_THROW(load_document(R"({"title":"x","steps":["a"],"colour":"red"})"), SchemaError);
  EXPECT_THROW(load_document(R"({"title":"x","steps":["  "]})"), SchemaError);
  EXPECT_THROW(load_document(R"({"title":"x","steps":["a"],"requirements":[{"name":"n","category":"spice"}]})"),
               SchemaError);
  EXPECT_THROW(load_document("{"), ParseError);
}

TEST(LoadDocument, FixtureCountsAndNormalization) {
  auto d = fixture_doc("zucchini_saute");
  EXPECT_EQ(d.steps.size(), 6u);
  EXPECT_EQ(d.requirements.size(), 5u);
  auto v = fixture_doc("quantities_in_names");
  EXPECT_EQ(v.requirements[0].name, "3 tbsp extra virgin olive oil");
  auto f = fixture_doc("faq_infobox");
  EXPECT_EQ(f.faqs.size(), 1u);
  EXPECT_EQ(f.infobox.size(), 2u);
  EXPECT_EQ(*f.author, "Test Kitchen");
}

TEST(SplitSummary, FirstSentenceAndTextPreservation) {
  auto s = split_summary("Knead the dough. Let it rest for 10 minutes.");
  EXPECT_EQ(s.summary, "Knead the dough.");
  EXPECT_EQ(*s.details, "Let it rest for 10 minutes.");
  auto one = split_summary("Add 2.5 cups of flour");
  EXPECT_EQ(one.summary, "Add 2.5 cups of flour");
  EXPECT_FALSE(one.details);
  auto q = split_summary("Is it fresh? Check the date!");
  EXPECT_EQ(q.summary, "Is it fresh?");
  std::mt19937 rng(9);
  const std::vector<std::string> parts = {"Stir", "the", "sauce.", "Wait!", "Is", "it", "thick?", "2.5", "cups,",
                                          "then", "serve"};
  for (int i = 0; i < 500; ++i) {
    std::string t;
    for (int k = 0, n = 1 + static_cast<int>(rng() % 80); k < n; ++k) t += (k ? " " : "") + parts[rng() % parts.size()];
    auto sp = split_summary(t);
    EXPECT_LE(sp.summary.size(), kMaxSummaryLength);
    EXPECT_FALSE(sp.summary.empty());
    std::string joined = sp.summary + (sp.details ? " " + *sp.details : "");
    EXPECT_EQ(joined, t);
  }
}

TEST(HeadNoun, ModifiersAndPlurals) {
  EXPECT_EQ(head_noun("2 zucchini"), "zucchini");
  EXPECT_EQ(head_noun("olive oil"), "oil");
  EXPECT_EQ(head_noun("3 tbsp extra virgin olive oil"), "oil");
  EXPECT_EQ(head_noun("tomatoes"), "tomato");
  EXPECT_EQ(head_noun("fresh basil leaves"), "leave");
  EXPECT_EQ(head_noun("300 g"), "");
}

TEST(LinkRequirements, ExamplesAndIdempotence) {
  auto g = synthesize(fixture_doc("zucchini_saute"));
  auto pairs = requires_pairs(g);
  EXPECT_TRUE(pairs.count({"zucchini", "s1"}));
  EXPECT_TRUE(pairs.count({"olive oil", "s2"}));  // "add oil to the pan"
  auto twice = link_requirements(g);
  EXPECT_EQ(twice.edges.size(), g.edges.size());
  auto rice = synthesize(fixture_doc("unmentioned_req"));
  for (const auto& [name, step] : requires_pairs(rice)) EXPECT_NE(name, "saffron");
  EXPECT_TRUE(validate(rice).ok());
}

TEST(LinkRequirements, LabelledRecall) {
  std::size_t expected = 0;
  std::size_t found = 0;
  for (const auto* name : {"zucchini_saute", "plural_links", "tools_only", "ingredient_heavy", "diy_fence"}) {
    auto labels = parse_json_text(testing::read_file(testing::fixture(std::string("documents/") + name + ".links.json")));
    auto pairs = requires_pairs(synthesize(fixture_doc(name)));
    for (const auto& [req, steps] : labels["links"].items()) {
      for (const auto& s : steps) {
        ++expected;
        if (pairs.count({req, s.get<std::string>()})) ++found;
      }
    }
  }
  ASSERT_GT(expected, 0u);
  EXPECT_GE(static_cast<double>(found) / static_cast<double>(expected), 0.9);
}

TEST(Synthesize, LinearSteps) {
  auto g = synthesize(fixture_doc("three_linear"));
  EXPECT_EQ(g.nodes.size(), 3u);
  EXPECT_EQ(g.edges.size(), 2u);
  EXPECT_EQ(g.id, "three-steps");
  for (const auto& e : g.edges) EXPECT_EQ(e.label, EdgeLabel::Seq);
}

TEST(Synthesize, ConditionExtraction) {
  auto g = synthesize(fixture_doc("pasta_if"));
  // s1 -> c1; c1 -yes-> s2 (consequent); c1 -> s3; s2 -> s3
  ASSERT_TRUE(g.find("c1"));
  EXPECT_EQ(g.find("c1")->as<ConditionPayload>().question, "Your pasta is fresh?");
  EXPECT_EQ(g.find("s2")->as<StepPayload>().summary, "Boil for 3 minutes.");
  EXPECT_EQ(g.find("s3")->as<StepPayload>().summary, "Drain and serve.");
  std::vector<Edge> flow;
  for (const auto& e : g.edges)
    if (is_flow(e.label)) flow.push_back(e);
  EXPECT_EQ(flow, (std::vector<Edge>{{"s1", "c1", EdgeLabel::Seq},
                                     {"c1", "s2", EdgeLabel::Yes},
                                     {"c1", "s3", EdgeLabel::Seq},
                                     {"s2", "s3", EdgeLabel::Seq}}));
  EXPECT_TRUE(requires_pairs(g).count({"pasta", "s1"}) == 0);

  auto off = synthesize(fixture_doc("pasta_if"), {.extract_conditions = false});
  EXPECT_FALSE(off.find("c1"));
  EXPECT_EQ(off.find("s2")->as<StepPayload>().summary, "If your pasta is fresh, boil for 3 minutes.");
}

TEST(Synthesize, ConditionBranchesExecute) {
  auto g = synthesize(fixture_doc("pasta_if"));
  engine::Executor ex(g);
  engine::ManualClock clock;
  for (bool fresh : {true, false}) {
    auto t = ex.start(clock);
    std::vector<std::string> shown;
    for (int guard = 0; guard < 20 && !t.state.complete; ++guard) {
      for (const auto& e : t.events)
        if (e.kind == engine::EventKind::PresentStep) shown.push_back(e.node);
      t = ex.apply(t.state, t.state.pending_condition ? dsl::make_condition(fresh) : dsl::make_next(), clock);
    }
    EXPECT_EQ(shown, fresh ? (std::vector<std::string>{"s1", "s2", "s3"}) : (std::vector<std::string>{"s1", "s3"}));
  }
}

TEST(Synthesize, ConditionWithPrefixAndTrailing) {
  auto g = synthesize(fixture_doc("if_with_prefix"));
  EXPECT_EQ(g.find("s1")->as<StepPayload>().summary, "Stir the paint.");
  EXPECT_EQ(g.find("c1")->as<ConditionPayload>().question, "It has skinned over?");
  EXPECT_EQ(g.find("s2")->as<StepPayload>().summary, "Strain it through a cloth.");
  auto last = synthesize(fixture_doc("if_last"));
  EXPECT_TRUE(validate(last).ok());
  EXPECT_EQ(last.find("c1")->as<ConditionPayload>().question, "It wobbles?");
  auto two = synthesize(fixture_doc("two_conditions"));
  EXPECT_TRUE(two.find("c2"));
  EXPECT_TRUE(validate(two).ok());
}

TEST(Synthesize, FactsTagsAndMedia) {
  auto g = synthesize(fixture_doc("faq_infobox"));
  int facts = 0;
  for (const auto& n : g.nodes) {
    if (const auto* x = n.try_as<ExtraInfoPayload>()) {
      ++facts;
      EXPECT_EQ(x->kind, ExtraKind::Fact);
    }
  }
  EXPECT_EQ(facts, 3);
  EXPECT_EQ(g.find("x1")->as<ExtraInfoPayload>().text, "Can I use bottled lemon juice? Yes, about 2 tablespoons.");
  EXPECT_EQ(g.find("x2")->as<ExtraInfoPayload>().text, "Prep time: 5 minutes");
  for (const auto& e : g.edges) {
    if (e.label == EdgeLabel::Enriches) EXPECT_EQ(e.to, "s1");
  }
  EXPECT_TRUE(g.has_tag("rating:4.5"));
  auto crane = synthesize(fixture_doc("step_images"));
  EXPECT_EQ(crane.find("s1")->as<StepPayload>().image->url, "https://media.example.org/img/crane-1.jpg");
  EXPECT_EQ(crane.find("s1")->as<StepPayload>().video->url, "https://media.example.org/video/crane");
  EXPECT_EQ(synthesize(fixture_doc("string_steps")).id, "quick-toast");
}

TEST(Synthesize, AllFixturesValidAndTextPreserved) {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(testing::fixture("documents"))) {
    auto name = entry.path().filename().string();
    if (!name.ends_with(".task.json")) continue;
    ++count;
    auto doc = load_document(testing::read_file(entry.path().string()));
    auto g = synthesize(doc);
    EXPECT_TRUE(validate(g).ok()) << name;
    EXPECT_EQ(load(save(g)), g) << name;
    for (const auto& r : doc.requirements) {
      bool present = std::any_of(g.nodes.begin(), g.nodes.end(), [&](const Node& n) {
        const auto* p = n.try_as<RequirementPayload>();
        return p && p->name == r.name && p->quantity == r.quantity;
      });
      EXPECT_TRUE(present) << name << " " << r.name;
    }
    auto plain = synthesize(doc, {.extract_conditions = false});
    std::size_t i = 0;
    for (const auto& n : plain.nodes) {
      if (const auto* s = n.try_as<StepPayload>()) {
        EXPECT_EQ(s->summary + (s->details ? " " + *s->details : ""), doc.steps[i].text) << name;
        ++i;
      }
    }
    EXPECT_EQ(i, doc.steps.size());
  }
  EXPECT_EQ(count, 20);
}

TEST(Synthesize, RandomDocumentsAlwaysValid) {
  std::mt19937 rng(21);
  const std::vector<std::string> words = {"stir", "the", "pot", "if", "If", "it", "is", "hot,", "wait.", "oil",
                                          "onion", "add", "salt", "then", "serve!", "tomatoes", "cut", "board"};
  const std::vector<std::string> reqs = {"olive oil", "2 onions", "salt", "cutting board", "tomatoes", "300 g pasta"};
  for (int round = 0; round < 300; ++round) {
    TaskDocument d;
    d.title = "Random " + std::to_string(round);
    for (int s = 0, n = 1 + static_cast<int>(rng() % 20); s < n; ++s) {
      std::string t;
      for (int k = 0, m = 1 + static_cast<int>(rng() % 12); k < m; ++k) t += (k ? " " : "") + words[rng() % words.size()];
      d.steps.push_back({t, std::nullopt});
    }
    for (int r = 0, n = static_cast<int>(rng() % 5); r < n; ++r) d.requirements.push_back({reqs[rng() % reqs.size()], "1", {}});
    auto g = synthesize(d);
    EXPECT_TRUE(validate(g).ok());
    EXPECT_EQ(link_requirements(g).edges.size(), g.edges.size());
  }
}

TEST(Overlay, AddConditionBranches) {
  auto g = testing::linear(3);
  auto o = load_overlay(testing::read_file(testing::fixture("overlays/add_condition.overlay.json")));
  auto out = apply_overlay(g, o);
  EXPECT_TRUE(validate(out).ok());
  EXPECT_TRUE(out.find("c1"));
  EXPECT_EQ(out.edges.size(), 4u);
  EXPECT_EQ(save(g), save(testing::linear(3)));
  EXPECT_EQ(save(apply_overlay(g, Overlay{})), save(g));
  EXPECT_EQ(load_overlay(to_json(o).dump()).add_nodes.size(), o.add_nodes.size());
}

TEST(Overlay, RejectsCyclesCollisionsAndMissingEdges) {
  auto g = testing::linear(3);
  Overlay cycle;
  cycle.add_edges.push_back({"s3", "s1", EdgeLabel::Seq});
  try {
    apply_overlay(g, cycle);
    FAIL();
  } catch (const CurationError& e) {
    EXPECT_TRUE(e.report().has("cycle"));
  }
  Overlay collide;
  collide.add_nodes.push_back(testing::step("s2"));
  EXPECT_THROW(apply_overlay(g, collide), InputError);
  Overlay missing;
  missing.remove_edges.push_back({"s1", "s3", EdgeLabel::Seq});
  EXPECT_THROW(apply_overlay(g, missing), InputError);
  EXPECT_THROW(load_overlay(R"({"add_nodes":[{"id":"q","kind":"step"}]})"), SchemaError);
  EXPECT_THROW(load_overlay(R"({"extra":[]})"), SchemaError);
}

}  // namespace
}  // namespace oat::curation
