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

// Offline compilation of semi-structured task documents into TaskGraphs,
// plus overlay files for manual edits.

#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "oat/error.hpp"
#include "oat/taskgraph.hpp"
#include "oat/text.hpp"

namespace oat::curation {

struct DocRequirement {
  std::string name;
  std::optional<std::string> quantity;
  RequirementCategory category = RequirementCategory::Ingredient;
};

struct DocStep {
  std::string text;
  std::optional<MediaRef> image;
};

struct Faq {
  std::string q;
  std::string a;
};

struct TaskDocument {
  std::optional<std::string> id;
  std::string title;
  std::optional<std::string> author;
  std::string description;
  std::vector<DocRequirement> requirements;
  std::vector<DocStep> steps;
  std::vector<MediaRef> videos;
  std::vector<Faq> faqs;
  std::map<std::string, std::string> infobox;
  std::optional<std::string> source_url;
  std::optional<double> rating;
  std::vector<std::string> tags;
};

/// Validation failure of a synthesized or overlaid graph.
class CurationError : public SchemaError {
 public:
  CurationError(const std::string& msg, ValidationReport report)
      : SchemaError(msg + ": " + summarize(report)), report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  static std::string summarize(const ValidationReport& r) {
    std::string s;
    for (const auto& v : r.violations) {
      if (!s.empty()) s += "; ";
      s += v.rule + " at " + v.node + ": " + v.message;
    }
    return s;
  }
  ValidationReport report_;
};

// ---------------------------------------------------------------------------
// Document loading

inline TaskDocument document_from_json(const Json& j) {
  detail::FieldReader r(j, "$");
  TaskDocument d;
  d.id = r.optional_string("id");
  if (d.id) d.id = text::trim(*d.id);
  d.title = text::trim(r.required_string("title"));
  if (d.title.empty()) throw SchemaError("$.title: must not be empty");
  d.author = r.optional_string("author");
  d.description = text::trim(r.optional_string("description").value_or(""));
  d.source_url = r.optional_string("source_url");
  if (const auto* rating = r.optional("rating")) {
    if (!rating->is_number()) throw SchemaError("$.rating: expected a number");
    d.rating = rating->get<double>();
  }
  if (const auto* tags = r.optional("tags")) {
    if (!tags->is_array()) throw SchemaError("$.tags: expected an array");
    for (const auto& t : *tags) {
      if (!t.is_string()) throw SchemaError("$.tags: expected strings");
      d.tags.push_back(text::trim(t.get<std::string>()));
    }
  }
  auto array = [&](const char* key) -> const Json* {
    const auto* a = r.optional(key);
    if (a && !a->is_array()) throw SchemaError(std::string("$.") + key + ": expected an array");
    return a;
  };
  if (const auto* reqs = array("requirements")) {
    for (std::size_t i = 0; i < reqs->size(); ++i) {
      detail::FieldReader rr((*reqs)[i], "$.requirements[" + std::to_string(i) + "]");
      DocRequirement q;
      q.name = text::to_lower(text::trim(rr.required_string("name")));
      if (q.name.empty()) throw SchemaError(rr.path() + ".name: must not be empty");
      q.quantity = rr.optional_string("quantity");
      if (q.quantity) q.quantity = text::trim(*q.quantity);
      auto cat = rr.optional_string("category").value_or("ingredient");
      auto c = category_from(cat);
      if (!c) throw SchemaError(rr.path() + ".category: unknown category '" + cat + "'");
      q.category = *c;
      rr.finish();
      d.requirements.push_back(std::move(q));
    }
  }
  const auto& steps = r.required("steps");
  if (!steps.is_array() || steps.empty()) throw SchemaError("$.steps: at least one step is required");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    std::string path = "$.steps[" + std::to_string(i) + "]";
    DocStep s;
    if (steps[i].is_string()) {
      s.text = text::trim(steps[i].get<std::string>());
    } else {
      detail::FieldReader sr(steps[i], path);
      s.text = text::trim(sr.required_string("text"));
      s.image = detail::media_from_json(sr.optional("image"), path + ".image");
      sr.finish();
    }
    if (s.text.empty()) throw SchemaError(path + ".text: must not be empty");
    d.steps.push_back(std::move(s));
  }
  if (const auto* videos = array("videos")) {
    for (std::size_t i = 0; i < videos->size(); ++i)
      d.videos.push_back(*detail::media_from_json(&(*videos)[i], "$.videos[" + std::to_string(i) + "]"));
  }
  if (const auto* faqs = array("faqs")) {
    for (std::size_t i = 0; i < faqs->size(); ++i) {
      detail::FieldReader fr((*faqs)[i], "$.faqs[" + std::to_string(i) + "]");
      Faq f{text::trim(fr.required_string("q")), text::trim(fr.required_string("a"))};
      fr.finish();
      if (f.q.empty() || f.a.empty()) throw SchemaError(fr.path() + ": question and answer must not be empty");
      d.faqs.push_back(std::move(f));
    }
  }
  if (const auto* info = r.optional("infobox")) {
    if (!info->is_object()) throw SchemaError("$.infobox: expected an object");
    for (auto it = info->begin(); it != info->end(); ++it) {
      if (!it->is_string()) throw SchemaError("$.infobox." + it.key() + ": expected a string");
      d.infobox[text::trim(it.key())] = text::trim(it->get<std::string>());
    }
  }
  r.finish();
  return d;
}

inline TaskDocument load_document(std::string_view bytes) {
  return document_from_json(parse_json_text(bytes, "task document"));
}

/// Lowercase alphanumeric words joined by '-'.
inline std::string slugify(std::string_view s) { return text::join(text::words(s), "-"); }

// ---------------------------------------------------------------------------
// Passes

struct SplitText {
  std::string summary;
  std::optional<std::string> details;
};

/// First sentence becomes the summary, the rest the details. A first
/// sentence longer than the summary limit is cut at the last word boundary
/// that fits.
inline SplitText split_summary(std::string_view raw) {
  const std::string t = text::trim(raw);
  std::size_t cut = t.size();
  for (std::size_t i = 0; i < t.size(); ++i) {
    char c = t[i];
    if ((c == '.' || c == '!' || c == '?') && (i + 1 == t.size() || text::is_space(t[i + 1]))) {
      cut = i + 1;
      break;
    }
  }
  if (cut > kMaxSummaryLength) {
    auto space = t.rfind(' ', kMaxSummaryLength);
    cut = (space == std::string::npos || space == 0) ? kMaxSummaryLength : space;
  }
  SplitText out{text::trim(t.substr(0, cut)), std::nullopt};
  auto rest = text::trim(t.substr(cut));
  if (!rest.empty()) out.details = rest;
  return out;
}

/// Words that never serve as a requirement's head noun.
inline const std::set<std::string>& modifier_stoplist() {
  static const std::set<std::string> kWords = {
      "a",        "an",      "the",     "of",      "and",     "or",      "for",      "to",       "with",
      "fresh",    "freshly", "large",   "small",   "medium",  "big",     "extra",    "virgin",   "chopped",
      "diced",    "sliced",  "minced",  "grated",  "ground",  "whole",   "dried",    "dry",      "finely",
      "roughly",  "thinly",  "cold",    "warm",    "hot",     "softened", "melted",  "optional", "packed",
      "g",        "kg",      "mg",      "ml",      "l",       "tbsp",    "tsp",      "tablespoon", "tablespoons",
      "teaspoon", "teaspoons", "cup",   "cups",    "oz",      "ounce",   "ounces",   "lb",       "lbs",
      "pound",    "pounds",  "pinch",   "dash",    "clove",   "cloves",  "can",      "cans",     "piece",
      "pieces",   "bunch",   "handful", "about",   "some",    "few",     "to taste", "taste",    "plus",
      "more",     "inch",    "inches",  "cm",      "mm",      "sheet",   "sheets"};
  return kWords;
}

/// Head noun of a requirement name: last word that is not a number or a
/// listed modifier, plural-folded. Empty when nothing is left.
inline std::string head_noun(std::string_view name) {
  std::string head;
  for (const auto& w : text::words(name)) {
    bool numeric = std::all_of(w.begin(), w.end(), [](char c) { return (c >= '0' && c <= '9'); });
    if (numeric || modifier_stoplist().count(w)) continue;
    head = w;
  }
  return head.empty() ? head : text::fold_plural(head);
}

/// Adds `requires` edges from each requirement to every step mentioning its
/// head noun or full name (plural-folded). Existing edges are kept and never
/// duplicated.
inline TaskGraph link_requirements(TaskGraph g) {
  auto fold_all = [](std::string_view s) {
    std::vector<std::string> out;
    for (const auto& w : text::words(s)) out.push_back(text::fold_plural(w));
    return out;
  };
  std::set<std::pair<NodeId, NodeId>> existing;
  for (const auto& e : g.edges) {
    if (e.label == EdgeLabel::Requires) existing.insert({e.from, e.to});
  }
  std::vector<Edge> added;
  for (const auto& rn : g.nodes) {
    const auto* r = rn.try_as<RequirementPayload>();
    if (!r) continue;
    const auto head = head_noun(r->name);
    const auto full = fold_all(r->name);
    for (const auto& sn : g.nodes) {
      const auto* s = sn.try_as<StepPayload>();
      if (!s) continue;
      auto toks = fold_all(s->summary + " " + s->details.value_or(""));
      bool hit = (!head.empty() && std::find(toks.begin(), toks.end(), head) != toks.end()) ||
                 text::contains_phrase(toks, full);
      if (hit && existing.insert({rn.id, sn.id}).second) added.push_back({rn.id, sn.id, EdgeLabel::Requires});
    }
  }
  g.edges.insert(g.edges.end(), added.begin(), added.end());
  return g;
}

struct Conditional {
  std::string before;  // text preceding the conditional sentence
  std::string clause;
  std::string consequent;
};

inline std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

/// Finds a sentence of the form "If <clause>, <consequent>" that starts the
/// text or follows a sentence terminator. Everything from the consequent to
/// the end of the text belongs to the consequent.
inline std::optional<Conditional> find_conditional(std::string_view raw) {
  const std::string t = text::trim(raw);
  for (std::size_t i = 0; i + 3 < t.size(); ++i) {
    bool sentence_start = i == 0 || (i >= 2 && text::is_space(t[i - 1]) &&
                                     (t[i - 2] == '.' || t[i - 2] == '!' || t[i - 2] == '?'));
    if (!sentence_start) continue;
    if (!((t[i] == 'I' || t[i] == 'i') && t[i + 1] == 'f' && text::is_space(t[i + 2]))) continue;
    auto comma = t.find(',', i + 3);
    if (comma == std::string::npos) continue;
    // The clause must stay within the sentence.
    auto clause = text::trim(t.substr(i + 3, comma - i - 3));
    if (clause.empty() || clause.find_first_of(".!?") != std::string::npos) continue;
    auto consequent = text::trim(t.substr(comma + 1));
    if (consequent.empty()) continue;
    return Conditional{text::trim(t.substr(0, i)), clause, consequent};
  }
  return std::nullopt;
}

struct SynthesisOptions {
  bool extract_conditions = true;
  bool link_requirements = true;
};

/// Runs the document -> graph passes and validates the result. Throws
/// CurationError with the report when the graph is invalid.
inline TaskGraph synthesize(const TaskDocument& doc, SynthesisOptions opts = {}) {
  TaskGraph g;
  g.id = doc.id && !doc.id->empty() ? *doc.id : slugify(doc.title);
  if (g.id.empty()) throw SchemaError("document title yields an empty task id");
  g.title = doc.title;
  g.description = doc.description;
  g.source_url = doc.source_url;
  g.tags = doc.tags;
  if (doc.rating) {
    std::string r = Json(*doc.rating).dump();
    g.tags.push_back("rating:" + r);
  }

  int step_no = 0;
  int cond_no = 0;
  auto new_step = [&](std::string_view body, std::optional<MediaRef> image) {
    auto split = split_summary(body);
    Node n{"s" + std::to_string(++step_no), StepPayload{split.summary, split.details, std::move(image), std::nullopt}};
    g.nodes.push_back(n);
    return n.id;
  };

  // Flow: each document step contributes an entry node and a set of exits
  // that all lead to the next entry.
  std::vector<NodeId> exits;
  auto connect = [&](const NodeId& entry) {
    for (const auto& x : exits) g.edges.push_back({x, entry, EdgeLabel::Seq});
    exits.clear();
  };
  for (const auto& ds : doc.steps) {
    std::optional<Conditional> cond;
    if (opts.extract_conditions) cond = find_conditional(ds.text);
    if (!cond) {
      auto id = new_step(ds.text, ds.image);
      connect(id);
      exits = {id};
      continue;
    }
    if (!cond->before.empty()) {
      auto id = new_step(cond->before, ds.image);
      connect(id);
      exits = {id};
    }
    NodeId cid = "c" + std::to_string(++cond_no);
    g.nodes.push_back(Node{cid, ConditionPayload{capitalize(cond->clause) + "?"}});
    connect(cid);
    auto branch = new_step(capitalize(cond->consequent), cond->before.empty() ? ds.image : std::nullopt);
    g.edges.push_back({cid, branch, EdgeLabel::Yes});
    exits = {cid, branch};
  }
  // A trailing condition has no following step; its seq exit is dropped.

  // The first document video goes to the first step.
  if (!doc.videos.empty()) {
    for (auto& n : g.nodes) {
      if (auto* s = std::get_if<StepPayload>(&n.payload)) {
        s->video = doc.videos.front();
        break;
      }
    }
  }

  int req_no = 0;
  for (const auto& r : doc.requirements)
    g.nodes.push_back(Node{"r" + std::to_string(++req_no), RequirementPayload{r.name, r.quantity, r.category}});
  if (opts.link_requirements) g = link_requirements(std::move(g));

  NodeId first_step;
  for (const auto& n : g.nodes) {
    if (n.kind() == NodeKind::Step) {
      first_step = n.id;
      break;
    }
  }
  int extra_no = 0;
  auto add_fact = [&](std::string body) {
    NodeId id = "x" + std::to_string(++extra_no);
    g.nodes.push_back(Node{id, ExtraInfoPayload{ExtraKind::Fact, std::move(body)}});
    if (!first_step.empty()) g.edges.push_back({id, first_step, EdgeLabel::Enriches});
  };
  for (const auto& f : doc.faqs) add_fact(f.q + " " + f.a);
  for (const auto& [k, v] : doc.infobox) add_fact(k + ": " + v);

  auto report = validate(g);
  if (!report.ok()) throw CurationError("synthesized graph for '" + g.id + "' is invalid", std::move(report));
  return g;
}

// ---------------------------------------------------------------------------
// Overlays

struct Overlay {
  std::vector<Node> add_nodes;
  std::vector<Edge> add_edges;
  std::vector<Edge> remove_edges;

  bool empty() const { return add_nodes.empty() && add_edges.empty() && remove_edges.empty(); }
};

inline Overlay overlay_from_json(const Json& j) {
  detail::FieldReader r(j, "$");
  Overlay o;
  auto list = [&](const char* key) -> const Json* {
    const auto* a = r.optional(key);
    if (a && !a->is_array()) throw SchemaError(std::string("$.") + key + ": expected an array");
    return a;
  };
  if (const auto* a = list("add_nodes")) {
    for (std::size_t i = 0; i < a->size(); ++i)
      o.add_nodes.push_back(node_from_json((*a)[i], "$.add_nodes[" + std::to_string(i) + "]"));
  }
  if (const auto* a = list("add_edges")) {
    for (std::size_t i = 0; i < a->size(); ++i)
      o.add_edges.push_back(edge_from_json((*a)[i], "$.add_edges[" + std::to_string(i) + "]"));
  }
  if (const auto* a = list("remove_edges")) {
    for (std::size_t i = 0; i < a->size(); ++i)
      o.remove_edges.push_back(edge_from_json((*a)[i], "$.remove_edges[" + std::to_string(i) + "]"));
  }
  r.finish();
  return o;
}

inline Overlay load_overlay(std::string_view bytes) { return overlay_from_json(parse_json_text(bytes, "overlay")); }

inline Json to_json(const Overlay& o) {
  Json j{{"add_nodes", Json::array()}, {"add_edges", Json::array()}, {"remove_edges", Json::array()}};
  for (const auto& n : o.add_nodes) j["add_nodes"].push_back(node_to_json(n));
  for (const auto& e : o.add_edges) j["add_edges"].push_back(edge_to_json(e));
  for (const auto& e : o.remove_edges) j["remove_edges"].push_back(edge_to_json(e));
  return j;
}

/// Removes listed edges, then adds nodes and edges, then validates. The
/// input graph is never modified.
inline TaskGraph apply_overlay(const TaskGraph& graph, const Overlay& overlay) {
  TaskGraph g = graph;
  for (const auto& e : overlay.remove_edges) {
    auto it = std::find(g.edges.begin(), g.edges.end(), e);
    if (it == g.edges.end())
      throw InputError("overlay removes a missing edge " + e.from + " -" + std::string(to_string(e.label)) + "-> " + e.to);
    g.edges.erase(it);
  }
  for (const auto& n : overlay.add_nodes) {
    if (g.index_of(n.id)) throw InputError("overlay node id '" + n.id + "' already exists");
    g.nodes.push_back(n);
  }
  g.edges.insert(g.edges.end(), overlay.add_edges.begin(), overlay.add_edges.end());
  auto report = validate(g);
  if (!report.ok()) throw CurationError("overlay produces an invalid graph", std::move(report));
  return g;
}

}  // namespace oat::curation
