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

// Contextual semantic parsing: (utterance, conversation context) -> DSL call.
//
// RuleBackend applies a fixed priority list of lexicon rules; the first
// rule that matches decides the call. RemoteBackend forwards the turn to an
// HTTP model server and falls back to the rules whenever the reply is not a
// registry-valid call.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "oat/dsl.hpp"
#include "oat/error.hpp"
#include "oat/taskgraph.hpp"
#include "oat/text.hpp"

namespace oat::parser {

enum class Phase { Planning, Execution };

inline std::string_view to_string(Phase p) { return p == Phase::Planning ? "planning" : "execution"; }

inline Phase phase_from(std::string_view s) {
  if (s == "planning") return Phase::Planning;
  if (s == "execution") return Phase::Execution;
  throw SchemaError("unknown phase '" + std::string(s) + "'");
}

struct ParseContext {
  Phase phase = Phase::Planning;
  bool pending_condition = false;
  std::optional<int> current_step;
  std::optional<int> total_steps;
  int candidate_count = 0;
  std::optional<std::string> last_system_prompt;

  bool operator==(const ParseContext&) const = default;
};

inline Json to_json(const ParseContext& c) {
  Json j;
  j["phase"] = std::string(to_string(c.phase));
  j["pending_condition"] = c.pending_condition;
  j["current_step"] = c.current_step ? Json(*c.current_step) : Json(nullptr);
  j["total_steps"] = c.total_steps ? Json(*c.total_steps) : Json(nullptr);
  j["candidate_count"] = c.candidate_count;
  if (c.last_system_prompt) j["last_system_prompt"] = *c.last_system_prompt;
  return j;
}

inline ParseContext context_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("context: expected an object");
  ParseContext c;
  try {
    c.phase = phase_from(j.at("phase").get<std::string>());
    c.pending_condition = j.value("pending_condition", false);
    if (j.contains("current_step") && !j["current_step"].is_null()) c.current_step = j["current_step"].get<int>();
    if (j.contains("total_steps") && !j["total_steps"].is_null()) c.total_steps = j["total_steps"].get<int>();
    c.candidate_count = j.value("candidate_count", 0);
    if (j.contains("last_system_prompt") && !j["last_system_prompt"].is_null())
      c.last_system_prompt = j["last_system_prompt"].get<std::string>();
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("context: ") + e.what());
  }
  if (c.current_step && c.total_steps && *c.current_step > *c.total_steps)
    throw SchemaError("context: current_step exceeds total_steps");
  return c;
}

/// Word lists that drive the rule backend. Phrases are stored normalized
/// (see text::normalize). A vague pattern may end in "*", matching one or
/// more further words.
struct Lexicons {
  std::map<std::string, int> ordinals;
  std::map<std::string, int> cardinals;
  std::vector<std::string> yes;
  std::vector<std::string> no;
  std::vector<std::string> themes;
  std::vector<std::string> vague;
  std::vector<std::string> interrogatives;
  std::vector<std::string> courtesy;
  std::vector<std::string> forward;
  std::vector<std::string> backward;
  std::vector<std::string> stop;
  std::vector<std::string> detail;
  std::vector<std::string> step_verbs;
  std::vector<std::string> planning_requests;

  static Lexicons defaults() {
    Lexicons l;
    const char* ord[] = {"first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth"};
    const char* ord_short[] = {"1st", "2nd", "3rd", "4th", "5th", "6th", "7th", "8th", "9th", "10th"};
    const char* card[] = {"one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"};
    for (int i = 0; i < 10; ++i) {
      l.ordinals[ord[i]] = i + 1;
      l.ordinals[ord_short[i]] = i + 1;
      l.cardinals[card[i]] = i + 1;
    }
    l.yes = {"yes", "yeah", "yep", "yup", "sure", "correct", "right", "affirmative", "of course", "i do",
             "it is", "i have", "definitely", "absolutely", "ok yes", "certainly", "indeed"};
    l.no = {"no", "nope", "nah", "negative", "not really", "i dont", "i do not", "it isnt", "it is not",
            "i havent", "i have not", "not at all", "no way"};
    l.themes = {"thanksgiving", "christmas", "halloween", "easter", "valentines", "valentines day", "summer",
                "winter", "game day", "new year", "bbq", "holiday", "weeknight", "brunch"};
    l.vague = {"im hungry", "i am hungry", "something *", "surprise me", "anything", "im bored", "i am bored",
               "what should i do", "what should i make", "what should i cook", "give me ideas", "any ideas",
               "what can i make", "what can i cook", "what do you recommend", "what do you suggest",
               "recommend *", "suggest *"};
    l.interrogatives = {"what", "how", "why", "which", "when", "can", "could", "do", "does", "is", "are",
                        "where", "who", "should", "whats", "hows", "wheres", "whos"};
    l.courtesy = {"alexa", "ok", "okay", "so", "um", "uh", "please", "hey", "now", "and", "then", "alright",
                  "great", "cool", "thanks", "thank you", "can you", "could you", "would you", "will you",
                  "can we", "could we", "lets", "i want to", "i would like to", "id like to"};
    l.forward = {"next",       "continue",      "done",     "whats next", "im finished", "finished",
                 "im done",    "go on",         "move on",  "keep going", "go ahead",    "ready",
                 "carry on",   "proceed",       "skip",     "what now",   "whats after that",
                 "i did it",   "got it",        "onwards",  "forward"};
    l.backward = {"previous", "go back", "back", "last step", "step back", "before that", "undo", "backwards",
                  "the one before"};
    l.stop = {"stop", "cancel", "quit", "exit", "stop the task", "never mind", "nevermind", "start over",
              "abort", "end task", "something else", "a different task", "another task", "another recipe"};
    l.detail = {"tell me more", "more details", "more detail", "explain that", "explain", "more info",
                "more information", "elaborate", "fun fact", "any tips", "a tip", "tips", "tell me something",
                "say more", "go into detail", "in more detail", "details"};
    l.step_verbs = {"go", "jump", "back", "skip", "return", "move", "take", "show", "read", "repeat", "restart"};
    l.planning_requests = {"how do i",        "how to",          "how can i",           "how would i",
                           "how should i",    "can you help",    "can you show",        "can you find",
                           "could you help",  "could you find",  "could you show",      "can i make",
                           "can i cook",      "do you have",     "is there",            "are there",
                           "can you recommend", "could you recommend", "can you suggest", "can you give",
                           "can you teach",   "could you teach", "can i learn",         "how about", "what should i", "what can i",
                           "what about",      "do you know how"};
    return l;
  }

  static Lexicons from_json(const Json& j) {
    Lexicons l = defaults();
    auto list = [&](const char* key, std::vector<std::string>& out) {
      if (!j.contains(key)) return;
      out.clear();
      for (const auto& v : j.at(key)) out.push_back(text::normalize(v.get<std::string>()));
      // Keep explicit wildcards, which normalize() would strip.
      std::size_t k = 0;
      for (const auto& v : j.at(key)) {
        auto raw = v.get<std::string>();
        if (!raw.empty() && raw.back() == '*') out[k] += " *";
        ++k;
      }
    };
    auto map = [&](const char* key, std::map<std::string, int>& out) {
      if (!j.contains(key)) return;
      out.clear();
      for (auto it = j.at(key).begin(); it != j.at(key).end(); ++it) out[text::normalize(it.key())] = it->get<int>();
    };
    try {
      map("ordinals", l.ordinals);
      map("cardinals", l.cardinals);
      list("yes", l.yes);
      list("no", l.no);
      list("themes", l.themes);
      list("vague", l.vague);
      list("interrogatives", l.interrogatives);
      list("courtesy", l.courtesy);
      list("forward", l.forward);
      list("backward", l.backward);
      list("stop", l.stop);
      list("detail", l.detail);
      list("step_verbs", l.step_verbs);
      list("planning_requests", l.planning_requests);
    } catch (const Json::exception& e) {
      throw SchemaError(std::string("lexicon config: ") + e.what());
    }
    return l;
  }

  static Lexicons load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open lexicon file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(parse_json_text(ss.str(), "lexicon config"));
  }

  Json to_json() const {
    Json j;
    j["ordinals"] = ordinals;
    j["cardinals"] = cardinals;
    j["yes"] = yes;
    j["no"] = no;
    j["themes"] = themes;
    j["vague"] = vague;
    j["interrogatives"] = interrogatives;
    j["courtesy"] = courtesy;
    j["forward"] = forward;
    j["backward"] = backward;
    j["stop"] = stop;
    j["detail"] = detail;
    j["step_verbs"] = step_verbs;
    j["planning_requests"] = planning_requests;
    return j;
  }

  bool operator==(const Lexicons&) const = default;
};

class ParserBackend {
 public:
  virtual ~ParserBackend() = default;
  virtual dsl::Call parse(std::string_view utterance, const ParseContext& ctx) const = 0;
  virtual std::string name() const = 0;
};

class RuleBackend final : public ParserBackend {
 public:
  explicit RuleBackend(Lexicons lex = Lexicons::defaults()) : lex_(std::move(lex)) {
    for (const auto& p : lex_.interrogatives) interrogatives_.insert(p);
    for (const auto& p : lex_.step_verbs) step_verbs_.insert(p);
  }

  std::string name() const override { return "rules"; }

  const Lexicons& lexicons() const { return lex_; }

  /// Throws InputError for an empty utterance. Output is always
  /// registry-valid.
  dsl::Call parse(std::string_view utterance, const ParseContext& ctx) const override {
    const auto all = text::words(utterance);
    if (all.empty()) throw InputError("utterance is empty");
    const auto core = strip_courtesy(all);
    const bool question = !core.empty() && interrogatives_.count(core.front());

    // 1. condition answer
    if (ctx.pending_condition) {
      if (auto b = yes_no(core.empty() ? all : core)) return dsl::make_condition(*b);
    }
    // 2. step jump
    if (auto n = step_number(all)) return dsl::make_step_select(*n);
    // 3. forward navigation
    if (nav_match(lex_.forward, all, core, question)) return dsl::make_next();
    // 4. backward navigation
    if (nav_match(lex_.backward, all, core, question)) return dsl::make_previous();
    // 5. timer
    if (auto span = timer_span(all)) return dsl::make_timer(*span);
    // 6. stop
    if (nav_match(lex_.stop, all, core, question)) return dsl::make_stop();
    // 7. candidate selection
    if (ctx.phase == Phase::Planning && ctx.candidate_count > 0) {
      if (auto n = option_number(all, ctx.candidate_count)) return dsl::make_select(*n);
    }
    // 8. more detail
    if (any_phrase(lex_.detail, all)) return dsl::make_chit_chat();
    // 9. question
    if (question && !(ctx.phase == Phase::Planning && any_prefix(lex_.planning_requests, all)))
      return dsl::make_answer_question();
    // 10/11. phase defaults
    if (ctx.phase == Phase::Planning) return search_call(all);
    return dsl::make_answer_question();
  }

  /// Rule 10 in isolation: search(vague, theme) for an utterance.
  dsl::Call search_call(const std::vector<std::string>& words) const {
    std::string theme;
    std::size_t best = words.size();
    for (const auto& t : lex_.themes) {
      auto needle = text::split_words(t);
      if (needle.empty()) continue;
      auto it = std::search(words.begin(), words.end(), needle.begin(), needle.end());
      auto pos = static_cast<std::size_t>(it - words.begin());
      if (it != words.end() && (pos < best || (pos == best && t.size() > theme.size()))) {
        best = pos;
        theme = t;
      }
    }
    bool vague = std::any_of(lex_.vague.begin(), lex_.vague.end(),
                             [&](const std::string& p) { return pattern_match(p, words); });
    if (!vague) {
      vague = std::none_of(words.begin(), words.end(), [](const std::string& w) { return !text::is_stopword(w); });
    }
    return dsl::make_search(vague, theme);
  }

 private:
  std::vector<std::string> strip_courtesy(const std::vector<std::string>& words) const {
    std::size_t i = 0;
    bool progressed = true;
    while (progressed && i < words.size()) {
      progressed = false;
      for (const auto& p : lex_.courtesy) {
        auto needle = text::split_words(p);
        if (needle.empty() || i + needle.size() > words.size()) continue;
        if (std::equal(needle.begin(), needle.end(), words.begin() + static_cast<std::ptrdiff_t>(i))) {
          i += needle.size();
          progressed = true;
          break;
        }
      }
    }
    return {words.begin() + static_cast<std::ptrdiff_t>(i), words.end()};
  }

  std::optional<bool> yes_no(const std::vector<std::string>& words) const {
    std::size_t best_len = 0;
    std::optional<bool> answer;
    auto scan = [&](const std::vector<std::string>& phrases, bool value) {
      for (const auto& p : phrases) {
        auto needle = text::split_words(p);
        if (text::starts_with_phrase(words, needle) && needle.size() > best_len) {
          best_len = needle.size();
          answer = value;
        }
      }
    };
    scan(lex_.yes, true);
    scan(lex_.no, false);
    return answer;
  }

  std::optional<std::int64_t> number_token(const std::string& w, bool allow_cardinal_words) const {
    if (!w.empty() && w.size() <= 9 && std::all_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; }))
      return std::stoll(w);
    if (auto it = lex_.ordinals.find(w); it != lex_.ordinals.end()) return it->second;
    if (allow_cardinal_words) {
      if (auto it = lex_.cardinals.find(w); it != lex_.cardinals.end()) return it->second;
    }
    return std::nullopt;
  }

  // "step 3", "step number two", "go back to the first step".
  std::optional<std::int64_t> step_number(const std::vector<std::string>& words) const {
    const bool verb = std::any_of(words.begin(), words.end(), [&](const auto& w) { return step_verbs_.count(w) > 0; });
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (words[i] != "step") continue;
      std::size_t j = i + 1;
      if (j < words.size() && words[j] == "number") ++j;
      if (j < words.size()) {
        if (auto n = number_token(words[j], true)) return n;
      }
      if (verb && i > 0) {
        if (auto it = lex_.ordinals.find(words[i - 1]); it != lex_.ordinals.end()) return it->second;
      }
    }
    return std::nullopt;
  }

  // Navigation-like lexicons match anywhere, except inside a question that
  // does not itself start with the phrase ("how do I know when it is done").
  bool nav_match(const std::vector<std::string>& phrases, const std::vector<std::string>& all,
                 const std::vector<std::string>& core, bool question) const {
    for (const auto& p : phrases) {
      auto needle = text::split_words(p);
      if (!text::contains_phrase(all, needle)) continue;
      if (!question || text::starts_with_phrase(core, needle)) return true;
    }
    return false;
  }

  std::optional<std::string> timer_span(const std::vector<std::string>& w) const {
    auto find = [&](const std::string& word, std::size_t from = 0) -> std::size_t {
      for (std::size_t i = from; i < w.size(); ++i)
        if (w[i] == word) return i;
      return w.size();
    };
    auto rest = [&](std::size_t from) {
      std::vector<std::string> out(w.begin() + static_cast<std::ptrdiff_t>(from), w.end());
      return text::join(out, " ");
    };
    // remind me in X
    for (std::size_t i = 0; i + 3 < w.size(); ++i) {
      if (w[i] == "remind" && w[i + 1] == "me" && w[i + 2] == "in") return rest(i + 3);
    }
    auto t = find("timer");
    if (t == w.size()) return std::nullopt;
    // timer for X
    auto f = find("for", t + 1);
    if (f + 1 < w.size() && f == t + 1) return rest(f + 1);
    // (set|start) (a|an)? X timer
    for (std::size_t i = 0; i < t; ++i) {
      if (w[i] == "set" || w[i] == "start") {
        std::size_t b = i + 1;
        if (b < t && (w[b] == "a" || w[b] == "an")) ++b;
        if (b < t) {
          std::vector<std::string> span(w.begin() + static_cast<std::ptrdiff_t>(b),
                                        w.begin() + static_cast<std::ptrdiff_t>(t));
          return text::join(span, " ");
        }
      }
    }
    return std::nullopt;
  }

  std::optional<std::int64_t> option_number(const std::vector<std::string>& words, int count) const {
    auto accept = [&](std::int64_t n) -> std::optional<std::int64_t> {
      if (n >= 1 && n <= count) return n;
      return std::nullopt;
    };
    for (const auto& w : words) {
      if (auto it = lex_.ordinals.find(w); it != lex_.ordinals.end()) return accept(it->second);
    }
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (words[i] == "last" && (i + 1 == words.size() || words[i + 1] == "one" || words[i + 1] == "option"))
        return count;
    }
    for (std::size_t i = 0; i < words.size(); ++i) {
      const auto& w = words[i];
      bool after_marker = i > 0 && (words[i - 1] == "option" || words[i - 1] == "number" ||
                                    words[i - 1] == "choice" || words[i - 1] == "recipe");
      if (auto n = number_token(w, after_marker || words.size() == 1)) return accept(*n);
    }
    return std::nullopt;
  }

  bool any_phrase(const std::vector<std::string>& phrases, const std::vector<std::string>& words) const {
    return std::any_of(phrases.begin(), phrases.end(),
                       [&](const std::string& p) { return text::contains_phrase(words, text::split_words(p)); });
  }

  bool any_prefix(const std::vector<std::string>& phrases, const std::vector<std::string>& words) const {
    auto core = strip_courtesy(words);
    return std::any_of(phrases.begin(), phrases.end(), [&](const std::string& p) {
      auto needle = text::split_words(p);
      return text::starts_with_phrase(words, needle) || text::starts_with_phrase(core, needle);
    });
  }

  static bool pattern_match(const std::string& pattern, const std::vector<std::string>& words) {
    auto toks = text::split_words(pattern);
    if (toks.empty()) return false;
    bool wildcard = toks.back() == "*";
    if (wildcard) toks.pop_back();
    if (toks.empty()) return false;
    auto it = std::search(words.begin(), words.end(), toks.begin(), toks.end());
    if (it == words.end()) return false;
    if (!wildcard) return true;
    return static_cast<std::size_t>(words.end() - it) > toks.size();
  }

  Lexicons lex_;
  std::set<std::string> interrogatives_;
  std::set<std::string> step_verbs_;
};

/// Forwards turns to a model server: POST {utterance, context} ->
/// {"dsl": "..."}. Any transport failure, timeout or invalid DSL falls back
/// to the rule backend.
class RemoteBackend final : public ParserBackend {
 public:
  RemoteBackend(std::string url, std::shared_ptr<const ParserBackend> fallback,
                std::chrono::milliseconds timeout = std::chrono::milliseconds(2000))
      : url_(std::move(url)), fallback_(std::move(fallback)), timeout_(timeout) {
    auto scheme_end = url_.find("://");
    if (scheme_end == std::string::npos) throw InputError("remote backend url needs a scheme: " + url_);
    auto path_start = url_.find('/', scheme_end + 3);
    base_ = path_start == std::string::npos ? url_ : url_.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url_.substr(path_start);
  }

  std::string name() const override { return "remote:" + url_; }

  dsl::Call parse(std::string_view utterance, const ParseContext& ctx) const override {
    if (text::normalize(utterance).empty()) throw InputError("utterance is empty");
    if (auto call = try_remote(utterance, ctx)) return *call;
    ++fallbacks_;
    return fallback_->parse(utterance, ctx);
  }

  /// Number of turns answered by the fallback backend so far.
  std::size_t fallbacks() const { return fallbacks_; }

 private:
  std::optional<dsl::Call> try_remote(std::string_view utterance, const ParseContext& ctx) const {
    try {
      httplib::Client client(base_);
      auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
      auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
      client.set_connection_timeout(secs.count(), usecs.count());
      client.set_read_timeout(secs.count(), usecs.count());
      client.set_write_timeout(secs.count(), usecs.count());
      Json body{{"utterance", std::string(utterance)}, {"context", to_json(ctx)}};
      auto res = client.Post(path_, body.dump(), "application/json");
      if (!res || res->status != 200) return std::nullopt;
      auto reply = Json::parse(res->body, nullptr, false);
      if (reply.is_discarded() || !reply.is_object() || !reply.contains("dsl") || !reply["dsl"].is_string())
        return std::nullopt;
      return dsl::parse(reply["dsl"].get<std::string>());
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  std::string url_;
  std::string base_;
  std::string path_;
  std::shared_ptr<const ParserBackend> fallback_;
  std::chrono::milliseconds timeout_;
  mutable std::atomic<std::size_t> fallbacks_{0};
};

/// Builds a backend from a `rules` / `remote:<url>` spec string.
inline std::shared_ptr<const ParserBackend> make_backend(std::string_view spec, Lexicons lex = Lexicons::defaults()) {
  auto rules = std::make_shared<const RuleBackend>(std::move(lex));
  if (spec.empty() || spec == "rules") return rules;
  if (spec.substr(0, 7) == "remote:") return std::make_shared<const RemoteBackend>(std::string(spec.substr(7)), rules);
  throw InputError("unknown parser backend '" + std::string(spec) + "' (expected rules or remote:<url>)");
}

// ---------------------------------------------------------------------------
// Corpus evaluation

struct AnnotatedTurn {
  std::string utterance;
  ParseContext context;
  dsl::Call gold;
  std::size_t line = 0;
};

/// Reads the line-delimited annotated corpus. Blank lines are ignored.
inline std::vector<AnnotatedTurn> load_turns(std::string_view bytes) {
  std::vector<AnnotatedTurn> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= bytes.size()) {
    auto end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    auto line = bytes.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (text::trim(line).empty()) {
      if (end == bytes.size()) break;
      continue;
    }
    auto where = "corpus line " + std::to_string(line_no);
    try {
      auto j = Json::parse(line);
      AnnotatedTurn t;
      t.utterance = j.at("utterance").get<std::string>();
      t.context = context_from_json(j.at("context"));
      t.gold = dsl::parse(j.at("gold").get<std::string>());
      t.line = line_no;
      out.push_back(std::move(t));
    } catch (const Json::exception& e) {
      throw ParseError(where + ": " + e.what());
    } catch (const Error& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (end == bytes.size()) break;
  }
  return out;
}

struct EvalReport {
  std::size_t total = 0;
  std::size_t function_matches = 0;
  std::size_t full_matches = 0;
  // gold function -> predicted function -> count
  std::map<std::string, std::map<std::string, std::size_t>> confusion;
  struct Miss {
    std::size_t line;
    std::string utterance;
    std::string gold;
    std::string predicted;
  };
  std::vector<Miss> misses;

  double function_accuracy() const { return total ? static_cast<double>(function_matches) / total : 0.0; }
  double full_accuracy() const { return total ? static_cast<double>(full_matches) / total : 0.0; }

  Json to_json() const {
    Json j;
    j["total"] = total;
    j["function_matches"] = function_matches;
    j["full_matches"] = full_matches;
    j["function_accuracy"] = function_accuracy();
    j["full_accuracy"] = full_accuracy();
    j["confusion"] = confusion;
    Json misses_json = Json::array();
    for (const auto& m : misses)
      misses_json.push_back({{"line", m.line}, {"utterance", m.utterance}, {"gold", m.gold}, {"predicted", m.predicted}});
    j["misses"] = std::move(misses_json);
    return j;
  }
};

inline EvalReport evaluate_corpus(const std::vector<AnnotatedTurn>& turns, const ParserBackend& backend) {
  if (turns.empty()) throw InputError("annotated corpus is empty");
  EvalReport r;
  for (const auto& t : turns) {
    ++r.total;
    std::string predicted_text;
    dsl::Call predicted;
    try {
      predicted = backend.parse(t.utterance, t.context);
      predicted_text = dsl::render(predicted);
    } catch (const Error& e) {
      predicted = {"<error>", {}};
      predicted_text = std::string("<error: ") + e.what() + ">";
    }
    ++r.confusion[t.gold.function][predicted.function];
    if (predicted.function == t.gold.function) ++r.function_matches;
    if (predicted == t.gold) ++r.full_matches;
    else r.misses.push_back({t.line, t.utterance, dsl::render(t.gold), predicted_text});
  }
  return r;
}

}  // namespace oat::parser
