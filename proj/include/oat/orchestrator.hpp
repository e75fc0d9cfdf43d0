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

// Conversation sessions: each turn is parsed into a decision call and routed
// to search, the execution engine or question answering.

#pragma once

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "oat/corpus.hpp"
#include "oat/decision_parser.hpp"
#include "oat/dsl.hpp"
#include "oat/engine.hpp"
#include "oat/error.hpp"
#include "oat/qa.hpp"
#include "oat/search.hpp"
#include "oat/taskgraph.hpp"

namespace oat::orchestrator {

using engine::Instant;
using parser::Phase;

/// An immutable corpus plus its index. Sessions hold the snapshot they
/// started a task from, so a reload never pulls a graph out from under them.
struct Library {
  Corpus corpus;
  search::SearchIndex index;
  std::vector<std::string> themes;  // most frequent first

  static std::shared_ptr<const Library> make(Corpus corpus) {
    auto lib = std::make_shared<Library>();
    lib->index = search::SearchIndex::build(corpus);
    std::map<std::string, int> counts;
    for (const auto& g : corpus.graphs) {
      for (const auto& t : g.tags) {
        if (t.starts_with("theme:")) ++counts[t.substr(6)];
      }
    }
    std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    for (auto& [name, n] : ranked) lib->themes.push_back(name);
    lib->corpus = std::move(corpus);
    return lib;
  }

  static std::shared_ptr<const Library> load(const std::filesystem::path& dir) { return make(load_corpus(dir)); }
};

struct TranscriptEntry {
  std::string speaker;  // "user" | "system"
  std::string text;

  bool operator==(const TranscriptEntry&) const = default;
};

struct Session {
  std::string id;
  Phase phase = Phase::Planning;
  std::optional<engine::ExecState> exec;
  std::vector<search::RankedResult> candidates;
  std::vector<TranscriptEntry> transcript;
  Instant created_at{0};
  Instant last_active{0};
  std::size_t fact_rotation = 0;
};

struct TimerView {
  int id = 0;
  std::string label;
  std::int64_t remaining = 0;
};

struct Screen {
  std::string headline;
  std::string step_text;
  std::vector<std::string> requirements;
  std::optional<MediaRef> image;
  std::optional<MediaRef> video;
  std::vector<std::string> buttons;
  std::vector<std::string> options;
  std::vector<TimerView> timers;
};

struct TurnResponse {
  std::string speech;
  Screen screen;
  Phase phase = Phase::Planning;
  std::vector<Json> events;
  std::string dsl;  // rendered decision call, empty when parsing failed
};

inline Json to_json(const Screen& s) {
  Json timers = Json::array();
  for (const auto& t : s.timers) timers.push_back({{"id", t.id}, {"label", t.label}, {"remaining", t.remaining}});
  return Json{{"headline", s.headline},
              {"step_text", s.step_text},
              {"requirements", s.requirements},
              {"image", oat::detail::media_to_json(s.image)},
              {"video", oat::detail::media_to_json(s.video)},
              {"buttons", s.buttons},
              {"options", s.options},
              {"timers", std::move(timers)}};
}

inline Json to_json(const TurnResponse& r) {
  return Json{{"speech", r.speech},
              {"screen", to_json(r.screen)},
              {"phase", std::string(parser::to_string(r.phase))},
              {"events", r.events},
              {"dsl", r.dsl}};
}

inline Json event_summary(const engine::Event& e) {
  Json j{{"kind", std::string(engine::to_string(e.kind))}};
  if (!e.node.empty()) j["node"] = e.node;
  if (!e.text.empty()) j["text"] = e.text;
  if (!e.action.empty()) j["action"] = e.action;
  if (!e.args.empty()) j["args"] = e.args;
  if (e.timer_id) j["timer_id"] = e.timer_id;
  if (e.step && e.step->position) j["position"] = *e.step->position;
  return j;
}

inline search::RankedResult ranked_from_json(const Json& j) {
  return {j.at("task_id").get<std::string>(), j.at("score").get<double>(), j.at("title").get<std::string>(),
          j.at("snippet").get<std::string>()};
}

/// Mutex that admits waiters in arrival order.
class FifoMutex {
 public:
  void lock() {
    std::unique_lock lk(mu_);
    auto ticket = next_++;
    cv_.wait(lk, [&] { return serving_ == ticket; });
  }
  bool try_lock() {
    std::lock_guard lk(mu_);
    if (serving_ != next_) return false;
    ++next_;
    return true;
  }
  void unlock() {
    {
      std::lock_guard lk(mu_);
      ++serving_;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::uint64_t next_ = 0;
  std::uint64_t serving_ = 0;
};

struct Options {
  std::chrono::minutes ttl{60};
  std::size_t top_k = 3;
  std::size_t max_themes = 3;
};

inline constexpr std::string_view kSystem = "system";
inline constexpr std::string_view kUser = "user";

class Orchestrator {
 public:
  Orchestrator(std::shared_ptr<const Library> library, std::shared_ptr<const parser::ParserBackend> parser,
               std::shared_ptr<const engine::Clock> clock, Options options = {})
      : library_(std::move(library)),
        parser_(std::move(parser)),
        clock_(std::move(clock)),
        options_(options),
        rng_(std::random_device{}()) {
    if (!library_ || !parser_ || !clock_) throw InputError("orchestrator needs a library, parser and clock");
  }

  const Options& options() const { return options_; }
  const engine::Clock& clock() const { return *clock_; }
  std::string parser_name() const { return parser_->name(); }

  std::shared_ptr<const Library> library() const {
    std::lock_guard lk(lib_mu_);
    return library_;
  }

  /// Swaps in a new corpus. Running tasks keep their old snapshot.
  void reload(std::shared_ptr<const Library> library) {
    if (!library) throw InputError("library is null");
    std::lock_guard lk(lib_mu_);
    library_ = std::move(library);
  }

  Session create_session() {
    auto slot = std::make_shared<Slot>();
    slot->session.created_at = slot->session.last_active = clock_->now();
    std::lock_guard lk(map_mu_);
    do {
      slot->session.id = new_id();
    } while (sessions_.count(slot->session.id));
    sessions_.emplace(slot->session.id, slot);
    return slot->session;
  }

  std::size_t session_count() const {
    std::lock_guard lk(map_mu_);
    return sessions_.size();
  }

  Session session(const std::string& id) const {
    auto slot = find(id);
    std::lock_guard lk(slot->mu);
    return slot->session;
  }

  /// Session snapshot with remaining timer seconds.
  Json state(const std::string& id) const {
    auto slot = find(id);
    std::lock_guard lk(slot->mu);
    return session_json(*slot, clock_->now());
  }

  /// Runs one turn. Throws NotFoundError for an unknown session; every other
  /// failure becomes an apology with the session left as it was.
  TurnResponse handle_turn(const std::string& id, std::string_view utterance) {
    auto slot = find(id);
    std::lock_guard lk(slot->mu);
    Turn turn(*this, *slot);
    turn.run(utterance);
    return std::move(turn.response);
  }

  /// Removes sessions idle for at least the TTL. Sessions mid-turn are kept.
  std::size_t session_gc(Instant now) {
    std::lock_guard lk(map_mu_);
    std::size_t evicted = 0;
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      auto& slot = *it->second;
      if (!slot.mu.try_lock()) {
        ++it;
        continue;
      }
      bool idle = now - slot.session.last_active >= options_.ttl;
      slot.mu.unlock();
      if (idle) {
        it = sessions_.erase(it);
        ++evicted;
      } else {
        ++it;
      }
    }
    return evicted;
  }

  /// All sessions as JSON, for saving on shutdown.
  Json snapshot() const {
    std::vector<std::shared_ptr<Slot>> slots;
    {
      std::lock_guard lk(map_mu_);
      for (const auto& [id, s] : sessions_) slots.push_back(s);
    }
    Json out = Json::array();
    auto now = clock_->now();
    for (const auto& slot : slots) {
      std::lock_guard lk(slot->mu);
      out.push_back(session_json(*slot, now));
    }
    return Json{{"sessions", std::move(out)}};
  }

  /// Restores sessions saved by snapshot(). A session whose task is no
  /// longer in the corpus comes back in Planning. Returns the count restored.
  std::size_t restore(const Json& j) {
    auto lib = library();
    std::size_t n = 0;
    try {
      for (const auto& sj : j.at("sessions")) {
        auto slot = std::make_shared<Slot>();
        auto& s = slot->session;
        s.id = sj.at("id").get<std::string>();
        s.created_at = Instant{sj.at("created_at_ms").get<std::int64_t>()};
        s.last_active = Instant{sj.at("last_active_ms").get<std::int64_t>()};
        s.fact_rotation = sj.value("fact_rotation", std::size_t{0});
        for (const auto& c : sj.at("candidates")) s.candidates.push_back(ranked_from_json(c));
        for (const auto& t : sj.at("transcript"))
          s.transcript.push_back({t.at("speaker").get<std::string>(), t.at("text").get<std::string>()});
        if (!sj.at("exec").is_null()) {
          auto exec = engine::exec_state_from_json(sj.at("exec"));
          if (const auto* g = lib->corpus.find(exec.graph_id)) {
            slot->library = lib;
            slot->executor = std::make_shared<const engine::Executor>(*g);
            s.exec = std::move(exec);
            s.phase = Phase::Execution;
            s.candidates.clear();
          }
        }
        std::lock_guard lk(map_mu_);
        sessions_[s.id] = slot;
        ++n;
      }
    } catch (const Json::exception& e) {
      throw SchemaError(std::string("malformed session snapshot: ") + e.what());
    }
    return n;
  }

 private:
  struct Slot {
    mutable FifoMutex mu;
    Session session;
    std::shared_ptr<const Library> library;  // set while executing
    std::shared_ptr<const engine::Executor> executor;
  };

  // State for one turn. Works on a copy of the session so a failure leaves
  // the stored session untouched.
  struct Turn {
    Turn(Orchestrator& orch, Slot& sl) : o(orch), slot(sl) {}

    Orchestrator& o;
    Slot& slot;
    TurnResponse response;

    Session s{};
    std::shared_ptr<const Library> lib;
    std::shared_ptr<const engine::Executor> ex;
    std::vector<std::string> speech;

    void run(std::string_view utterance) {
      s = slot.session;
      lib = slot.library;
      ex = slot.executor;
      poll();
      // Due timers fire even when the rest of the turn fails.
      const Session base = s;
      const auto base_speech = speech;
      const auto base_events = response.events;
      try {
        dispatch(utterance);
      } catch (const Error& e) {
        s = base;
        lib = slot.library;
        ex = slot.executor;
        speech = base_speech;
        speech.push_back(apology(e));
        response.events = base_events;
      }
      auto now = o.clock_->now();
      response.speech = text::join(speech, " ");
      s.transcript.push_back({std::string(kUser), std::string(utterance)});
      s.transcript.push_back({std::string(kSystem), response.speech});
      s.last_active = now;
      response.phase = s.phase;
      response.screen = screen(now);
      slot.session = std::move(s);
      slot.library = std::move(lib);
      slot.executor = std::move(ex);
    }

    static std::string apology(const Error& e) {
      if (dynamic_cast<const InputError*>(&e) || dynamic_cast<const ParseError*>(&e))
        return "Sorry, I didn't catch that. Could you say it another way?";
      return std::string("Sorry, I can't do that right now: ") + e.what() + ".";
    }

    void poll() {
      if (!s.exec) return;
      auto t = engine::poll_timers(*s.exec, *o.clock_);
      s.exec = std::move(t.state);
      handle_events(t.events);
    }

    parser::ParseContext context() const {
      parser::ParseContext c;
      c.phase = s.phase;
      c.candidate_count = static_cast<int>(s.candidates.size());
      if (s.exec && ex) {
        c.pending_condition = s.exec->pending_condition.has_value();
        c.total_steps = static_cast<int>(ex->step_count());
        if (s.exec->cursor) {
          if (auto p = ex->step_position(*s.exec->cursor)) c.current_step = static_cast<int>(*p);
        }
      }
      for (auto it = s.transcript.rbegin(); it != s.transcript.rend(); ++it) {
        if (it->speaker == kSystem) {
          c.last_system_prompt = it->text;
          break;
        }
      }
      return c;
    }

    void dispatch(std::string_view utterance) {
      auto call = o.parser_->parse(utterance, context());
      response.dsl = dsl::render(call);
      const auto& fn = call.function;
      if (fn == "search") {
        if (s.phase == Phase::Execution) return say("You're in the middle of a task. Say stop to look for another one.");
        search(utterance, call.arg("vague")->as_bool(), call.arg("theme")->as_str());
      } else if (fn == "select") {
        if (s.phase == Phase::Execution) return say("You're already working on a task. Say stop to pick another one.");
        select(call.arg("option")->as_int());
      } else if (fn == "stop") {
        if (s.phase == Phase::Planning) {
          s.candidates.clear();
          return say("Okay. Let me know when you want to find a task.");
        }
        apply(call);
      } else if (fn == "answer_question" || fn == "chit_chat") {
        answer(utterance, fn == "chit_chat");
      } else {
        if (s.phase == Phase::Planning)
          return say("Sorry, there's no task in progress yet. Tell me what you'd like to make or do.");
        apply(call);
      }
    }

    void say(std::string text) { speech.push_back(std::move(text)); }

    std::string current_title() const {
      if (!ex) return "the task";
      return ex->graph().title;
    }

    void search(std::string_view utterance, bool vague, const std::string& theme) {
      if (vague && theme.empty()) {
        s.candidates.clear();
        std::vector<std::string> themes(lib_now()->themes.begin(),
                                        lib_now()->themes.begin() +
                                            static_cast<std::ptrdiff_t>(std::min(o.options_.max_themes,
                                                                                 lib_now()->themes.size())));
        if (themes.empty()) return say("What would you like to make or do?");
        return say("What are you in the mood for? For example: " + list_words(themes, "or") + ".");
      }
      std::string query = vague ? theme : std::string(utterance);
      std::vector<search::RankedResult> results;
      if (!search::tokenize(query).empty())
        results = lib_now()->index.query(query, theme, static_cast<int>(o.options_.top_k));
      s.candidates = results;
      if (results.empty()) return say("I couldn't find a task for that. Could you describe it another way?");
      std::vector<std::string> items;
      for (std::size_t i = 0; i < results.size(); ++i) items.push_back(std::to_string(i + 1) + ". " + results[i].title);
      say("I found " + std::to_string(results.size()) + (results.size() == 1 ? " task: " : " tasks: ") +
          list_words(items, "and") + ". Which one would you like?");
    }

    const std::shared_ptr<const Library>& lib_now() {
      if (!search_lib) search_lib = o.library();
      return search_lib;
    }
    std::shared_ptr<const Library> search_lib;

    void select(std::int64_t option) {
      if (s.candidates.empty()) return say("There's nothing to choose from yet. Tell me what you'd like to make.");
      if (option < 1 || static_cast<std::size_t>(option) > s.candidates.size())
        return say("Please pick a number from 1 to " + std::to_string(s.candidates.size()) + ".");
      auto snapshot = lib_now();
      const auto* g = snapshot->corpus.find(s.candidates[static_cast<std::size_t>(option - 1)].task_id);
      if (!g) throw ProtocolError("that task is no longer available");
      auto executor = std::make_shared<const engine::Executor>(*g);
      auto t = executor->start(*o.clock_);
      lib = snapshot;
      ex = executor;
      s.phase = Phase::Execution;
      s.exec = std::move(t.state);
      s.candidates.clear();
      s.fact_rotation = 0;
      say("Let's start " + g->title + ".");
      handle_events(t.events);
    }

    void apply(const dsl::Call& call) {
      auto t = ex->apply(*s.exec, call, *o.clock_);
      s.exec = std::move(t.state);
      handle_events(t.events);
    }

    void answer(std::string_view utterance, bool chit_chat) {
      engine::StepContext ctx;
      if (s.exec && ex) ctx = s.exec->cursor ? ex->grounded_context(*s.exec) : ex->task_context();
      auto category = qa::route(utterance, ctx);
      if (chit_chat && category == qa::Category::GeneralFallback) {
        if (s.phase == Phase::Planning) return say("I can help you find a recipe or a home project. What would you like to do?");
        return say("Say next when you're ready to continue.");
      }
      auto a = qa::answer(category, utterance, ctx, s.fact_rotation);
      if (category == qa::Category::ExtraFact) ++s.fact_rotation;
      say(a.text);
    }

    void finish_task() {
      s.phase = Phase::Planning;
      s.exec.reset();
      s.candidates.clear();
      lib.reset();
      ex.reset();
    }

    void handle_events(const std::vector<engine::Event>& events) {
      using engine::EventKind;
      for (const auto& e : events) {
        response.events.push_back(event_summary(e));
        switch (e.kind) {
          case EventKind::PresentStep:
            say("Step " + std::to_string(e.step->position.value_or(0)) + " of " +
                std::to_string(e.step->total_steps) + ": " + e.step->summary);
            break;
          case EventKind::AskCondition:
            say(e.text);
            break;
          case EventKind::ActionFired:
            if (e.action == "timer") {
              say("I've started a timer for " + engine::format_duration(std::stoll(e.args.at("seconds"))) + ".");
            } else {
              say("I've added " + e.args.at("item") + " to your list.");
            }
            break;
          case EventKind::TimerFired:
            say("Time's up! Your timer for " + e.text + " has finished.");
            break;
          case EventKind::Warning:
            say("Note: " + e.text + ".");
            break;
          case EventKind::TaskComplete:
            say("Well done, you've finished " + current_title() + "! What would you like to do next?");
            finish_task();
            return;
          case EventKind::Stopped:
            say("Okay, I've stopped " + current_title() + ". What would you like to do next?");
            finish_task();
            return;
        }
      }
    }

    Screen screen(Instant now) const {
      Screen sc;
      if (s.phase == Phase::Planning || !s.exec || !ex) {
        sc.headline = "Find a task";
        for (const auto& c : s.candidates) sc.options.push_back(c.title);
        return sc;
      }
      sc.headline = ex->graph().title;
      if (s.exec->pending_condition) {
        const auto& node = ex->graph().nodes[*ex->graph().index_of(*s.exec->pending_condition)];
        sc.step_text = node.as<ConditionPayload>().question;
        sc.buttons = {"Yes", "No"};
      } else if (s.exec->cursor) {
        auto ctx = ex->grounded_context(*s.exec);
        sc.step_text = ctx.summary;
        if (ctx.details) sc.step_text += "\n" + *ctx.details;
        for (const auto& r : ctx.requirements) sc.requirements.push_back(qa::requirement_phrase(r.as<RequirementPayload>()));
        sc.image = ctx.image;
        sc.video = ctx.video;
      }
      for (const auto& t : s.exec->timers) {
        if (!t.fired) sc.timers.push_back({t.id, t.label, engine::remaining_seconds(t, now)});
      }
      return sc;
    }

    static std::string list_words(const std::vector<std::string>& items, std::string_view conj) {
      std::string out;
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += i + 1 == items.size() ? " " + std::string(conj) + " " : ", ";
        out += items[i];
      }
      return out;
    }
  };

  std::shared_ptr<Slot> find(const std::string& id) const {
    std::lock_guard lk(map_mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError("unknown session '" + id + "'");
    return it->second;
  }

  std::string new_id() {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (int half = 0; half < 2; ++half) {
      auto v = rng_();
      for (int i = 0; i < 16; ++i) {
        out.push_back(kHex[v & 0xF]);
        v >>= 4;
      }
    }
    return out;
  }

  static Json session_json(const Slot& slot, Instant now) {
    const auto& s = slot.session;
    Json candidates = Json::array();
    for (const auto& c : s.candidates) candidates.push_back(search::to_json(c));
    Json transcript = Json::array();
    for (const auto& t : s.transcript) transcript.push_back({{"speaker", t.speaker}, {"text", t.text}});
    Json j{{"id", s.id},
           {"phase", std::string(parser::to_string(s.phase))},
           {"task_id", s.exec ? Json(s.exec->graph_id) : Json(nullptr)},
           {"exec", s.exec ? engine::to_json(*s.exec, now) : Json(nullptr)},
           {"candidates", std::move(candidates)},
           {"transcript", std::move(transcript)},
           {"created_at_ms", s.created_at.count()},
           {"last_active_ms", s.last_active.count()},
           {"fact_rotation", s.fact_rotation}};
    if (s.exec && slot.executor) {
      j["task_title"] = slot.executor->graph().title;
      j["total_steps"] = slot.executor->step_count();
      if (s.exec->cursor) j["current_step"] = Json(slot.executor->step_position(*s.exec->cursor).value_or(0));
    }
    return j;
  }

  mutable std::mutex lib_mu_;
  std::shared_ptr<const Library> library_;
  std::shared_ptr<const parser::ParserBackend> parser_;
  std::shared_ptr<const engine::Clock> clock_;
  Options options_;

  mutable std::mutex map_mu_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::mt19937_64 rng_;  // guarded by map_mu_
};

}  // namespace oat::orchestrator
