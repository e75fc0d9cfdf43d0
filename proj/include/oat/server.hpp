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

// HTTP/JSON front end for the orchestrator.

#pragma once

#include <httplib.h>

#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "oat/error.hpp"
#include "oat/orchestrator.hpp"

namespace oat::server {

/// Service settings, normally read from the environment.
struct Config {
  int port = 8080;
  std::string corpus_dir = "data/corpus";
  std::chrono::minutes ttl{60};
  std::string parser_backend = "rules";
  std::optional<std::string> ui_dir;
  std::chrono::seconds gc_interval{60};
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

inline std::optional<std::string> process_env(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::optional<std::string>(v) : std::nullopt;
}

namespace detail {

inline int to_int(const std::string& name, const std::string& value, int lo, int hi) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty() || v < lo || v > hi)
    throw InputError(name + " must be an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

}  // namespace detail

/// Reads OAT_PORT, OAT_CORPUS_DIR, OAT_SESSION_TTL_MIN, OAT_PARSER_BACKEND
/// and OAT_UI_DIR. Throws InputError on a malformed value.
inline Config config_from_env(const EnvLookup& env = process_env) {
  Config c;
  if (auto v = env("OAT_PORT")) c.port = detail::to_int("OAT_PORT", *v, 0, 65535);
  if (auto v = env("OAT_CORPUS_DIR")) c.corpus_dir = *v;
  if (auto v = env("OAT_SESSION_TTL_MIN")) c.ttl = std::chrono::minutes(detail::to_int("OAT_SESSION_TTL_MIN", *v, 0, 1 << 20));
  if (auto v = env("OAT_PARSER_BACKEND")) c.parser_backend = *v;
  if (auto v = env("OAT_UI_DIR"); v && !v->empty()) c.ui_dir = *v;
  return c;
}

inline int status_for(const Error& e) {
  if (dynamic_cast<const NotFoundError*>(&e)) return 404;
  if (dynamic_cast<const InputError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const SchemaError*>(&e))
    return 400;
  return 422;
}

inline Json error_body(std::string_view code, std::string_view message) {
  return Json{{"error", {{"code", code}, {"message", message}}}};
}

class Server {
 public:
  Server(std::shared_ptr<orchestrator::Orchestrator> orch, std::optional<std::string> ui_dir = std::nullopt,
         std::chrono::seconds gc_interval = std::chrono::seconds(60))
      : orch_(std::move(orch)), gc_interval_(gc_interval) {
    routes();
    if (ui_dir && !http_.set_mount_point("/", *ui_dir)) throw InputError("ui directory not found: " + *ui_dir);
  }

  ~Server() { stop(); }

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  httplib::Server& http() { return http_; }
  orchestrator::Orchestrator& orchestrator() { return *orch_; }

  /// Binds to `port`, or to a free port when `port` is 0. Returns the port.
  int bind(const std::string& host, int port) {
    int bound = port == 0 ? http_.bind_to_any_port(host) : (http_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw InputError("cannot bind " + host + ":" + std::to_string(port));
    return bound;
  }

  /// Serves until stop(). Runs session eviction in the background.
  void run() {
    std::thread gc([this] { gc_loop(); });
    http_.listen_after_bind();
    {
      std::lock_guard lk(gc_mu_);
      stopping_ = true;
    }
    gc_cv_.notify_all();
    gc.join();
  }

  void stop() {
    {
      std::lock_guard lk(gc_mu_);
      stopping_ = true;
    }
    gc_cv_.notify_all();
    http_.stop();
  }

 private:
  using Req = httplib::Request;
  using Res = httplib::Response;

  static void reply(Res& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
  }

  static void fail(Res& res, int status, std::string_view code, std::string_view message) {
    reply(res, status, error_body(code, message));
  }

  template <typename F>
  static auto guarded(F f) {
    return [f](const Req& req, Res& res) {
      try {
        f(req, res);
      } catch (const Error& e) {
        fail(res, status_for(e), e.code(), e.what());
      } catch (const Json::exception& e) {
        fail(res, 400, "bad_request", e.what());
      } catch (const std::exception& e) {
        fail(res, 500, "internal", e.what());
      }
    };
  }

  static Json body_json(const Req& req) {
    if (req.body.empty()) throw InputError("request body is empty");
    try {
      return Json::parse(req.body);
    } catch (const Json::parse_error& e) {
      throw InputError(std::string("request body is not valid JSON: ") + e.what());
    }
  }

  void routes() {
    http_.Get("/api/health", guarded([this](const Req&, Res& res) {
                auto lib = orch_->library();
                reply(res, 200, Json{{"status", "ok"}, {"corpus_size", lib->corpus.graphs.size()}});
              }));

    http_.Post("/api/session", guarded([this](const Req&, Res& res) {
                 reply(res, 201, Json{{"session_id", orch_->create_session().id}});
               }));

    http_.Post(R"(/api/session/([0-9a-zA-Z_-]+)/utterance)", guarded([this](const Req& req, Res& res) {
                 auto body = body_json(req);
                 if (!body.is_object() || !body.contains("text") || !body["text"].is_string())
                   throw InputError("body must be an object with a string 'text'");
                 auto r = orch_->handle_turn(req.matches[1], body["text"].get<std::string>());
                 reply(res, 200, orchestrator::to_json(r));
               }));

    http_.Get(R"(/api/session/([0-9a-zA-Z_-]+)/state)", guarded([this](const Req& req, Res& res) {
                reply(res, 200, orch_->state(req.matches[1]));
              }));

    http_.Get("/api/tasks", guarded([this](const Req& req, Res& res) {
                auto lib = orch_->library();
                auto q = req.get_param_value("q");
                auto theme = req.get_param_value("theme");
                int k = 10;
                if (req.has_param("k")) k = detail::to_int("k", req.get_param_value("k"), 1, 1000);
                Json out = Json::array();
                if (!text::normalize(q).empty()) {
                  for (const auto& r : lib->index.query(q, theme, k)) out.push_back(search::to_json(r));
                } else {
                  // Browse mode: every task, optionally narrowed to a theme.
                  const std::string tag = "theme:" + text::normalize(theme);
                  for (const auto& g : lib->corpus.graphs) {
                    if (!theme.empty() && std::find(g.tags.begin(), g.tags.end(), tag) == g.tags.end()) continue;
                    out.push_back(search::to_json({g.id, 0.0, g.title, search::make_snippet(g.description)}));
                  }
                }
                reply(res, 200, out);
              }));

    http_.Get(R"(/api/tasks/([0-9a-zA-Z_.-]+))", guarded([this](const Req& req, Res& res) {
                auto lib = orch_->library();
                const auto* g = lib->corpus.find(req.matches[1].str());
                if (!g) throw NotFoundError("unknown task '" + req.matches[1].str() + "'");
                reply(res, 200, to_json(*g));
              }));

    http_.set_error_handler([](const Req&, Res& res) {
      if (res.body.empty()) fail(res, res.status, res.status == 404 ? "not_found" : "http_error", "no such route");
    });
  }

  void gc_loop() {
    std::unique_lock lk(gc_mu_);
    while (!stopping_) {
      gc_cv_.wait_for(lk, gc_interval_, [this] { return stopping_; });
      if (stopping_) break;
      lk.unlock();
      orch_->session_gc(orch_->clock().now());
      lk.lock();
    }
  }

  std::shared_ptr<orchestrator::Orchestrator> orch_;
  httplib::Server http_;
  std::chrono::seconds gc_interval_;
  std::mutex gc_mu_;
  std::condition_variable gc_cv_;
  bool stopping_ = false;
};

}  // namespace oat::server
