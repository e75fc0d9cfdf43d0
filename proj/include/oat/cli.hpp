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

// Command-line entry points. run() takes its streams as arguments so every
// subcommand can be driven from tests.

#pragma once

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "oat/corpus.hpp"
#include "oat/curation.hpp"
#include "oat/decision_parser.hpp"
#include "oat/media.hpp"
#include "oat/orchestrator.hpp"
#include "oat/search.hpp"
#include "oat/server.hpp"
#include "oat/taskgraph.hpp"

namespace oat::cli {

inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;

inline constexpr std::string_view kDocumentSuffix = ".task.json";
inline constexpr std::string_view kOverlaySuffix = ".overlay.json";

inline constexpr const char* kFormats = R"txt(Output formats:
  validate    "<file>: valid" or "<file>: invalid (N violations)" followed by
              "  - <rule> [<node>]: <message>" lines. --json prints an array
              of {"file", "valid", "violations"} objects.
  curate      one "curated <doc> -> <file> (N nodes, M edges, K media)" line
              per document, then "curated X of Y documents".
  index       "indexed N tasks, M skipped, T terms, avgdl A" plus one
              "skipped <file>: <reason>" line per skipped file. --report
              writes {"corpus", "index"} JSON.
  search      "<rank>. <title> [<id>] <score>" per result. --json prints an
              array of {"task_id", "score", "title", "snippet"}.
  chat        "oat: <speech>" per turn followed by indented screen lines.
              Commands: /wait N (with --manual-clock), /state, /quit.
  parse-eval  "turns", "function accuracy" and "full accuracy" lines, then
              one "miss" line per mismatch. --json prints the report object.
Exit codes: 0 success, 1 runtime failure or invalid input, 2 bad usage.)txt";

namespace detail {

inline std::vector<std::filesystem::path> files_with_suffix(const std::filesystem::path& dir, std::string_view suffix) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw InputError("directory not found: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    auto name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > suffix.size() && name.ends_with(suffix)) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::unique_ptr<media::EmbeddingProvider> make_embedder(const std::string& spec, std::size_t dim) {
  if (spec == "lexical") return std::make_unique<media::LexicalProvider>(dim);
  if (spec.starts_with("remote:")) return std::make_unique<media::RemoteProvider>(spec.substr(7), dim);
  throw InputError("unknown embedder '" + spec + "' (expected lexical or remote:<url>)");
}

inline std::string fixed(double v, int digits = 4) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

inline std::atomic<server::Server*> g_serving{nullptr};

inline void on_signal(int) {
  if (auto* s = g_serving.load()) s->stop();
}

}  // namespace detail

/// Screen summary printed under each chat reply.
inline std::vector<std::string> render_screen(const orchestrator::Screen& s) {
  std::vector<std::string> out;
  out.push_back("== " + s.headline + " ==");
  if (!s.step_text.empty()) {
    std::istringstream lines(s.step_text);
    for (std::string line; std::getline(lines, line);) out.push_back(line);
  }
  if (!s.requirements.empty()) out.push_back("needs: " + text::join(s.requirements, ", "));
  if (s.image) out.push_back("image: " + s.image->url);
  if (s.video) out.push_back("video: " + s.video->url);
  if (!s.options.empty()) {
    std::vector<std::string> opts;
    for (std::size_t i = 0; i < s.options.size(); ++i) opts.push_back(std::to_string(i + 1) + ". " + s.options[i]);
    out.push_back("options: " + text::join(opts, " | "));
  }
  if (!s.buttons.empty()) {
    std::vector<std::string> b;
    for (const auto& x : s.buttons) b.push_back("[" + x + "]");
    out.push_back("buttons: " + text::join(b, " "));
  }
  for (const auto& t : s.timers)
    out.push_back("timer #" + std::to_string(t.id) + " " + t.label + ": " + std::to_string(t.remaining) + "s left");
  return out;
}

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

inline int cmd_validate(const std::vector<std::string>& files, bool json, Streams io) {
  bool all_ok = true;
  Json arr = Json::array();
  for (const auto& f : files) {
    Json entry{{"file", f}};
    try {
      auto report = validate(load(read_file(f)));
      entry.update(to_json(report));
      all_ok = all_ok && report.ok();
      if (!json) {
        if (report.ok()) {
          io.out << f << ": valid\n";
        } else {
          io.out << f << ": invalid (" << report.violations.size() << " violations)\n";
          for (const auto& v : report.violations) {
            io.out << "  - " << v.rule;
            if (!v.node.empty()) io.out << " [" << v.node << "]";
            io.out << ": " << v.message << "\n";
          }
        }
      }
    } catch (const Error& e) {
      all_ok = false;
      entry["valid"] = false;
      entry["error"] = e.what();
      if (!json) io.out << f << ": invalid (" << e.what() << ")\n";
    }
    arr.push_back(std::move(entry));
  }
  if (json) io.out << arr.dump(2) << "\n";
  return all_ok ? kOk : kFailure;
}

struct CurateArgs {
  std::string in_dir;
  std::string out_dir;
  std::string images;
  std::string videos;
  std::string overlays;
  std::string embedder = "lexical";
  std::size_t dim = 256;
  double min_sim = media::kDefaultMinSim;
  bool no_conditions = false;
  bool no_links = false;
};

inline int cmd_curate(const CurateArgs& a, Streams io) {
  namespace fs = std::filesystem;
  auto docs = detail::files_with_suffix(a.in_dir, kDocumentSuffix);
  fs::create_directories(a.out_dir);
  std::unique_ptr<media::EmbeddingProvider> provider;
  media::MediaIndex images;
  media::MediaIndex videos;
  videos.kind = media::MediaKind::Video;
  if (!a.images.empty() || !a.videos.empty()) {
    provider = detail::make_embedder(a.embedder, a.dim);
    if (!a.images.empty()) images = media::build_media_index(read_file(a.images), media::MediaKind::Image, *provider);
    if (!a.videos.empty()) videos = media::build_media_index(read_file(a.videos), media::MediaKind::Video, *provider);
    for (const auto* idx : {&images, &videos}) {
      for (const auto& s : idx->report.skipped)
        io.err << "catalog line " << s.line << " skipped: " << s.reason << "\n";
    }
  }
  std::size_t written = 0;
  for (const auto& path : docs) {
    auto name = path.filename().string();
    try {
      auto g = curation::synthesize(curation::load_document(read_file(path)),
                                    {!a.no_conditions, !a.no_links});
      if (provider) g = media::augment(std::move(g), images, videos, *provider, {a.min_sim, nullptr});
      if (!a.overlays.empty()) {
        auto ov = fs::path(a.overlays) / (g.id + std::string(kOverlaySuffix));
        if (fs::exists(ov)) g = curation::apply_overlay(g, curation::load_overlay(read_file(ov)));
      }
      auto report = validate(g);
      if (!report.ok()) throw SchemaError(report.violations.front().rule + ": " + report.violations.front().message);
      auto out = fs::path(a.out_dir) / (g.id + std::string(kGraphSuffix));
      write_file(out, save(g));
      std::size_t attached = 0;
      for (const auto& n : g.nodes) {
        if (n.kind() != NodeKind::Step) continue;
        const auto& p = n.as<StepPayload>();
        attached += p.image.has_value() + p.video.has_value();
      }
      io.out << "curated " << name << " -> " << out.string() << " (" << g.nodes.size() << " nodes, "
             << g.edges.size() << " edges, " << attached << " media)\n";
      ++written;
    } catch (const Error& e) {
      io.err << name << ": " << e.what() << "\n";
    }
  }
  io.out << "curated " << written << " of " << docs.size() << " documents\n";
  return written == docs.size() ? kOk : kFailure;
}

inline int cmd_index(const std::string& dir, const std::string& report_path, bool json, Streams io) {
  auto built = search::build_index(dir);
  Json report{{"corpus", built.corpus.report.to_json()}, {"index", built.index.stats()}};
  if (!report_path.empty()) write_file(report_path, report.dump(2) + "\n");
  if (json) {
    io.out << report.dump(2) << "\n";
  } else {
    io.out << "indexed " << built.index.size() << " tasks, " << built.corpus.report.skipped.size() << " skipped, "
           << built.index.stats()["terms"].get<std::size_t>() << " terms, avgdl "
           << detail::fixed(built.index.avgdl(), 2) << "\n";
    for (const auto& s : built.corpus.report.skipped) io.out << "skipped " << s.file << ": " << s.reason << "\n";
  }
  return kOk;
}

inline int cmd_search(const std::string& dir, const std::string& query, const std::string& theme, int k, bool json,
                      Streams io) {
  auto built = search::build_index(dir);
  auto results = built.index.query(query, theme, k);
  if (json) {
    Json arr = Json::array();
    for (const auto& r : results) arr.push_back(search::to_json(r));
    io.out << arr.dump(2) << "\n";
    return kOk;
  }
  if (results.empty()) io.out << "no results\n";
  for (std::size_t i = 0; i < results.size(); ++i)
    io.out << i + 1 << ". " << results[i].title << " [" << results[i].task_id << "] "
           << detail::fixed(results[i].score) << "\n";
  return kOk;
}

inline int cmd_parse_eval(const std::string& corpus, const std::string& backend_spec, const std::string& lexicons,
                          bool json, Streams io) {
  auto lex = lexicons.empty() ? parser::Lexicons::defaults() : parser::Lexicons::load_file(lexicons);
  auto backend = parser::make_backend(backend_spec, std::move(lex));
  auto report = parser::evaluate_corpus(parser::load_turns(read_file(corpus)), *backend);
  if (json) {
    io.out << report.to_json().dump(2) << "\n";
    return kOk;
  }
  io.out << "turns: " << report.total << "\n";
  io.out << "function accuracy: " << detail::fixed(report.function_accuracy()) << " (" << report.function_matches
         << "/" << report.total << ")\n";
  io.out << "full accuracy: " << detail::fixed(report.full_accuracy()) << " (" << report.full_matches << "/"
         << report.total << ")\n";
  for (const auto& m : report.misses)
    io.out << "miss line " << m.line << ": \"" << m.utterance << "\" gold " << m.gold << " predicted " << m.predicted
           << "\n";
  return kOk;
}

inline int cmd_chat(const std::string& dir, const std::string& parser_spec, bool manual_clock, Streams io) {
  std::shared_ptr<engine::ManualClock> manual;
  std::shared_ptr<const engine::Clock> clock;
  if (manual_clock) {
    manual = std::make_shared<engine::ManualClock>();
    clock = manual;
  } else {
    clock = std::make_shared<engine::SteadyClock>();
  }
  orchestrator::Orchestrator orch(orchestrator::Library::load(dir), parser::make_backend(parser_spec), clock);
  auto id = orch.create_session().id;
  io.out << "oat: Hi! What would you like to make or do today?\n";
  for (std::string line; std::getline(io.in, line);) {
    auto input = text::trim(line);
    if (input.empty()) continue;
    if (input == "/quit") break;
    if (input == "/state") {
      io.out << orch.state(id).dump(2) << "\n";
      continue;
    }
    if (input.starts_with("/wait")) {
      if (!manual) {
        io.out << "(the clock is only scripted with --manual-clock)\n";
        continue;
      }
      try {
        auto secs = server::detail::to_int("/wait", text::trim(input.substr(5)), 0, 1 << 30);
        manual->advance(std::chrono::seconds(secs));
        io.out << "(clock +" << secs << "s)\n";
      } catch (const Error& e) {
        io.out << "(" << e.what() << ")\n";
      }
      continue;
    }
    auto r = orch.handle_turn(id, input);
    io.out << "oat: " << r.speech << "\n";
    for (const auto& l : render_screen(r.screen)) io.out << "     " << l << "\n";
  }
  return kOk;
}

struct ServeArgs {
  server::Config config;
  std::string host = "0.0.0.0";
  std::string snapshot;
};

inline int cmd_serve(const ServeArgs& a, Streams io) {
  auto orch = std::make_shared<orchestrator::Orchestrator>(
      orchestrator::Library::load(a.config.corpus_dir), parser::make_backend(a.config.parser_backend),
      std::make_shared<engine::SteadyClock>(), orchestrator::Options{a.config.ttl});
  if (!a.snapshot.empty() && std::filesystem::exists(a.snapshot)) {
    auto n = orch->restore(parse_json_text(read_file(a.snapshot), "session snapshot"));
    io.out << "restored " << n << " sessions\n";
  }
  server::Server srv(orch, a.config.ui_dir, a.config.gc_interval);
  int port = srv.bind(a.host, a.config.port);
  io.out << "listening on http://" << a.host << ":" << port << " (" << orch->library()->corpus.graphs.size()
         << " tasks, parser " << orch->parser_name() << ")" << std::endl;
  detail::g_serving = &srv;
  auto prev_int = std::signal(SIGINT, detail::on_signal);
  auto prev_term = std::signal(SIGTERM, detail::on_signal);
  srv.run();
  std::signal(SIGINT, prev_int);
  std::signal(SIGTERM, prev_term);
  detail::g_serving = nullptr;
  if (!a.snapshot.empty()) {
    write_file(a.snapshot, orch->snapshot().dump(2) + "\n");
    io.out << "saved sessions to " << a.snapshot << "\n";
  }
  return kOk;
}

/// Parses `args` (program name first) and runs the chosen subcommand.
inline int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  Streams io{in, out, err};
  CLI::App app{"Task assistant toolkit: curate, index, search and converse over task graphs.", "oat"};
  app.footer(kFormats);
  app.require_subcommand(1);

  std::vector<std::string> files;
  bool json = false;
  auto* validate_cmd = app.add_subcommand("validate", "Validate task graph files");
  validate_cmd->add_option("files", files, "Task graph JSON files")->required();
  validate_cmd->add_flag("--json", json, "Emit JSON");

  CurateArgs curate;
  auto* curate_cmd = app.add_subcommand("curate", "Turn *.task.json documents into task graphs");
  curate_cmd->add_option("--in", curate.in_dir, "Directory of *.task.json documents")->required();
  curate_cmd->add_option("--out", curate.out_dir, "Output directory for *.taskgraph.json files")->required();
  curate_cmd->add_option("--images", curate.images, "Image catalog (JSONL)");
  curate_cmd->add_option("--videos", curate.videos, "Video catalog (JSONL)");
  curate_cmd->add_option("--overlays", curate.overlays, "Directory of <task-id>.overlay.json files");
  curate_cmd->add_option("--embedder", curate.embedder, "lexical or remote:<url>")->capture_default_str();
  curate_cmd->add_option("--dim", curate.dim, "Embedding dimension")->capture_default_str()->check(CLI::PositiveNumber);
  curate_cmd->add_option("--min-sim", curate.min_sim, "Minimum media similarity")
      ->capture_default_str()
      ->check(CLI::Range(-1.0, 1.0));
  curate_cmd->add_flag("--no-conditions", curate.no_conditions, "Keep conditional sentences as plain steps");
  curate_cmd->add_flag("--no-links", curate.no_links, "Skip requirement linking");

  std::string corpus_dir;
  std::string report_path;
  auto* index_cmd = app.add_subcommand("index", "Build the search index and report on the corpus");
  index_cmd->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  index_cmd->add_option("--report", report_path, "Write the JSON report here");
  index_cmd->add_flag("--json", json, "Emit JSON");

  std::string query;
  std::string theme;
  int k = 10;
  auto* search_cmd = app.add_subcommand("search", "Rank tasks for a query");
  search_cmd->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  search_cmd->add_option("query", query, "Query text")->required();
  search_cmd->add_option("--theme", theme, "Theme to boost");
  search_cmd->add_option("-k", k, "Number of results")->capture_default_str()->check(CLI::Range(1, 1000));
  search_cmd->add_flag("--json", json, "Emit JSON");

  std::string parser_spec = "rules";
  bool manual_clock = false;
  auto* chat_cmd = app.add_subcommand("chat", "Converse in the terminal (one utterance per line)");
  chat_cmd->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  chat_cmd->add_option("--parser", parser_spec, "rules or remote:<url>")->capture_default_str();
  chat_cmd->add_flag("--manual-clock", manual_clock, "Freeze time; advance it with /wait N");

  std::string turns_path;
  std::string lexicons;
  auto* eval_cmd = app.add_subcommand("parse-eval", "Score the decision parser on an annotated corpus");
  eval_cmd->add_option("--corpus", turns_path, "Annotated turns (JSONL)")->required();
  eval_cmd->add_option("--backend", parser_spec, "rules or remote:<url>")->capture_default_str();
  eval_cmd->add_option("--lexicons", lexicons, "Lexicon JSON overriding the defaults");
  eval_cmd->add_flag("--json", json, "Emit JSON");

  ServeArgs serve;
  try {
    serve.config = server::config_from_env();
  } catch (const Error& e) {
    err << "oat: " << e.what() << "\n";
    return kUsage;
  }
  int ttl_min = static_cast<int>(serve.config.ttl.count());
  std::string ui_dir = serve.config.ui_dir.value_or("");
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--port", serve.config.port, "Port (0 picks a free one)")
      ->capture_default_str()
      ->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--host", serve.host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--corpus", serve.config.corpus_dir, "Corpus directory")->capture_default_str();
  serve_cmd->add_option("--ttl", ttl_min, "Session idle timeout in minutes")->capture_default_str()->check(CLI::NonNegativeNumber);
  serve_cmd->add_option("--parser", serve.config.parser_backend, "rules or remote:<url>")->capture_default_str();
  serve_cmd->add_option("--ui", ui_dir, "Directory of static UI files");
  serve_cmd->add_option("--snapshot", serve.snapshot, "Restore sessions from and save them to this file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kOk;
    }
    err << "oat: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*validate_cmd) return cmd_validate(files, json, io);
    if (*curate_cmd) return cmd_curate(curate, io);
    if (*index_cmd) return cmd_index(corpus_dir, report_path, json, io);
    if (*search_cmd) return cmd_search(corpus_dir, query, theme, k, json, io);
    if (*chat_cmd) return cmd_chat(corpus_dir, parser_spec, manual_clock, io);
    if (*eval_cmd) return cmd_parse_eval(turns_path, parser_spec, lexicons, json, io);
    if (*serve_cmd) {
      serve.config.ttl = std::chrono::minutes(ttl_min);
      serve.config.ui_dir = ui_dir.empty() ? std::nullopt : std::optional<std::string>(ui_dir);
      return cmd_serve(serve, io);
    }
  } catch (const Error& e) {
    err << "oat: " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    err << "oat: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

inline int run(int argc, const char* const* argv, std::istream& in = std::cin, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv, argv + argc), in, out, err);
}

}  // namespace oat::cli
