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

#include "oat/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "test_util.hpp"

namespace oat::cli {
namespace {

namespace fs = std::filesystem;
using testing::data_path;
using testing::fixture;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result oat(std::vector<std::string> args, const std::string& input = "") {
  args.insert(args.begin(), "oat");
  std::istringstream in(input);
  std::ostringstream out, err;
  int code = run(args, in, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("oat_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Cli, UsageErrorsExitTwo) {
  auto r = oat({});
  EXPECT_EQ(r.code, kUsage);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(oat({"frobnicate"}).code, kUsage);
  EXPECT_EQ(oat({"search", "--corpus", "x"}).code, kUsage);  // query missing
  EXPECT_EQ(oat({"search", "--corpus", "x", "q", "-k", "0"}).code, kUsage);
  EXPECT_EQ(oat({"validate", "--bogus", "f"}).code, kUsage);
}

TEST(Cli, HelpDocumentsFormats) {
  auto r = oat({"--help"});
  EXPECT_EQ(r.code, kOk);
  EXPECT_NE(r.out.find("Output formats"), std::string::npos);
  for (auto cmd : {"serve", "validate", "curate", "index", "search", "chat", "parse-eval"})
    EXPECT_NE(r.out.find(cmd), std::string::npos) << cmd;
  auto sub = oat({"curate", "--help"});
  EXPECT_EQ(sub.code, kOk);
  EXPECT_NE(sub.out.find("--no-conditions"), std::string::npos);
}

TEST(Cli, ValidateReportsCycle) {
  auto r = oat({"validate", fixture("graphs/invalid/cycle.taskgraph.json")});
  EXPECT_EQ(r.code, kFailure);
  EXPECT_NE(r.out.find("invalid"), std::string::npos);
  EXPECT_NE(r.out.find("- cycle"), std::string::npos);

  auto ok = oat({"validate", fixture("graphs/creamy_zucchini_pasta.taskgraph.json")});
  EXPECT_EQ(ok.code, kOk);
  EXPECT_EQ(ok.out, fixture("graphs/creamy_zucchini_pasta.taskgraph.json") + ": valid\n");

  auto mixed = oat({"validate", "--json", fixture("graphs/creamy_zucchini_pasta.taskgraph.json"),
                    fixture("graphs/invalid/not_arity.taskgraph.json"), "/no/such/file.json"});
  EXPECT_EQ(mixed.code, kFailure);
  auto j = Json::parse(mixed.out);
  ASSERT_EQ(j.size(), 3u);
  EXPECT_TRUE(j[0]["valid"]);
  EXPECT_FALSE(j[1]["valid"]);
  EXPECT_EQ(j[1]["violations"][0]["rule"], "logic_arity");
  EXPECT_FALSE(j[2]["valid"]);
  EXPECT_TRUE(j[2].contains("error"));
}

TEST(Cli, CurateThreeFixtures) {
  auto in = scratch("curate_in");
  auto out = scratch("curate_out") / "graphs";
  for (auto name : {"zucchini_saute", "pasta_if", "three_linear"})
    fs::copy_file(fixture(std::string("documents/") + name + ".task.json"), in / (std::string(name) + ".task.json"));
  auto r = oat({"curate", "--in", in.string(), "--out", out.string()});
  EXPECT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("curated 3 of 3 documents"), std::string::npos);
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(out)) {
    ++n;
    EXPECT_TRUE(validate(load(read_file(e.path()))).ok()) << e.path();
  }
  EXPECT_EQ(n, 3u);

  auto flat = scratch("curate_flat");
  r = oat({"curate", "--in", in.string(), "--out", flat.string(), "--no-conditions"});
  EXPECT_EQ(r.code, kOk);
  auto pasta = load(read_file(flat / "fresh-or-dried-pasta.taskgraph.json"));
  for (const auto& node : pasta.nodes) EXPECT_NE(node.kind(), NodeKind::Condition);
}

TEST(Cli, CurateAppliesOverlaysAndMedia) {
  auto in = scratch("overlay_in");
  auto ov = scratch("overlay_ov");
  auto out = scratch("overlay_out");
  fs::copy_file(fixture("documents/three_linear.task.json"), in / "three_linear.task.json");
  fs::copy_file(fixture("overlays/add_condition.overlay.json"), ov / "three-steps.overlay.json");
  auto r = oat({"curate", "--in", in.string(), "--out", out.string(), "--overlays", ov.string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  auto g = load(read_file(out / "three-steps.taskgraph.json"));
  EXPECT_TRUE(g.index_of("c1"));

  auto media_out = scratch("media_out");
  fs::copy_file(fixture("documents/zucchini_saute.task.json"), in / "zucchini_saute.task.json");
  r = oat({"curate", "--in", in.string(), "--out", media_out.string(), "--images", data_path("catalog/images.jsonl"),
           "--videos", data_path("catalog/videos.jsonl"), "--min-sim", "0.45"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("media)"), std::string::npos);

  EXPECT_EQ(oat({"curate", "--in", in.string(), "--out", out.string(), "--embedder", "magic", "--images",
                 data_path("catalog/images.jsonl")})
                .code,
            kFailure);
}

TEST(Cli, CurateReportsBadDocuments) {
  auto in = scratch("bad_in");
  write_file(in / "broken.task.json", "{\"title\": ");
  fs::copy_file(fixture("documents/minimal.task.json"), in / "minimal.task.json");
  auto r = oat({"curate", "--in", in.string(), "--out", scratch("bad_out").string()});
  EXPECT_EQ(r.code, kFailure);
  EXPECT_NE(r.err.find("broken.task.json"), std::string::npos);
  EXPECT_NE(r.out.find("curated 1 of 2 documents"), std::string::npos);
}

TEST(Cli, IndexAndSearchShippedCorpus) {
  auto report = scratch("index") / "report.json";
  auto r = oat({"index", "--corpus", data_path("corpus"), "--report", report.string()});
  EXPECT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(r.out.rfind("indexed 50 tasks, 0 skipped", 0), 0u);
  auto j = Json::parse(read_file(report));
  EXPECT_EQ(j["index"]["documents"], 50);
  EXPECT_EQ(j["corpus"]["indexed"].size(), 50u);

  r = oat({"search", "--corpus", data_path("corpus"), "new york style pizza", "-k", "3"});
  EXPECT_EQ(r.code, kOk);
  EXPECT_EQ(r.out.rfind("1. New York-Style Pizza [new-york-style-pizza]", 0), 0u) << r.out;

  r = oat({"search", "--corpus", data_path("corpus"), "pizza", "--json", "-k", "2"});
  auto arr = Json::parse(r.out);
  ASSERT_EQ(arr.size(), 2u);
  EXPECT_GE(arr[0]["score"].get<double>(), arr[1]["score"].get<double>());

  r = oat({"search", "--corpus", data_path("corpus"), "the"});
  EXPECT_EQ(r.code, kFailure);
  EXPECT_NE(r.err.find("no searchable terms"), std::string::npos);
  EXPECT_EQ(oat({"index", "--corpus", "/no/such/dir"}).code, kFailure);
}

TEST(Cli, ParseEvalShippedCorpus) {
  auto r = oat({"parse-eval", "--corpus", data_path("parser/turns.jsonl")});
  EXPECT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("turns: 120\n"), std::string::npos);
  EXPECT_NE(r.out.find("full accuracy: "), std::string::npos);
  auto j = Json::parse(oat({"parse-eval", "--corpus", data_path("parser/turns.jsonl"), "--json", "--lexicons",
                            data_path("config/lexicons.json")})
                           .out);
  EXPECT_EQ(j["total"], 120);
  EXPECT_EQ(oat({"parse-eval", "--corpus", data_path("parser/turns.jsonl"), "--backend", "nonsense"}).code,
            kFailure);
}

TEST(Cli, ChatGoldenTranscript) {
  auto script = read_file(fixture("chat/session.txt"));
  auto golden = read_file(fixture("chat/session.golden"));
  auto first = oat({"chat", "--corpus", fixture("chat/corpus"), "--manual-clock"}, script);
  auto second = oat({"chat", "--corpus", fixture("chat/corpus"), "--manual-clock"}, script);
  EXPECT_EQ(first.code, kOk) << first.err;
  EXPECT_EQ(first.out, second.out);
  EXPECT_EQ(first.out, golden);
}

TEST(Cli, ChatCommands) {
  auto r = oat({"chat", "--corpus", fixture("chat/corpus")}, "/wait 5\npizza\n/state\n/quit\nnext\n");
  EXPECT_EQ(r.code, kOk);
  EXPECT_NE(r.out.find("only scripted with --manual-clock"), std::string::npos);
  EXPECT_NE(r.out.find("\"phase\": \"planning\""), std::string::npos);
  EXPECT_EQ(r.out.find("Sorry, there's no task"), std::string::npos);  // input after /quit is ignored
  r = oat({"chat", "--corpus", fixture("chat/corpus"), "--manual-clock"}, "/wait soon\n");
  EXPECT_NE(r.out.find("(/wait must be an integer"), std::string::npos);
}

TEST(Cli, ServeFailsOnMissingCorpus) {
  auto r = oat({"serve", "--corpus", "/no/such/dir", "--port", "0"});
  EXPECT_EQ(r.code, kFailure);
  EXPECT_NE(r.err.find("corpus directory not found"), std::string::npos);
}

}  // namespace
}  // namespace oat::cli
