/* Copyright 2026 The GIQA Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "giqa/cli.h"

#include <sstream>

#include <gtest/gtest.h>

#include "giqa/bench_eval.h"
#include "giqa/dataset_store.h"
#include "test_support.h"

namespace giqa {
namespace {

using ::giqa::testing::DataDir;
using ::giqa::testing::TempDir;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

// Last line printed on stdout, parsed.
nlohmann::json Summary(const CliRun& run) {
  std::string line, last;
  std::istringstream in(run.out);
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  return nlohmann::json::parse(last);
}

std::string Config() { return (DataDir() / "config.json").string(); }

TEST(CliTest, UsageErrors) {
  EXPECT_EQ(Cli({}).code, kExitUsage);
  EXPECT_EQ(Cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(Cli({"check", "--in", "x.jsonl", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(Cli({"check"}).code, kExitUsage);
  EXPECT_EQ(Cli({"check", "--in", "/nonexistent/x.jsonl"}).code, kExitUsage);
  EXPECT_EQ(Cli({"--help"}).code, kExitOk);
}

TEST(CliTest, AnnotateGenvqaCheckStatsAreDeterministic) {
  TempDir dir("cli");
  std::string first_des, first_vqa;
  for (int run = 0; run < 2; ++run) {
    const std::string des = (dir / ("des" + std::to_string(run) + ".jsonl")).string();
    const std::string vqa = (dir / ("vqa" + std::to_string(run) + ".jsonl")).string();
    const CliRun a = Cli({"annotate", "--manifest", (DataDir() / "manifest.tsv").string(), "--out",
                       des, "--config", Config(), "--workers", run == 0 ? "1" : "4"});
    ASSERT_EQ(a.code, kExitOk) << a.err;
    EXPECT_EQ(Summary(a)["written"], 5);
    const CliRun g = Cli({"genvqa", "--des", des, "--out", vqa, "--config", Config()});
    ASSERT_EQ(g.code, kExitOk) << g.err;
    EXPECT_EQ(Summary(g)["yes"], Summary(g)["no"]);
    EXPECT_EQ(2 * Summary(g)["yes"].get<int>(), Summary(g)["open"].get<int>());
    if (run == 0) {
      first_des = ReadTextFile(des);
      first_vqa = ReadTextFile(vqa);
    } else {
      EXPECT_EQ(ReadTextFile(des), first_des);
      EXPECT_EQ(ReadTextFile(vqa), first_vqa);
    }
    EXPECT_EQ(Cli({"check", "--in", des}).code, kExitOk);
    const CliRun c = Cli({"check", "--in", vqa, "--box-mode", "mixed"});
    EXPECT_EQ(c.code, kExitOk) << c.out;
    EXPECT_EQ(Summary(c)["violations"], 0);
  }
  EXPECT_EQ(first_des.substr(0, first_des.find('\n') + 1),
            ReadTextFile(DataDir() / "golden" / "des_scene1.jsonl"));

  const std::string hist = (dir / "hist.csv").string();
  const CliRun s = Cli({"stats", "--in", (dir / "des0.jsonl").string(), "--hist-out", hist});
  ASSERT_EQ(s.code, kExitOk) << s.err;
  const auto stats = Summary(s)["stats"];
  EXPECT_EQ(stats["total"], 5);
  EXPECT_EQ(stats["DES"], 5);
  EXPECT_EQ(stats["images"], 5);
  const auto samples = ReadJsonl(dir / "des0.jsonl");
  EXPECT_EQ(stats["boxes"], ComputeStats(samples).boxes);
  EXPECT_EQ(ReadTextFile(hist), HistogramCsv(ComputeStats(samples)));
}

TEST(CliTest, CheckReportsViolationsWithExitOne) {
  TempDir dir("check");
  WriteTextFile(dir / "bad.jsonl", "{\"id\": 1}\nnot json\n");
  const CliRun r = Cli({"check", "--in", (dir / "bad.jsonl").string()});
  EXPECT_EQ(r.code, kExitPartialFailure);
  EXPECT_EQ(Summary(r)["violations"], 2);
  EXPECT_NE(r.out.find("\"line\":2"), std::string::npos);
}

TEST(CliTest, StatsStrictRejectsLenientSkips) {
  TempDir dir("stats");
  const std::string good = ReadTextFile(DataDir() / "golden" / "des_scene1.jsonl");
  WriteTextFile(dir / "mixed.jsonl", good + "garbage\n");
  EXPECT_EQ(Cli({"stats", "--in", (dir / "mixed.jsonl").string()}).code, kExitUsage);
  WriteTextFile(dir / "lenient.json", "{\"parse_mode\": \"lenient\"}");
  const CliRun r = Cli({"stats", "--in", (dir / "mixed.jsonl").string(), "--config",
                     (dir / "lenient.json").string()});
  EXPECT_EQ(r.code, kExitPartialFailure);
  EXPECT_EQ(Summary(r)["stats"]["total"], 1);
}

TEST(CliTest, UnreachableBackendFailsRecordsNotTheRun) {
  TempDir dir("http");
  const std::string backend =
      R"({"endpoint": "http://127.0.0.1:1/v1", "model": "m", "max_retries": 0, "timeout_s": 1})";
  WriteTextFile(dir / "config.json", "{\"backends\": {\"completer\": " + backend +
                                         ", \"detector\": " + backend +
                                         ", \"verifier\": " + backend + "}}");
  const CliRun r = Cli({"annotate", "--manifest", (DataDir() / "manifest.tsv").string(), "--out",
                     (dir / "out.jsonl").string(), "--config", (dir / "config.json").string()});
  EXPECT_EQ(r.code, kExitPartialFailure) << r.err;
  EXPECT_EQ(Summary(r)["failures"], 5);
  EXPECT_EQ(ReadTextFile(dir / "out.jsonl"), "");
}

TEST(CliTest, ConfigValidation) {
  EXPECT_THROW(RunConfig::FromJson(nlohmann::json::parse(R"({"sed": 3})")), ConfigError);
  EXPECT_THROW(RunConfig::FromJson(nlohmann::json::parse(R"({"grid": {"n": 0, "m": 20}})")),
               ConfigError);
  EXPECT_THROW(RunConfig::FromJson(nlohmann::json::parse(R"({"seed": "x"})")), ConfigError);
  EXPECT_THROW(RunConfig::FromJson(nlohmann::json::parse(R"({"box_mode": "polar"})")),
               ConfigError);
  const auto config = RunConfig::FromJson(
      nlohmann::json::parse(R"({"grid": {"n": 10, "m": 5}, "seed": 9, "mock_fixtures": "f.json"})"),
      "/base");
  EXPECT_EQ(config.grid.n, 10);
  EXPECT_EQ(config.seed, 9u);
  EXPECT_EQ(config.mock_fixtures, std::filesystem::path("/base/f.json"));
  TempDir dir("config");
  WriteTextFile(dir / "c.json", R"({"workers": 2, "extra": true})");
  EXPECT_EQ(Cli({"check", "--in", (DataDir() / "golden" / "des_scene1.jsonl").string(),
                 "--config", (dir / "c.json").string()})
                .code,
            kExitUsage);
}

TEST(CliTest, EvalMiniBench) {
  TempDir dir("eval");
  const std::string report = (dir / "report.json").string();
  const CliRun r = Cli({"eval", "--bench", (DataDir() / "minibench" / "bench.jsonl").string(),
                     "--responses", (DataDir() / "minibench" / "responses.jsonl").string(),
                     "--report", report, "--mock-judge",
                     (DataDir() / "mock_fixtures.json").string(), "--table"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("GIQA-DES"), std::string::npos);
  const auto j = nlohmann::json::parse(ReadTextFile(report));
  EXPECT_DOUBLE_EQ(j["Acc(Total)"].get<double>(), 0.5625);
  EXPECT_DOUBLE_EQ(j["Tag-Recall"].get<double>(), 0.5);
  EXPECT_NEAR(j["mIoU"].get<double>(), 1.55 / 3, 1e-12);

  const CliRun mismatch =
      Cli({"eval", "--bench", (DataDir() / "minibench" / "bench_full_scale.jsonl").string(),
           "--responses", (DataDir() / "minibench" / "responses.jsonl").string(), "--report",
           report, "--mock-judge", (DataDir() / "mock_fixtures.json").string()});
  EXPECT_EQ(mismatch.code, kExitUsage);
  EXPECT_NE(mismatch.err.find("DES: declared 100, found 2"), std::string::npos);

  const CliRun no_judge = Cli({"eval", "--bench", (DataDir() / "minibench" / "bench.jsonl").string(),
                            "--responses",
                            (DataDir() / "minibench" / "responses.jsonl").string(), "--report",
                            report});
  EXPECT_EQ(no_judge.code, kExitPartialFailure);
  EXPECT_EQ(Summary(no_judge)["judge_failures"], 4);
}

}  // namespace
}  // namespace giqa
