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

#include <algorithm>
#include <chrono>
#include <initializer_list>
#include <memory>
#include <ostream>
#include <string_view>

#include "CLI11.hpp"
#include "giqa/annotation_pipeline.h"
#include "giqa/bench_eval.h"
#include "giqa/dataset_store.h"
#include "giqa/mock_backends.h"
#include "giqa/parallel.h"
#include "giqa/text_util.h"
#include "giqa/vqa_generator.h"

namespace giqa {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

void CheckKeys(const json& object, std::initializer_list<std::string_view> allowed,
               std::string_view where) {
  if (!object.is_object()) {
    throw ConfigError(std::string(where) + ": expected an object");
  }
  for (const auto& [key, value] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void Read(const json& object, const char* key, T& value, std::string_view where) {
  if (!object.contains(key)) return;
  try {
    value = object[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "." + key + ": wrong type");
  }
}

BackendConfig BackendFromJson(const json& object, std::string_view where) {
  CheckKeys(object,
            {"endpoint", "model", "timeout_s", "max_retries", "concurrency",
             "seed", "api_key_env", "box_threshold", "initial_backoff_ms"},
            where);
  BackendConfig config;
  Read(object, "endpoint", config.endpoint, where);
  Read(object, "model", config.model, where);
  Read(object, "timeout_s", config.timeout_s, where);
  Read(object, "max_retries", config.max_retries, where);
  Read(object, "concurrency", config.concurrency, where);
  Read(object, "seed", config.seed, where);
  Read(object, "api_key_env", config.api_key_env, where);
  Read(object, "box_threshold", config.box_threshold, where);
  std::int64_t backoff_ms = config.initial_backoff.count();
  Read(object, "initial_backoff_ms", backoff_ms, where);
  config.initial_backoff = std::chrono::milliseconds(backoff_ms);
  try {
    config.Validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string(where) + ": " + e.what());
  }
  return config;
}

class Logger {
 public:
  Logger(std::ostream& err, std::string command)
      : err_(err), command_(std::move(command)) {}

  void Error(ojson fields) { Emit("error", std::move(fields)); }
  void Warning(ojson fields) { Emit("warning", std::move(fields)); }

 private:
  void Emit(const char* level, ojson fields) {
    ojson line;
    line["level"] = level;
    line["command"] = command_;
    for (auto& [key, value] : fields.items()) line[key] = value;
    err_ << line.dump() << "\n";
  }

  std::ostream& err_;
  std::string command_;
};

class Timer {
 public:
  std::int64_t ElapsedMs() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct CommonFlags {
  std::string config;
  std::string mock;
  int workers = 0;
};

RunConfig LoadConfig(const CommonFlags& flags) {
  RunConfig config = flags.config.empty() ? RunConfig{} : RunConfig::Load(flags.config);
  if (flags.workers > 0) config.workers = flags.workers;
  return config;
}

MockOptions MockOptionsFor(const RunConfig& config) {
  MockOptions options;
  options.seed = config.seed;
  options.concurrency = std::max(1, config.workers);
  if (config.detector) options.box_threshold = config.detector->box_threshold;
  return options;
}

std::optional<fs::path> MockPath(const RunConfig& config, const CommonFlags& flags) {
  if (!flags.mock.empty()) return fs::path(flags.mock);
  if (!config.mock_fixtures.empty()) return config.mock_fixtures;
  return std::nullopt;
}

Backends LoadMocks(const fs::path& path, const RunConfig& config) {
  try {
    return LoadMockBackends(path, MockOptionsFor(config));
  } catch (const std::exception& e) {
    throw ConfigError("mock fixtures " + path.string() + ": " + e.what());
  }
}

const BackendConfig& Require(const std::optional<BackendConfig>& config,
                             const char* role) {
  if (!config) {
    throw ConfigError(std::string("no backend configured for ") + role +
                      " (set backends." + role + " or use mock fixtures)");
  }
  return *config;
}

Backends MakeBackends(const RunConfig& config, const CommonFlags& flags,
                      bool need_vision, std::stop_token stop) {
  if (const auto path = MockPath(config, flags)) return LoadMocks(*path, config);
  Backends backends;
  backends.completer =
      std::make_shared<HttpCompleter>(Require(config.completer, "completer"), stop);
  if (need_vision) {
    backends.detector =
        std::make_shared<HttpDetector>(Require(config.detector, "detector"), stop);
    backends.verifier =
        std::make_shared<HttpVerifier>(Require(config.verifier, "verifier"), stop);
  }
  return backends;
}

PipelineConfig PipelineFor(const RunConfig& config) {
  PipelineConfig pipeline;
  pipeline.grid = config.grid;
  pipeline.refine = config.refine;
  pipeline.max_boxes_per_object = config.max_boxes_per_object;
  pipeline.seed = config.seed;
  return pipeline;
}

// Input files that cannot be used at all are configuration problems.
template <typename Fn>
auto LoadInput(const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (const SchemaError& e) {
    std::string message = what + " failed validation";
    for (const auto& v : e.violations()) {
      message += "; line " + std::to_string(v.line) + ": " + v.message;
    }
    throw ConfigError(message);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

int RunAnnotate(const CommonFlags& flags, const std::string& manifest,
                const std::string& out_path, std::ostream& out, Logger& log,
                std::stop_token stop) {
  Timer timer;
  const RunConfig config = LoadConfig(flags);
  const Backends backends = MakeBackends(config, flags, true, stop);
  const auto records = LoadInput("manifest", [&] { return ReadManifest(manifest); });
  const auto outcomes = AnnotateAll(records, backends, PipelineFor(config), config.workers);

  std::vector<AnnotatedSample> samples;
  std::size_t failures = 0, warnings = 0;
  for (const auto& outcome : outcomes) {
    const SourceRecord& record = records[outcome.index];
    for (const auto& w : outcome.warnings) {
      log.Warning({{"record", outcome.index + 1}, {"image", record.image}, {"message", w}});
      ++warnings;
    }
    if (outcome.sample) {
      samples.push_back(*outcome.sample);
    } else {
      log.Error({{"record", outcome.index + 1}, {"image", record.image}, {"message", outcome.error}});
      ++failures;
    }
  }
  WriteJsonl(out_path, samples, {config.grid, BoxMode::kGrid});

  ojson summary;
  summary["command"] = "annotate";
  summary["records"] = records.size();
  summary["written"] = samples.size();
  summary["failures"] = failures;
  summary["warnings"] = warnings;
  summary["duration_ms"] = timer.ElapsedMs();
  out << summary.dump() << "\n";
  return failures > 0 ? kExitPartialFailure : kExitOk;
}

int RunGenVqa(const CommonFlags& flags, const std::string& des_path,
              const std::string& out_path, std::ostream& out, Logger& log,
              std::stop_token stop) {
  Timer timer;
  const RunConfig config = LoadConfig(flags);
  const Backends backends = MakeBackends(config, flags, false, stop);
  const StoreOptions store{config.grid, BoxMode::kMixed};
  auto input = LoadInput("DES input", [&] { return ReadJsonl(des_path, store); });
  std::vector<AnnotatedSample> des;
  for (auto& s : input) {
    if (s.task == Task::kDes) {
      des.push_back(std::move(s));
    } else {
      log.Warning({{"id", s.id}, {"message", "not a DES sample, skipped"}});
    }
  }

  std::vector<DesGeneration> generated(des.size());
  std::vector<std::string> errors(des.size());
  ParallelFor(des.size(), config.workers, [&](std::size_t i) {
    try {
      generated[i] = GenerateForDes(des[i], *backends.completer, config.grid,
                                    DeriveSeed(config.seed, des[i].id));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  struct Origin {
    std::size_t des;
    std::size_t k;
  };
  std::vector<VqaSample> pool;
  std::vector<Origin> origin;
  std::size_t failures = 0, warnings = 0;
  for (std::size_t i = 0; i < des.size(); ++i) {
    for (const auto& w : generated[i].warnings) {
      log.Warning({{"id", des[i].id}, {"message", w}});
      ++warnings;
    }
    if (!errors[i].empty()) {
      log.Error({{"id", des[i].id}, {"message", errors[i]}});
      ++failures;
      continue;
    }
    for (std::size_t k = 0; k < generated[i].samples.size(); ++k) {
      pool.push_back(generated[i].samples[k]);
      origin.push_back({i, k});
    }
  }

  std::vector<AnnotatedSample> samples;
  std::size_t yes = 0, no = 0, open = 0;
  for (std::size_t idx : BalanceIndices(pool, DeriveSeed(config.seed, "balance"))) {
    const AnnotatedSample& parent = des[origin[idx].des];
    const std::string id = "vqa-" + parent.id + "-" + std::to_string(origin[idx].k);
    samples.push_back(ToAnnotatedSample(pool[idx], id, parent.metadata.source,
                                        DeriveSeed(config.seed, parent.id),
                                        config.grid));
    if (pool[idx].kind == VqaKind::kW) {
      ++open;
    } else if (pool[idx].subkind == "Yes") {
      ++yes;
    } else {
      ++no;
    }
  }
  WriteJsonl(out_path, samples, store);

  ojson summary;
  summary["command"] = "genvqa";
  summary["des"] = des.size();
  summary["generated"] = pool.size();
  summary["written"] = samples.size();
  summary["yes"] = yes;
  summary["no"] = no;
  summary["open"] = open;
  summary["failures"] = failures;
  summary["warnings"] = warnings;
  summary["duration_ms"] = timer.ElapsedMs();
  out << summary.dump() << "\n";
  return failures > 0 ? kExitPartialFailure : kExitOk;
}

int RunStats(const CommonFlags& flags, const std::string& in_path,
             const std::string& hist_out, std::ostream& out, Logger& log) {
  Timer timer;
  const RunConfig config = LoadConfig(flags);
  const StoreOptions store{config.grid, BoxMode::kMixed};
  const std::string content = LoadInput("input", [&] { return ReadTextFile(in_path); });
  std::vector<AnnotatedSample> samples;
  std::size_t failures = 0;
  if (config.parse_mode == ParseMode::kStrict) {
    samples = LoadInput("input", [&] { return ParseJsonl(content, store); });
  } else {
    const auto lines = SplitLines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (Trim(lines[i]).empty()) continue;
      try {
        auto parsed = ParseJsonl(lines[i], store);
        samples.insert(samples.end(), parsed.begin(), parsed.end());
      } catch (const SchemaError& e) {
        log.Error({{"line", i + 1}, {"message", e.violations().front().message}});
        ++failures;
      }
    }
  }
  const DatasetStats stats = ComputeStats(samples, config.grid);
  if (!hist_out.empty()) WriteTextFile(hist_out, HistogramCsv(stats));

  ojson summary;
  summary["command"] = "stats";
  summary["stats"] = ToJson(stats);
  summary["failures"] = failures;
  summary["duration_ms"] = timer.ElapsedMs();
  out << summary.dump() << "\n";
  return failures > 0 ? kExitPartialFailure : kExitOk;
}

int RunCheck(const CommonFlags& flags, const std::string& in_path,
             const std::string& box_mode, std::ostream& out) {
  Timer timer;
  const RunConfig config = LoadConfig(flags);
  StoreOptions store{config.grid, config.box_mode};
  if (box_mode == "grid") store.box_mode = BoxMode::kGrid;
  if (box_mode == "norm") store.box_mode = BoxMode::kNorm;
  if (box_mode == "mixed") store.box_mode = BoxMode::kMixed;
  const std::string content = LoadInput("input", [&] { return ReadTextFile(in_path); });
  const auto violations = CheckJsonl(content, store);
  for (const auto& v : violations) {
    ojson line;
    line["line"] = v.line;
    line["message"] = v.message;
    out << line.dump() << "\n";
  }
  std::size_t lines = 0;
  for (const auto& line : SplitLines(content)) lines += !Trim(line).empty();

  ojson summary;
  summary["command"] = "check";
  summary["lines"] = lines;
  summary["violations"] = violations.size();
  summary["duration_ms"] = timer.ElapsedMs();
  out << summary.dump() << "\n";
  return violations.empty() ? kExitOk : kExitPartialFailure;
}

std::shared_ptr<Judge> MakeJudge(const RunConfig& config, const std::string& endpoint,
                                 const std::string& mock_judge,
                                 const CommonFlags& flags, std::stop_token stop) {
  if (!mock_judge.empty()) return LoadMocks(mock_judge, config).judge;
  if (!endpoint.empty()) {
    BackendConfig judge = config.judge.value_or(BackendConfig{});
    judge.endpoint = endpoint;
    try {
      judge.Validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("judge endpoint: ") + e.what());
    }
    return std::make_shared<HttpJudge>(judge, stop);
  }
  if (config.judge) return std::make_shared<HttpJudge>(*config.judge, stop);
  if (const auto path = MockPath(config, flags)) return LoadMocks(*path, config).judge;
  return nullptr;
}

int RunEval(const CommonFlags& flags, const std::string& bench_path,
            const std::string& responses_path, const std::string& report_path,
            const std::string& endpoint, const std::string& mock_judge,
            bool table, std::ostream& out, Logger& log, std::stop_token stop) {
  Timer timer;
  const RunConfig config = LoadConfig(flags);
  const auto judge = MakeJudge(config, endpoint, mock_judge, flags, stop);
  Bench bench;
  try {
    bench = LoadBench(bench_path, config.grid);
  } catch (const BenchError& e) {
    for (const auto& d : e.diagnostics()) log.Error({{"bench", bench_path}, {"message", d}});
    throw ConfigError("benchmark rejected: " + bench_path);
  } catch (const std::exception& e) {
    throw ConfigError("benchmark " + bench_path + ": " + e.what());
  }
  const auto responses = LoadInput("responses", [&] {
    return ParseResponses(ReadTextFile(responses_path));
  });

  const EvalReport report =
      Evaluate(bench.items, responses, judge.get(), config.grid, config.workers);
  for (const auto& item : report.items) {
    if (!item.error.empty()) log.Error({{"id", item.id}, {"message", item.error}});
  }
  WriteTextFile(report_path, ToJson(report).dump(2) + "\n");
  if (table) out << FormatReportTable(report);

  ojson summary;
  summary["command"] = "eval";
  summary["items"] = bench.items.size();
  summary["judge_failures"] = report.judge_failures;
  summary["missing_responses"] = report.missing_responses;
  summary["duration_ms"] = timer.ElapsedMs();
  out << summary.dump() << "\n";
  return report.judge_failures > 0 ? kExitPartialFailure : kExitOk;
}

}  // namespace

RunConfig RunConfig::FromJson(const json& object, const fs::path& base_dir) {
  CheckKeys(object,
            {"grid", "refine", "max_boxes_per_object", "seed", "workers",
             "parse_mode", "box_mode", "mock_fixtures", "backends"},
            "config");
  RunConfig config;
  if (object.contains("grid")) {
    const json& grid = object["grid"];
    CheckKeys(grid, {"n", "m"}, "grid");
    Read(grid, "n", config.grid.n, "grid");
    Read(grid, "m", config.grid.m, "grid");
  }
  if (object.contains("refine")) {
    const json& refine = object["refine"];
    CheckKeys(refine, {"area_threshold", "coverage_threshold", "filter_min_candidates"},
              "refine");
    Read(refine, "area_threshold", config.refine.area_threshold, "refine");
    Read(refine, "coverage_threshold", config.refine.coverage_threshold, "refine");
    Read(refine, "filter_min_candidates", config.refine.filter_min_candidates, "refine");
  }
  Read(object, "max_boxes_per_object", config.max_boxes_per_object, "config");
  Read(object, "seed", config.seed, "config");
  Read(object, "workers", config.workers, "config");

  std::string parse_mode = "strict";
  Read(object, "parse_mode", parse_mode, "config");
  if (parse_mode == "strict") {
    config.parse_mode = ParseMode::kStrict;
  } else if (parse_mode == "lenient") {
    config.parse_mode = ParseMode::kLenient;
  } else {
    throw ConfigError("parse_mode must be strict or lenient");
  }
  std::string box_mode = "grid";
  Read(object, "box_mode", box_mode, "config");
  if (box_mode == "grid") {
    config.box_mode = BoxMode::kGrid;
  } else if (box_mode == "norm") {
    config.box_mode = BoxMode::kNorm;
  } else if (box_mode == "mixed") {
    config.box_mode = BoxMode::kMixed;
  } else {
    throw ConfigError("box_mode must be grid, norm or mixed");
  }
  std::string mock;
  Read(object, "mock_fixtures", mock, "config");
  if (!mock.empty()) config.mock_fixtures = base_dir / mock;

  if (object.contains("backends")) {
    const json& backends = object["backends"];
    CheckKeys(backends, {"completer", "detector", "verifier", "judge"}, "backends");
    auto role = [&](const char* name, std::optional<BackendConfig>& slot) {
      if (backends.contains(name)) {
        slot = BackendFromJson(backends[name], std::string("backends.") + name);
      }
    };
    role("completer", config.completer);
    role("detector", config.detector);
    role("verifier", config.verifier);
    role("judge", config.judge);
  }

  try {
    config.grid.Validate();
    config.refine.Validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (config.max_boxes_per_object == 0) {
    throw ConfigError("max_boxes_per_object must be positive");
  }
  if (config.workers < 1) throw ConfigError("workers must be positive");
  return config;
}

RunConfig RunConfig::Load(const fs::path& path) {
  json object;
  try {
    object = json::parse(ReadTextFile(path));
  } catch (const std::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return FromJson(object, path.parent_path());
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err, std::stop_token stop) {
  CLI::App app{"Grounded image quality dataset toolkit", "giqa"};
  app.require_subcommand(1);
  CommonFlags flags;
  auto common = [&flags](CLI::App* sub, bool mock) {
    sub->add_option("--config", flags.config, "Run configuration (JSON)")
        ->check(CLI::ExistingFile);
    sub->add_option("--workers", flags.workers, "Override the worker count")
        ->check(CLI::PositiveNumber);
    if (mock) {
      sub->add_option("--mock", flags.mock, "Mock backend fixtures (JSON)")
          ->check(CLI::ExistingFile);
    }
  };

  std::string manifest, out_path, in_path, hist_out, bench, responses, report,
      endpoint, mock_judge, box_mode;
  bool table = false;

  CLI::App* annotate = app.add_subcommand("annotate", "Build DES samples from a manifest");
  annotate->add_option("--manifest", manifest, "image<TAB>description[<TAB>source]")
      ->required();
  annotate->add_option("--out", out_path, "Output JSONL")->required();
  common(annotate, true);

  CLI::App* genvqa = app.add_subcommand("genvqa", "Generate VQA samples from DES samples");
  genvqa->add_option("--des", in_path, "DES JSONL")->required();
  genvqa->add_option("--out", out_path, "Output JSONL")->required();
  common(genvqa, true);

  CLI::App* stats = app.add_subcommand("stats", "Dataset statistics");
  stats->add_option("--in", in_path, "Dataset JSONL")->required();
  stats->add_option("--hist-out", hist_out, "Box area histogram CSV");
  common(stats, false);

  CLI::App* eval = app.add_subcommand("eval", "Score responses on a benchmark");
  eval->add_option("--bench", bench, "Benchmark JSONL")->required();
  eval->add_option("--responses", responses, "Responses JSONL")->required();
  eval->add_option("--report", report, "Report JSON")->required();
  auto* judge_endpoint =
      eval->add_option("--judge-endpoint", endpoint, "Chat completions URL of the judge");
  eval->add_option("--mock-judge", mock_judge, "Mock judge fixtures (JSON)")
      ->check(CLI::ExistingFile)
      ->excludes(judge_endpoint);
  eval->add_flag("--table", table, "Print a results table");
  common(eval, false);

  CLI::App* check = app.add_subcommand("check", "Strictly validate a dataset JSONL");
  check->add_option("--in", in_path, "Dataset JSONL")->required();
  check->add_option("--box-mode", box_mode, "grid, norm or mixed")
      ->check(CLI::IsMember({"grid", "norm", "mixed"}));
  common(check, false);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  Logger log(err, command);
  try {
    if (command == "annotate") {
      return RunAnnotate(flags, manifest, out_path, out, log, stop);
    }
    if (command == "genvqa") return RunGenVqa(flags, in_path, out_path, out, log, stop);
    if (command == "stats") return RunStats(flags, in_path, hist_out, out, log);
    if (command == "check") return RunCheck(flags, in_path, box_mode, out);
    return RunEval(flags, bench, responses, report, endpoint, mock_judge, table,
                   out, log, stop);
  } catch (const ConfigError& e) {
    log.Error({{"message", e.what()}});
    return kExitUsage;
  } catch (const std::exception& e) {
    log.Error({{"message", e.what()}});
    return kExitUsage;
  }
}

}  // namespace giqa
