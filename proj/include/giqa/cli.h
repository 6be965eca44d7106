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
// The `giqa` command line: annotate, genvqa, stats, eval and check.
//
// Run configuration (JSON, every key optional, unknown keys rejected):
//
//   {"grid": {"n": 20, "m": 20},
//    "refine": {"area_threshold": 0.256, "coverage_threshold": 0.95,
//               "filter_min_candidates": 2},
//    "max_boxes_per_object": 4,
//    "seed": 0,
//    "workers": 4,
//    "parse_mode": "strict" | "lenient",
//    "box_mode": "grid" | "norm" | "mixed",
//    "mock_fixtures": "fixtures.json",          (relative to the config file)
//    "backends": {"completer": {...}, "detector": {...},
//                 "verifier": {...}, "judge": {...}}}
//
// A backend entry holds "endpoint", "model", "timeout_s", "max_retries",
// "concurrency", "seed", "api_key_env", "box_threshold" and
// "initial_backoff_ms". Secrets are only read from the environment variable
// named by "api_key_env".

#ifndef GIQA_CLI_H_
#define GIQA_CLI_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <vector>

#include "giqa/box_refine.h"
#include "giqa/coord_codec.h"
#include "giqa/grounded_text.h"
#include "giqa/http_backends.h"
#include "json.hpp"

namespace giqa {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartialFailure = 1;
inline constexpr int kExitUsage = 2;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  GridSpec grid;
  RefineConfig refine;
  std::size_t max_boxes_per_object = 4;
  std::uint64_t seed = 0;
  int workers = 4;
  ParseMode parse_mode = ParseMode::kStrict;
  BoxMode box_mode = BoxMode::kGrid;
  std::filesystem::path mock_fixtures;
  std::optional<BackendConfig> completer;
  std::optional<BackendConfig> detector;
  std::optional<BackendConfig> verifier;
  std::optional<BackendConfig> judge;

  // Relative paths inside `object` resolve against `base_dir`. Throws
  // ConfigError on unknown keys, wrong types or invalid values.
  static RunConfig FromJson(const nlohmann::json& object,
                            const std::filesystem::path& base_dir = {});
  static RunConfig Load(const std::filesystem::path& path);
};

// `args` excludes the program name. Returns the process exit code.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err, std::stop_token stop = {});

}  // namespace giqa

#endif  // GIQA_CLI_H_
