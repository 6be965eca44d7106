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

// Deterministic fixture-driven backends. Every reply is a pure function of
// (role, request content, seed), so runs against mocks are reproducible
// byte for byte.
//
// Fixture file layout (JSON), one object per role, each with ordered rules;
// the first matching rule wins:
//
//   {
//     "completer": {"rules": [{"contains": ["..."], "reply": "..."},
//                             {"digest": "<sha256 of prompt>", "reply": [..]}]},
//     "detector":  {"rules": [{"phrase": "hands", "detections":
//                             [{"box": [x1, y1, x2, y2], "score": 0.9}]}]},
//     "verifier":  {"rules": [{"contains": "blurry", "patch_size": [w, h],
//                             "reply": "No"}], "default": "Yes"},
//     "judge":     {"rules": [{"contains": ["..."], "reply": "3"}],
//                   "default": "overlap"}
//   }
//
// A reply given as a list is indexed by the request digest mixed with the
// seed. The judge default "overlap" scores round(4 * Jaccard) of the content
// tokens of the candidate and reference blocks of the instruction.

#ifndef GIQA_MOCK_BACKENDS_H_
#define GIQA_MOCK_BACKENDS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "giqa/backends.h"
#include "json.hpp"

namespace giqa {

struct MockOptions {
  std::uint64_t seed = 0;
  int concurrency = 8;
  double box_threshold = Detector::kDefaultBoxThreshold;
};

class MockCompleter : public TextCompleter {
 public:
  MockCompleter(nlohmann::json rules, MockOptions options);

 protected:
  std::string DoComplete(std::string_view prompt) override;

 private:
  nlohmann::json rules_;
  std::uint64_t seed_;
};

class MockDetector : public Detector {
 public:
  MockDetector(nlohmann::json rules, MockOptions options);

 protected:
  std::vector<Detection> DoDetect(std::span<const std::uint8_t> image,
                                  std::string_view phrase) override;

 private:
  nlohmann::json rules_;
};

class MockVerifier : public QualityVerifier {
 public:
  MockVerifier(nlohmann::json rules, std::string default_reply,
               MockOptions options);

 protected:
  std::string DoAsk(std::span<const std::uint8_t> patch,
                    std::string_view question) override;

 private:
  nlohmann::json rules_;
  std::string default_reply_;
  std::uint64_t seed_;
};

class MockJudge : public Judge {
 public:
  MockJudge(nlohmann::json rules, std::string default_reply,
            MockOptions options);

  bool deterministic() const override { return true; }

 protected:
  std::string DoAsk(std::string_view instruction) override;

 private:
  nlohmann::json rules_;
  std::string default_reply_;
  std::uint64_t seed_;
};

// Replays a fixed sequence of replies in call order. Test helper for
// scripted filter traces; not safe to share between threads.
class ScriptedVerifier : public QualityVerifier {
 public:
  explicit ScriptedVerifier(std::vector<std::string> replies)
      : replies_(std::move(replies)) {}

  std::size_t calls() const { return next_; }

 protected:
  std::string DoAsk(std::span<const std::uint8_t> patch,
                    std::string_view question) override;

 private:
  std::vector<std::string> replies_;
  std::size_t next_ = 0;
};

// Heuristic judge score used by the "overlap" default.
int OverlapScore(std::string_view instruction);

Backends MakeMockBackends(const nlohmann::json& fixtures,
                          const MockOptions& options = {});
Backends LoadMockBackends(const std::filesystem::path& path,
                          const MockOptions& options = {});

}  // namespace giqa

#endif  // GIQA_MOCK_BACKENDS_H_
