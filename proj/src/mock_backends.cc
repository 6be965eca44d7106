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
#include "giqa/mock_backends.h"

#include <cmath>
#include <fstream>
#include <set>

#include <opencv2/imgcodecs.hpp>

#include "giqa/text_util.h"

namespace giqa {
namespace {

using json = nlohmann::json;

std::uint64_t DigestPrefix(const std::string& hex) {
  return std::stoull(hex.substr(0, 16), nullptr, 16);
}

// All "contains" needles (string or list) must occur in `text`.
bool ContainsAll(const json& rule, std::string_view text) {
  if (!rule.contains("contains")) return true;
  const json& c = rule["contains"];
  if (c.is_string()) {
    return text.find(c.get<std::string>()) != std::string_view::npos;
  }
  for (const auto& needle : c) {
    if (text.find(needle.get<std::string>()) == std::string_view::npos) {
      return false;
    }
  }
  return true;
}

bool DigestMatches(const json& rule, const std::string& digest) {
  return !rule.contains("digest") || rule["digest"].get<std::string>() == digest;
}

std::string PickReply(const json& reply, const std::string& digest,
                      std::uint64_t seed) {
  if (reply.is_string()) return reply.get<std::string>();
  if (!reply.is_array() || reply.empty()) {
    throw BackendError(BackendError::Kind::kNoFixture,
                       "mock reply must be a string or nonempty list");
  }
  const std::uint64_t index = (DigestPrefix(digest) ^ seed) % reply.size();
  return reply[index].get<std::string>();
}

json RulesOf(const json& role) {
  if (role.is_object() && role.contains("rules")) return role["rules"];
  return json::array();
}

std::string DefaultOf(const json& role, const std::string& fallback) {
  if (role.is_object() && role.contains("default")) {
    return role["default"].get<std::string>();
  }
  return fallback;
}

std::string Block(std::string_view text, std::string_view header) {
  const std::size_t start = text.find(header);
  if (start == std::string_view::npos) return {};
  const std::size_t body = start + header.size();
  std::size_t end = text.find("###", body);
  if (end == std::string_view::npos) end = text.size();
  return Trim(text.substr(body, end - body));
}

}  // namespace

int OverlapScore(std::string_view instruction) {
  const auto cand = ContentTokens(Block(instruction, kJudgeCandidateHeader));
  const auto ref = ContentTokens(Block(instruction, kJudgeReferenceHeader));
  const std::set<std::string> a(cand.begin(), cand.end());
  const std::set<std::string> b(ref.begin(), ref.end());
  if (a.empty() && b.empty()) return 4;
  std::size_t shared = 0;
  for (const auto& t : a) shared += b.count(t);
  const double jaccard =
      static_cast<double>(shared) / static_cast<double>(a.size() + b.size() - shared);
  return static_cast<int>(std::lround(4.0 * jaccard));
}

MockCompleter::MockCompleter(json rules, MockOptions options)
    : TextCompleter(options.concurrency),
      rules_(std::move(rules)),
      seed_(options.seed) {}

std::string MockCompleter::DoComplete(std::string_view prompt) {
  const std::string digest = Sha256Hex(prompt);
  for (const auto& rule : rules_) {
    if (DigestMatches(rule, digest) && ContainsAll(rule, prompt)) {
      return PickReply(rule.at("reply"), digest, seed_);
    }
  }
  throw BackendError(BackendError::Kind::kNoFixture,
                     "no completer fixture for prompt digest " + digest);
}

MockDetector::MockDetector(json rules, MockOptions options)
    : Detector(options.box_threshold, options.concurrency),
      rules_(std::move(rules)) {}

std::vector<Detection> MockDetector::DoDetect(
    std::span<const std::uint8_t> image, std::string_view phrase) {
  const std::string image_digest = Sha256Hex(image);
  const std::string wanted = ToLower(Trim(phrase));
  for (const auto& rule : rules_) {
    if (rule.contains("phrase") &&
        ToLower(rule["phrase"].get<std::string>()) != wanted) {
      continue;
    }
    if (rule.contains("image_digest") &&
        rule["image_digest"].get<std::string>() != image_digest) {
      continue;
    }
    std::vector<Detection> out;
    for (const auto& d : rule.value("detections", json::array())) {
      const auto& b = d.at("box");
      out.push_back({NormBox{b.at(0).get<double>(), b.at(1).get<double>(),
                             b.at(2).get<double>(), b.at(3).get<double>()},
                     d.at("score").get<double>()});
    }
    return out;
  }
  return {};
}

MockVerifier::MockVerifier(json rules, std::string default_reply,
                           MockOptions options)
    : QualityVerifier(options.concurrency),
      rules_(std::move(rules)),
      default_reply_(std::move(default_reply)),
      seed_(options.seed) {}

std::string MockVerifier::DoAsk(std::span<const std::uint8_t> patch,
                                std::string_view question) {
  const std::string digest =
      Sha256Hex(Sha256Hex(patch) + "\n" + std::string(question));
  int width = -1;
  int height = -1;
  for (const auto& rule : rules_) {
    if (!ContainsAll(rule, question)) continue;
    if (rule.contains("patch_size")) {
      if (width < 0) {
        cv::Mat buf(1, static_cast<int>(patch.size()), CV_8UC1,
                    const_cast<std::uint8_t*>(patch.data()));
        const cv::Mat decoded = cv::imdecode(buf, cv::IMREAD_UNCHANGED);
        width = decoded.cols;
        height = decoded.rows;
      }
      if (rule["patch_size"].at(0).get<int>() != width ||
          rule["patch_size"].at(1).get<int>() != height) {
        continue;
      }
    }
    return PickReply(rule.at("reply"), digest, seed_);
  }
  return default_reply_;
}

MockJudge::MockJudge(json rules, std::string default_reply,
                     MockOptions options)
    : Judge(options.concurrency),
      rules_(std::move(rules)),
      default_reply_(std::move(default_reply)),
      seed_(options.seed) {}

std::string MockJudge::DoAsk(std::string_view instruction) {
  const std::string digest = Sha256Hex(instruction);
  for (const auto& rule : rules_) {
    if (DigestMatches(rule, digest) && ContainsAll(rule, instruction)) {
      return PickReply(rule.at("reply"), digest, seed_);
    }
  }
  if (default_reply_ == "overlap") {
    return "Score: " + std::to_string(OverlapScore(instruction));
  }
  return default_reply_;
}

std::string ScriptedVerifier::DoAsk(std::span<const std::uint8_t>,
                                    std::string_view) {
  if (next_ >= replies_.size()) {
    throw BackendError(BackendError::Kind::kNoFixture,
                       "scripted verifier ran out of replies");
  }
  return replies_[next_++];
}

Backends MakeMockBackends(const json& fixtures, const MockOptions& options) {
  const json empty = json::object();
  const json& completer = fixtures.contains("completer") ? fixtures["completer"] : empty;
  const json& detector = fixtures.contains("detector") ? fixtures["detector"] : empty;
  const json& verifier = fixtures.contains("verifier") ? fixtures["verifier"] : empty;
  const json& judge = fixtures.contains("judge") ? fixtures["judge"] : empty;
  Backends backends;
  backends.completer =
      std::make_shared<MockCompleter>(RulesOf(completer), options);
  backends.detector = std::make_shared<MockDetector>(RulesOf(detector), options);
  backends.verifier = std::make_shared<MockVerifier>(
      RulesOf(verifier), DefaultOf(verifier, "Yes"), options);
  backends.judge = std::make_shared<MockJudge>(
      RulesOf(judge), DefaultOf(judge, "overlap"), options);
  return backends;
}

Backends LoadMockBackends(const std::filesystem::path& path,
                          const MockOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mock fixtures " + path.string());
  return MakeMockBackends(json::parse(in), options);
}

}  // namespace giqa
