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
#include "giqa/backends.h"

#include <atomic>
#include <chrono>
#include <thread>

#include <gtest/gtest.h>

#include "giqa/mock_backends.h"
#include "giqa/text_util.h"
#include "test_support.h"

namespace giqa {
namespace {

using Kind = BackendError::Kind;
using ::giqa::testing::FixtureImage;

template <typename Fn>
Kind ErrorKind(Fn&& fn) {
  try {
    fn();
  } catch (const BackendError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no BackendError";
  return Kind::kTransport;
}

TEST(ParseTest, JudgeScores) {
  EXPECT_EQ(ParseJudgeScore("Score: 3"), 3);
  EXPECT_EQ(ParseJudgeScore("4 \xe2\x80\x94 fully consistent"), 4);
  EXPECT_EQ(ParseJudgeScore("excellent"), std::nullopt);
  EXPECT_EQ(ParseJudgeScore("3.5 then 2"), 2);
  EXPECT_EQ(ParseJudgeScore("7 out of 10, so 1"), 1);
  EXPECT_EQ(ParseJudgeScore("0"), 0);
}

TEST(ParseTest, QualityAnswers) {
  EXPECT_EQ(ParseQualityAnswer("Yes, it is."), QualityAnswer::kYes);
  EXPECT_EQ(ParseQualityAnswer("no"), QualityAnswer::kNo);
  EXPECT_EQ(ParseQualityAnswer("maybe"), QualityAnswer::kUnparseable);
}

class ScriptedJudge : public Judge {
 public:
  explicit ScriptedJudge(std::vector<std::string> replies)
      : replies_(std::move(replies)) {}
  int calls = 0;

 protected:
  std::string DoAsk(std::string_view) override { return replies_.at(calls++); }

 private:
  std::vector<std::string> replies_;
};

TEST(JudgeTest, RetriesOnceThenFails) {
  ScriptedJudge recovers({"excellent", "Score: 2"});
  EXPECT_EQ(recovers.JudgeScore("rate this"), 2);
  EXPECT_EQ(recovers.calls, 2);
  ScriptedJudge fails({"excellent", "superb", "3"});
  EXPECT_EQ(ErrorKind([&] { fails.JudgeScore("rate this"); }), Kind::kUnparseableScore);
  EXPECT_EQ(fails.calls, 2);
}

class FixedDetector : public Detector {
 public:
  explicit FixedDetector(std::vector<Detection> out) : out_(std::move(out)) {}

 protected:
  std::vector<Detection> DoDetect(std::span<const std::uint8_t>, std::string_view) override {
    return out_;
  }

 private:
  std::vector<Detection> out_;
};

TEST(DetectorTest, ThresholdValidityAndOrder) {
  FixedDetector detector({{{0.1, 0.1, 0.2, 0.2}, 0.5},
                          {{0.3, 0.3, 0.4, 0.4}, 0.2},
                          {{0.5, 0.1, 0.4, 0.2}, 0.9},
                          {{0.0, 0.0, 1.0, 1.0}, 0.8}});
  const auto image = FixtureImage().encoded();
  const auto out = detector.Detect(image, "dog");
  ASSERT_EQ(out.size(), 2u);
  EXPECT_DOUBLE_EQ(out[0].confidence, 0.8);
  EXPECT_DOUBLE_EQ(out[1].confidence, 0.5);
  FixedDetector low({{{0.1, 0.1, 0.2, 0.2}, 0.1}});
  EXPECT_TRUE(low.Detect(image, "dog").empty());
}

TEST(DetectorTest, Preconditions) {
  FixedDetector detector({});
  const auto image = FixtureImage().encoded();
  EXPECT_EQ(ErrorKind([&] { detector.Detect(image, "  "); }), Kind::kPrecondition);
  const Bytes junk = {1, 2, 3, 4};
  EXPECT_EQ(ErrorKind([&] { detector.Detect(junk, "dog"); }), Kind::kUndecodableImage);
}

const char* kFixtures = R"({
  "completer": {"rules": [
    {"contains": ["billiard"], "reply": "the billiard table | clear | positive\nhands | blurry | negative"},
    {"contains": "pick", "reply": ["one", "two", "three"]}
  ]},
  "detector": {"rules": [
    {"phrase": "the man wearing a white t-shirt", "detections": [{"box": [0.1, 0.2, 0.4, 0.9], "score": 0.8}]},
    {"phrase": "man", "detections": [
      {"box": [0.1, 0.2, 0.4, 0.9], "score": 0.7},
      {"box": [0.6, 0.2, 0.9, 0.9], "score": 0.6}]}
  ]},
  "verifier": {"rules": [{"contains": "noisy", "reply": "No"}], "default": "Yes"},
  "judge": {"rules": [{"contains": "always three", "reply": "Score: 3"}], "default": "overlap"}
})";

TEST(MockBackendsTest, CompleterFixtures) {
  const Backends b = MakeMockBackends(nlohmann::json::parse(kFixtures));
  EXPECT_EQ(b.completer->Complete("describe the billiard scene"),
            "the billiard table | clear | positive\nhands | blurry | negative");
  EXPECT_EQ(ErrorKind([&] { b.completer->Complete("nothing matches"); }), Kind::kNoFixture);
  EXPECT_EQ(ErrorKind([&] { b.completer->Complete(""); }), Kind::kPrecondition);
}

TEST(MockBackendsTest, DigestRuleAndListRepliesAreDeterministic) {
  const std::string prompt = "pick a number";
  nlohmann::json fixtures = nlohmann::json::parse(kFixtures);
  fixtures["completer"]["rules"].insert(
      fixtures["completer"]["rules"].begin(),
      nlohmann::json::object({{"digest", Sha256Hex(prompt)}, {"reply", "by digest"}}));
  EXPECT_EQ(MakeMockBackends(fixtures).completer->Complete(prompt), "by digest");

  const Backends a = MakeMockBackends(nlohmann::json::parse(kFixtures), {.seed = 5});
  const Backends b = MakeMockBackends(nlohmann::json::parse(kFixtures), {.seed = 5});
  for (const char* p : {"pick a", "pick b", "pick c", "pick d"}) {
    EXPECT_EQ(a.completer->Complete(p), b.completer->Complete(p));
  }
  // Oracle for the list index: first 8 digest bytes xor seed, modulo size.
  const std::string digest = Sha256Hex("pick b");
  const std::uint64_t index = (std::stoull(digest.substr(0, 16), nullptr, 16) ^ 5) % 3;
  const char* options[] = {"one", "two", "three"};
  EXPECT_EQ(a.completer->Complete("pick b"), options[index]);
}

TEST(MockBackendsTest, DetectorPhraseNarrowsResults) {
  const Backends b = MakeMockBackends(nlohmann::json::parse(kFixtures));
  const auto image = FixtureImage().encoded();
  EXPECT_EQ(b.detector->Detect(image, "The man wearing a white t-shirt").size(), 1u);
  EXPECT_EQ(b.detector->Detect(image, "man").size(), 2u);
  EXPECT_TRUE(b.detector->Detect(image, "cat").empty());
}

TEST(MockBackendsTest, VerifierAndJudge) {
  const Backends b = MakeMockBackends(nlohmann::json::parse(kFixtures));
  const Image image = FixtureImage();
  const Bytes patch = image.CropPng({0.1, 0.1, 0.5, 0.5});
  EXPECT_EQ(b.verifier->VerifyQuality(patch, "Is the image quality noisy?"), QualityAnswer::kNo);
  EXPECT_EQ(b.verifier->VerifyQuality(patch, "Is the image quality sharp?"), QualityAnswer::kYes);
  EXPECT_EQ(b.judge->JudgeScore("always three"), 3);
  EXPECT_TRUE(b.judge->deterministic());
}

TEST(MockBackendsTest, VerifierPatchSizeRule) {
  nlohmann::json fixtures = {
      {"verifier", {{"rules", {{{"patch_size", {32, 24}}, {"reply", "No"}}}}}}};
  const Backends b = MakeMockBackends(fixtures);
  const Image image = FixtureImage();  // 320x240
  EXPECT_EQ(b.verifier->VerifyQuality(image.CropPng({0.0, 0.0, 0.1, 0.1}), "q"),
            QualityAnswer::kNo);
  EXPECT_EQ(b.verifier->VerifyQuality(image.CropPng({0.0, 0.0, 0.2, 0.1}), "q"),
            QualityAnswer::kYes);
}

TEST(MockBackendsTest, OverlapJudge) {
  const std::string same = "### Reference\nblurry hands\n### Candidate\nthe blurry hands\n### End\n";
  EXPECT_EQ(OverlapScore(same), 4);
  const std::string half = "### Reference\nblurry hands\n### Candidate\nblurry\n### End\n";
  EXPECT_EQ(OverlapScore(half), 2);
  const std::string none = "### Reference\nblurry hands\n### Candidate\nsharp sky\n### End\n";
  EXPECT_EQ(OverlapScore(none), 0);
}

class SlowCompleter : public TextCompleter {
 public:
  explicit SlowCompleter(int concurrency) : TextCompleter(concurrency) {}
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};

 protected:
  std::string DoComplete(std::string_view) override {
    const int now = ++in_flight;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(3));
    --in_flight;
    return "ok";
  }
};

TEST(ConcurrencyTest, InFlightNeverExceedsBound) {
  SlowCompleter completer(3);
  std::vector<std::jthread> threads;
  for (int t = 0; t < 16; ++t) {
    threads.emplace_back([&] {
      for (int k = 0; k < 5; ++k) completer.Complete("go");
    });
  }
  threads.clear();
  EXPECT_LE(completer.peak.load(), 3);
  EXPECT_GE(completer.peak.load(), 1);
}

TEST(ConcurrencyTest, RejectsNonPositiveBound) {
  EXPECT_EQ(ErrorKind([] { SlowCompleter c(0); }), Kind::kPrecondition);
}

}  // namespace
}  // namespace giqa
