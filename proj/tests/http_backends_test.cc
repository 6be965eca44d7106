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
#include "giqa/http_backends.h"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <gtest/gtest.h>

#include "httplib.h"
#include "test_support.h"

namespace giqa {
namespace {

using Kind = BackendError::Kind;
using json = nlohmann::json;

// Local HTTP server on an ephemeral port for the lifetime of the test.
class LocalServer {
 public:
  LocalServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }

  httplib::Server& server() { return server_; }
  std::string Url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

json ChatReply(const std::string& text) {
  return {{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}}};
}

BackendConfig FastConfig(const std::string& endpoint) {
  BackendConfig config;
  config.endpoint = endpoint;
  config.model = "test-model";
  config.timeout_s = 2.0;
  config.max_retries = 3;
  config.initial_backoff = std::chrono::milliseconds(5);
  return config;
}

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

TEST(HttpBackendsTest, CompleterSendsChatRequestAndRetriesRateLimit) {
  LocalServer local;
  std::atomic<int> calls{0};
  std::mutex mu;
  json last_body;
  std::string last_auth;
  local.server().Post("/v1/chat", [&](const httplib::Request& req, httplib::Response& res) {
    if (++calls <= 2) {
      res.status = 429;
      return;
    }
    std::lock_guard lock(mu);
    last_body = json::parse(req.body);
    last_auth = req.get_header_value("Authorization");
    res.set_content(ChatReply("hello").dump(), "application/json");
  });
  ::setenv("GIQA_TEST_KEY", "secret", 1);
  BackendConfig config = FastConfig(local.Url("/v1/chat"));
  config.api_key_env = "GIQA_TEST_KEY";
  config.seed = 42;
  HttpCompleter completer(config);
  EXPECT_EQ(completer.Complete("say hello"), "hello");
  EXPECT_EQ(calls.load(), 3);
  std::lock_guard lock(mu);
  EXPECT_EQ(last_body["model"], "test-model");
  EXPECT_EQ(last_body["temperature"], 0);
  EXPECT_EQ(last_body["seed"], 42);
  EXPECT_EQ(last_body["messages"][0]["content"][0]["text"], "say hello");
  EXPECT_EQ(last_auth, "Bearer secret");
}

TEST(HttpBackendsTest, RateLimitExhaustsRetries) {
  LocalServer local;
  std::atomic<int> calls{0};
  local.server().Post("/c", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 429;
  });
  BackendConfig config = FastConfig(local.Url("/c"));
  config.max_retries = 2;
  HttpCompleter completer(config);
  EXPECT_EQ(ErrorKind([&] { completer.Complete("x"); }), Kind::kRateLimit);
  EXPECT_EQ(calls.load(), 3);
}

TEST(HttpBackendsTest, ClientErrorIsNotRetried) {
  LocalServer local;
  std::atomic<int> calls{0};
  local.server().Post("/c", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 400;
  });
  HttpCompleter completer(FastConfig(local.Url("/c")));
  EXPECT_EQ(ErrorKind([&] { completer.Complete("x"); }), Kind::kTransport);
  EXPECT_EQ(calls.load(), 1);
}

TEST(HttpBackendsTest, TimeoutAfterRetries) {
  LocalServer local;
  std::atomic<int> calls{0};
  local.server().Post("/slow", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    std::this_thread::sleep_for(std::chrono::milliseconds(400));
    res.set_content(ChatReply("late").dump(), "application/json");
  });
  BackendConfig config = FastConfig(local.Url("/slow"));
  config.timeout_s = 0.1;
  config.max_retries = 1;
  HttpCompleter completer(config);
  EXPECT_EQ(ErrorKind([&] { completer.Complete("x"); }), Kind::kTimeout);
  EXPECT_EQ(calls.load(), 2);
}

TEST(HttpBackendsTest, EmptyPromptNeverReachesServer) {
  LocalServer local;
  std::atomic<int> calls{0};
  local.server().Post("/c", [&](const httplib::Request&, httplib::Response&) { ++calls; });
  HttpCompleter completer(FastConfig(local.Url("/c")));
  EXPECT_EQ(ErrorKind([&] { completer.Complete("   "); }), Kind::kPrecondition);
  EXPECT_EQ(calls.load(), 0);
}

TEST(HttpBackendsTest, CancellationAbortsBackoff) {
  LocalServer local;
  local.server().Post("/c", [&](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
  });
  BackendConfig config = FastConfig(local.Url("/c"));
  config.initial_backoff = std::chrono::seconds(30);
  std::stop_source stop;
  HttpCompleter completer(config, stop.get_token());
  std::jthread canceller([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    stop.request_stop();
  });
  const auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(ErrorKind([&] { completer.Complete("x"); }), Kind::kCancelled);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(5));
}

TEST(HttpBackendsTest, UnreachableEndpointIsTransportError) {
  BackendConfig config = FastConfig("http://127.0.0.1:1/none");
  config.max_retries = 0;
  HttpCompleter completer(config);
  EXPECT_EQ(ErrorKind([&] { completer.Complete("x"); }), Kind::kTransport);
}

TEST(HttpBackendsTest, DetectorProtocol) {
  LocalServer local;
  json seen;
  local.server().Post("/detect", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    json reply = {{"detections",
                   {{{"box", {0.1, 0.1, 0.5, 0.5}}, {"score", 0.9}},
                    {{"box", {0.2, 0.2, 0.3, 0.3}}, {"score", 0.1}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  HttpDetector detector(FastConfig(local.Url("/detect")));
  const auto image = ::giqa::testing::FixtureImage().encoded();
  const auto out = detector.Detect(image, "the dog");
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].box, (NormBox{0.1, 0.1, 0.5, 0.5}));
  EXPECT_EQ(seen["phrase"], "the dog");
  EXPECT_DOUBLE_EQ(seen["box_threshold"].get<double>(), 0.35);
  EXPECT_FALSE(seen["image"].get<std::string>().empty());
}

TEST(HttpBackendsTest, VerifierAttachesImageAndJudgeParsesScore) {
  LocalServer local;
  std::string image_url;
  local.server().Post("/chat", [&](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    const auto& content = body["messages"][0]["content"];
    if (content.size() > 1) {
      image_url = content[1]["image_url"]["url"];
      res.set_content(ChatReply("No, it is sharp.").dump(), "application/json");
    } else {
      res.set_content(ChatReply("Score: 4").dump(), "application/json");
    }
  });
  HttpVerifier verifier(FastConfig(local.Url("/chat")));
  const Image image = ::giqa::testing::FixtureImage();
  EXPECT_EQ(verifier.VerifyQuality(image.CropPng({0, 0, 0.5, 0.5}), "Is it blurry?"),
            QualityAnswer::kNo);
  EXPECT_EQ(image_url.rfind("data:image/png;base64,", 0), 0u);
  HttpJudge judge(FastConfig(local.Url("/chat")));
  EXPECT_EQ(judge.JudgeScore("grade"), 4);
  EXPECT_FALSE(judge.deterministic());
}

TEST(HttpBackendsTest, ConfigValidation) {
  BackendConfig config;
  EXPECT_EQ(ErrorKind([&] { config.Validate(); }), Kind::kPrecondition);
  config.endpoint = "localhost:8000";
  EXPECT_EQ(ErrorKind([&] { HttpCompleter c(config); }), Kind::kPrecondition);
  config.endpoint = "https://example.invalid/v1/chat/completions";
  EXPECT_EQ(ErrorKind([&] { HttpCompleter c(config); }), Kind::kPrecondition);
}

}  // namespace
}  // namespace giqa
