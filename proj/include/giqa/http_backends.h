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

// HTTP clients for live model servers.
//
// Completer, verifier and judge speak a chat-completions protocol:
//   POST {"model", "temperature": 0, "seed", "messages": [{"role": "user",
//         "content": [{"type": "text", "text": ...},
//                     {"type": "image_url", "image_url":
//                        {"url": "data:image/png;base64,..."}}]}]}
//   reply: {"choices": [{"message": {"content": "..."}}]}
//
// The detector speaks:
//   POST {"image": base64, "phrase": ..., "box_threshold": ...}
//   reply: {"detections": [{"box": [x1, y1, x2, y2], "score": ...}]}
//
// Transport failures, timeouts, 429 and 5xx are retried with exponential
// backoff; other HTTP errors fail immediately.

#ifndef GIQA_HTTP_BACKENDS_H_
#define GIQA_HTTP_BACKENDS_H_

#include <chrono>
#include <cstdint>
#include <optional>
#include <stop_token>
#include <string>

#include "giqa/backends.h"
#include "json.hpp"

namespace giqa {

struct BackendConfig {
  std::string endpoint;  // e.g. http://localhost:8000/v1/chat/completions
  std::string model;
  double timeout_s = 60.0;
  int max_retries = 3;
  int concurrency = 4;
  std::uint64_t seed = 0;
  // Name of the environment variable holding the bearer token, if any.
  std::string api_key_env;
  double box_threshold = Detector::kDefaultBoxThreshold;
  std::chrono::milliseconds initial_backoff{250};

  void Validate() const;
};

// Shared POST-with-retries transport.
class JsonHttpClient {
 public:
  JsonHttpClient(BackendConfig config, std::stop_token stop = {});

  nlohmann::json Post(const nlohmann::json& body);
  const BackendConfig& config() const { return config_; }

 private:
  BackendConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  std::stop_token stop_;
};

nlohmann::json ChatRequest(const BackendConfig& config, std::string_view text,
                           std::optional<std::span<const std::uint8_t>> image);
std::string ChatReplyText(const nlohmann::json& reply);

class HttpCompleter : public TextCompleter {
 public:
  explicit HttpCompleter(BackendConfig config, std::stop_token stop = {});

 protected:
  std::string DoComplete(std::string_view prompt) override;

 private:
  JsonHttpClient client_;
};

class HttpDetector : public Detector {
 public:
  explicit HttpDetector(BackendConfig config, std::stop_token stop = {});

 protected:
  std::vector<Detection> DoDetect(std::span<const std::uint8_t> image,
                                  std::string_view phrase) override;

 private:
  JsonHttpClient client_;
};

class HttpVerifier : public QualityVerifier {
 public:
  explicit HttpVerifier(BackendConfig config, std::stop_token stop = {});

 protected:
  std::string DoAsk(std::span<const std::uint8_t> patch,
                    std::string_view question) override;

 private:
  JsonHttpClient client_;
};

class HttpJudge : public Judge {
 public:
  explicit HttpJudge(BackendConfig config, std::stop_token stop = {});

 protected:
  std::string DoAsk(std::string_view instruction) override;

 private:
  JsonHttpClient client_;
};

}  // namespace giqa

#endif  // GIQA_HTTP_BACKENDS_H_
