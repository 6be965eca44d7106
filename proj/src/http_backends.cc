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

#include <condition_variable>
#include <cstdlib>
#include <mutex>

#include "httplib.h"
#include "giqa/text_util.h"

namespace giqa {
namespace {

using json = nlohmann::json;
using Kind = BackendError::Kind;

// Sleeps for `delay` unless `stop` is requested first. Returns false when
// cancelled.
bool InterruptibleSleep(std::chrono::milliseconds delay,
                        const std::stop_token& stop) {
  std::mutex mu;
  std::condition_variable_any cv;
  std::unique_lock lock(mu);
  return !cv.wait_for(lock, stop, delay, [] { return false; });
}

Kind KindOfTransportError(httplib::Error error) {
  switch (error) {
    case httplib::Error::Read:
    case httplib::Error::ConnectionTimeout:
      return Kind::kTimeout;
    case httplib::Error::Canceled:
      return Kind::kCancelled;
    default:
      return Kind::kTransport;
  }
}

}  // namespace

void BackendConfig::Validate() const {
  if (endpoint.empty()) {
    throw BackendError(Kind::kPrecondition, "backend endpoint is empty");
  }
  if (!(timeout_s > 0.0)) {
    throw BackendError(Kind::kPrecondition, "timeout must be positive");
  }
  if (max_retries < 0) {
    throw BackendError(Kind::kPrecondition, "max_retries must be >= 0");
  }
  if (concurrency < 1) {
    throw BackendError(Kind::kPrecondition, "concurrency must be >= 1");
  }
}

JsonHttpClient::JsonHttpClient(BackendConfig config, std::stop_token stop)
    : config_(std::move(config)), stop_(std::move(stop)) {
  config_.Validate();
  const std::size_t scheme = config_.endpoint.find("://");
  if (scheme == std::string::npos) {
    throw BackendError(Kind::kPrecondition,
                       "endpoint must include a scheme: " + config_.endpoint);
  }
  if (config_.endpoint.substr(0, scheme) != "http") {
    throw BackendError(Kind::kPrecondition,
                       "only http:// endpoints are supported: " + config_.endpoint);
  }
  const std::size_t slash = config_.endpoint.find('/', scheme + 3);
  scheme_host_port_ = config_.endpoint.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : config_.endpoint.substr(slash);
}

json JsonHttpClient::Post(const json& body) {
  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config_.timeout_s));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  const std::string payload = body.dump();

  Kind last_kind = Kind::kTransport;
  std::string last_error;
  auto backoff = config_.initial_backoff;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (stop_.stop_requested()) {
      throw BackendError(Kind::kCancelled, "request cancelled");
    }
    if (attempt > 0) {
      if (!InterruptibleSleep(backoff, stop_)) {
        throw BackendError(Kind::kCancelled, "request cancelled during backoff");
      }
      backoff *= 2;
    }
    auto result = client.Post(path_, headers, payload, "application/json");
    if (!result) {
      last_kind = KindOfTransportError(result.error());
      last_error = httplib::to_string(result.error());
      if (last_kind == Kind::kCancelled) break;
      continue;
    }
    const int status = result->status;
    if (status == 429) {
      last_kind = Kind::kRateLimit;
      last_error = "HTTP 429";
      continue;
    }
    if (status >= 500) {
      last_kind = Kind::kTransport;
      last_error = "HTTP " + std::to_string(status);
      continue;
    }
    if (status != 200) {
      throw BackendError(Kind::kTransport,
                         "HTTP " + std::to_string(status) + " from " +
                             config_.endpoint);
    }
    try {
      return json::parse(result->body);
    } catch (const json::exception& e) {
      throw BackendError(Kind::kTransport,
                         std::string("malformed JSON reply: ") + e.what());
    }
  }
  throw BackendError(last_kind, std::string(BackendErrorKindName(last_kind)) +
                                    " after " +
                                    std::to_string(config_.max_retries + 1) +
                                    " attempts to " + config_.endpoint + ": " +
                                    last_error);
}

json ChatRequest(const BackendConfig& config, std::string_view text,
                 std::optional<std::span<const std::uint8_t>> image) {
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", std::string(text)}});
  if (image) {
    content.push_back(
        {{"type", "image_url"},
         {"image_url",
          {{"url", "data:image/png;base64," + Base64Encode(*image)}}}});
  }
  return {{"model", config.model},
          {"temperature", 0},
          {"seed", config.seed},
          {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
}

std::string ChatReplyText(const json& reply) {
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(Kind::kTransport,
                       std::string("unexpected chat reply shape: ") + e.what());
  }
}

HttpCompleter::HttpCompleter(BackendConfig config, std::stop_token stop)
    : TextCompleter(config.concurrency), client_(std::move(config), std::move(stop)) {}

std::string HttpCompleter::DoComplete(std::string_view prompt) {
  return ChatReplyText(
      client_.Post(ChatRequest(client_.config(), prompt, std::nullopt)));
}

HttpDetector::HttpDetector(BackendConfig config, std::stop_token stop)
    : Detector(config.box_threshold, config.concurrency),
      client_(std::move(config), std::move(stop)) {}

std::vector<Detection> HttpDetector::DoDetect(
    std::span<const std::uint8_t> image, std::string_view phrase) {
  const json reply = client_.Post({{"image", Base64Encode(image)},
                                   {"phrase", std::string(phrase)},
                                   {"box_threshold", box_threshold()}});
  std::vector<Detection> out;
  try {
    for (const auto& d : reply.at("detections")) {
      const auto& b = d.at("box");
      out.push_back({NormBox{b.at(0).get<double>(), b.at(1).get<double>(),
                             b.at(2).get<double>(), b.at(3).get<double>()},
                     d.at("score").get<double>()});
    }
  } catch (const json::exception& e) {
    throw BackendError(Kind::kTransport,
                       std::string("unexpected detector reply shape: ") + e.what());
  }
  return out;
}

HttpVerifier::HttpVerifier(BackendConfig config, std::stop_token stop)
    : QualityVerifier(config.concurrency),
      client_(std::move(config), std::move(stop)) {}

std::string HttpVerifier::DoAsk(std::span<const std::uint8_t> patch,
                                std::string_view question) {
  return ChatReplyText(client_.Post(ChatRequest(client_.config(), question, patch)));
}

HttpJudge::HttpJudge(BackendConfig config, std::stop_token stop)
    : Judge(config.concurrency), client_(std::move(config), std::move(stop)) {}

std::string HttpJudge::DoAsk(std::string_view instruction) {
  return ChatReplyText(
      client_.Post(ChatRequest(client_.config(), instruction, std::nullopt)));
}

}  // namespace giqa
