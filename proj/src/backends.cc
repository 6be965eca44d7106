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

#include <algorithm>
#include <cctype>
#include <charconv>

#include "giqa/image.h"
#include "giqa/text_util.h"

namespace giqa {

std::string_view BackendErrorKindName(BackendError::Kind kind) {
  switch (kind) {
    case BackendError::Kind::kTransport:
      return "transport";
    case BackendError::Kind::kTimeout:
      return "timeout";
    case BackendError::Kind::kRateLimit:
      return "rate_limit";
    case BackendError::Kind::kPrecondition:
      return "precondition";
    case BackendError::Kind::kUndecodableImage:
      return "undecodable_image";
    case BackendError::Kind::kUnparseableScore:
      return "unparseable_score";
    case BackendError::Kind::kCancelled:
      return "cancelled";
    case BackendError::Kind::kNoFixture:
      return "no_fixture";
  }
  return "unknown";
}

std::optional<int> ParseJudgeScore(std::string_view reply) {
  std::size_t i = 0;
  while (i < reply.size()) {
    if (!std::isdigit(static_cast<unsigned char>(reply[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < reply.size() &&
           std::isdigit(static_cast<unsigned char>(reply[j]))) {
      ++j;
    }
    // Skip the fractional part of decimals such as "3.5"; they are not
    // integer scores.
    const bool decimal = j + 1 < reply.size() && reply[j] == '.' &&
                         std::isdigit(static_cast<unsigned char>(reply[j + 1]));
    const bool preceded_by_point = i > 0 && reply[i - 1] == '.' && i > 1 &&
                                   std::isdigit(static_cast<unsigned char>(reply[i - 2]));
    if (!decimal && !preceded_by_point && j - i <= 2) {
      int value = 0;
      std::from_chars(reply.data() + i, reply.data() + j, value);
      if (value >= 0 && value <= 4) return value;
    }
    i = j;
  }
  return std::nullopt;
}

QualityAnswer ParseQualityAnswer(std::string_view reply) {
  const auto answer = FirstYesNo(reply);
  if (!answer) return QualityAnswer::kUnparseable;
  return *answer ? QualityAnswer::kYes : QualityAnswer::kNo;
}

ConcurrencyGate::ConcurrencyGate(int concurrency)
    : concurrency_(concurrency), semaphore_(std::clamp<std::ptrdiff_t>(
                                     concurrency, 1, kMaxConcurrency)) {
  if (concurrency < 1) {
    throw BackendError(BackendError::Kind::kPrecondition,
                       "concurrency must be at least 1");
  }
}

std::string TextCompleter::Complete(std::string_view prompt) {
  if (Trim(prompt).empty()) {
    throw BackendError(BackendError::Kind::kPrecondition, "empty prompt");
  }
  ConcurrencyGate::Slot slot(gate_);
  return DoComplete(prompt);
}

std::vector<Detection> Detector::Detect(std::span<const std::uint8_t> image,
                                        std::string_view phrase) {
  if (Trim(phrase).empty()) {
    throw BackendError(BackendError::Kind::kPrecondition, "empty phrase");
  }
  if (!IsDecodableImage(image)) {
    throw BackendError(BackendError::Kind::kUndecodableImage,
                       "detector input is not a decodable image");
  }
  std::vector<Detection> raw;
  {
    ConcurrencyGate::Slot slot(gate_);
    raw = DoDetect(image, phrase);
  }
  std::vector<Detection> out;
  for (const auto& d : raw) {
    if (d.confidence >= box_threshold_ && d.confidence <= 1.0 &&
        d.box.IsValid()) {
      out.push_back(d);
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Detection& a, const Detection& b) {
                     return a.confidence > b.confidence;
                   });
  return out;
}

QualityAnswer QualityVerifier::VerifyQuality(
    std::span<const std::uint8_t> patch, std::string_view question) {
  if (!IsDecodableImage(patch)) {
    throw BackendError(BackendError::Kind::kUndecodableImage,
                       "verifier patch is not a decodable image");
  }
  ConcurrencyGate::Slot slot(gate_);
  return ParseQualityAnswer(DoAsk(patch, question));
}

int Judge::JudgeScore(std::string_view instruction) {
  if (Trim(instruction).empty()) {
    throw BackendError(BackendError::Kind::kPrecondition,
                       "empty judge instruction");
  }
  std::string last_reply;
  for (int attempt = 0; attempt < 2; ++attempt) {
    ConcurrencyGate::Slot slot(gate_);
    last_reply = DoAsk(instruction);
    if (auto score = ParseJudgeScore(last_reply)) return *score;
  }
  throw BackendError(BackendError::Kind::kUnparseableScore,
                     "judge reply has no score in 0..4: " +
                         last_reply.substr(0, 80));
}

}  // namespace giqa
