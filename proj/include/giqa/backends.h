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

// Interfaces for the four external model roles used by the annotation
// pipeline and the benchmark evaluator:
//
//   TextCompleter    LLM that extracts tags and writes QA pairs.
//   Detector         open-vocabulary detector queried with a phrase.
//   QualityVerifier  IQA model answering "Is the image quality <q>?".
//   Judge            LLM grading a response on a 0..4 rubric.
//
// Each interface is a non-virtual public method that enforces the role's
// contract (preconditions, reply parsing, concurrency bound) around a
// protected virtual hook implemented by concrete clients and mocks.

#ifndef GIQA_BACKENDS_H_
#define GIQA_BACKENDS_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "giqa/coord_codec.h"

namespace giqa {

class BackendError : public std::runtime_error {
 public:
  enum class Kind {
    kTransport,
    kTimeout,
    kRateLimit,
    kPrecondition,
    kUndecodableImage,
    kUnparseableScore,
    kCancelled,
    kNoFixture,
  };

  BackendError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view BackendErrorKindName(BackendError::Kind kind);

enum class QualityAnswer { kYes, kNo, kUnparseable };

struct Detection {
  NormBox box;
  double confidence = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

// First integer token in 0..4, or nullopt.
std::optional<int> ParseJudgeScore(std::string_view reply);
QualityAnswer ParseQualityAnswer(std::string_view reply);

// Caps the number of calls inside a backend at once.
class ConcurrencyGate {
 public:
  static constexpr std::ptrdiff_t kMaxConcurrency = 1024;

  explicit ConcurrencyGate(int concurrency);

  class Slot {
   public:
    explicit Slot(ConcurrencyGate& gate) : gate_(gate) {
      gate_.semaphore_.acquire();
    }
    ~Slot() { gate_.semaphore_.release(); }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

   private:
    ConcurrencyGate& gate_;
  };

  int concurrency() const { return concurrency_; }

 private:
  int concurrency_;
  std::counting_semaphore<kMaxConcurrency> semaphore_;
};

class TextCompleter {
 public:
  explicit TextCompleter(int concurrency = 8) : gate_(concurrency) {}
  virtual ~TextCompleter() = default;

  // Throws BackendError(kPrecondition) on an empty prompt.
  std::string Complete(std::string_view prompt);

 protected:
  virtual std::string DoComplete(std::string_view prompt) = 0;

 private:
  ConcurrencyGate gate_;
};

class Detector {
 public:
  static constexpr double kDefaultBoxThreshold = 0.35;

  explicit Detector(double box_threshold = kDefaultBoxThreshold,
                    int concurrency = 8)
      : box_threshold_(box_threshold), gate_(concurrency) {}
  virtual ~Detector() = default;

  // Detections at or above the box threshold with valid boxes, sorted by
  // descending confidence (stable for ties).
  std::vector<Detection> Detect(std::span<const std::uint8_t> image,
                                std::string_view phrase);

  double box_threshold() const { return box_threshold_; }

 protected:
  virtual std::vector<Detection> DoDetect(std::span<const std::uint8_t> image,
                                          std::string_view phrase) = 0;

 private:
  double box_threshold_;
  ConcurrencyGate gate_;
};

class QualityVerifier {
 public:
  explicit QualityVerifier(int concurrency = 8) : gate_(concurrency) {}
  virtual ~QualityVerifier() = default;

  QualityAnswer VerifyQuality(std::span<const std::uint8_t> patch,
                              std::string_view question);

 protected:
  // Raw reply text of the backend.
  virtual std::string DoAsk(std::span<const std::uint8_t> patch,
                            std::string_view question) = 0;

 private:
  ConcurrencyGate gate_;
};

class Judge {
 public:
  explicit Judge(int concurrency = 8) : gate_(concurrency) {}
  virtual ~Judge() = default;

  // Score in 0..4. A malformed reply is retried once, then
  // BackendError(kUnparseableScore) is thrown.
  int JudgeScore(std::string_view instruction);

  // Whether scores come from a live, possibly nondeterministic model.
  virtual bool deterministic() const { return false; }

 protected:
  virtual std::string DoAsk(std::string_view instruction) = 0;

 private:
  ConcurrencyGate gate_;
};

// Section headers of judge instructions. The evaluator writes candidate and
// reference text between these markers so that judges (and the offline mock)
// can locate them.
inline constexpr std::string_view kJudgeReferenceHeader = "### Reference";
inline constexpr std::string_view kJudgeCandidateHeader = "### Candidate";
inline constexpr std::string_view kJudgeEndHeader = "### End";

// The four roles wired together; any member may be null when a command
// does not need it.
struct Backends {
  std::shared_ptr<TextCompleter> completer;
  std::shared_ptr<Detector> detector;
  std::shared_ptr<QualityVerifier> verifier;
  std::shared_ptr<Judge> judge;
};

}  // namespace giqa

#endif  // GIQA_BACKENDS_H_
