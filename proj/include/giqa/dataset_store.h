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

// Instruction-tuning samples on disk: one JSON object per line.
//
//   {"id": "...", "image": "...", "task": "DES" | "VQA-Y" | "VQA-W",
//    "question": "<grounded text>", "answer": "<grounded text>",
//    "metadata": {"source": "...", "seed": 123, "pipeline_version": "...",
//                 "subkind": "Yes|No|What|Why|How",   (VQA only)
//                 "placement": "referring|grounding|none"}}  (VQA only)

#ifndef GIQA_DATASET_STORE_H_
#define GIQA_DATASET_STORE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "giqa/coord_codec.h"
#include "giqa/grounded_text.h"
#include "json.hpp"

namespace giqa {

enum class Task { kDes, kVqaY, kVqaW };

std::string_view TaskName(Task task);
std::optional<Task> ParseTaskName(std::string_view name);

struct SampleMetadata {
  std::string source;
  std::uint64_t seed = 0;
  std::string pipeline_version;
  std::string subkind;
  std::string placement;

  friend bool operator==(const SampleMetadata&, const SampleMetadata&) = default;
};

struct AnnotatedSample {
  std::string id;
  std::string image;
  Task task = Task::kDes;
  std::string question;
  std::string answer;
  SampleMetadata metadata;

  friend bool operator==(const AnnotatedSample&, const AnnotatedSample&) = default;
};

struct StoreOptions {
  GridSpec grid;
  BoxMode box_mode = BoxMode::kGrid;
};

struct LineViolation {
  std::size_t line = 0;  // 1-based
  std::string message;
};

class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(std::vector<LineViolation> violations);
  const std::vector<LineViolation>& violations() const { return violations_; }

 private:
  std::vector<LineViolation> violations_;
};

// Maximum word count of an open-ended (VQA-W) answer.
inline constexpr std::size_t kMaxShortAnswerWords = 8;

nlohmann::ordered_json ToJson(const AnnotatedSample& sample);
// Throws std::invalid_argument describing the first schema problem.
AnnotatedSample FromJson(const nlohmann::json& object);

// Task-specific invariants; empty when the sample is valid.
std::vector<std::string> ValidateSample(const AnnotatedSample& sample,
                                        const StoreOptions& options = {});

// Serialized JSONL (one line per sample, trailing newline). Validates first
// and throws SchemaError naming the offending sample positions.
std::string ToJsonl(const std::vector<AnnotatedSample>& samples,
                    const StoreOptions& options = {});
void WriteJsonl(const std::filesystem::path& path,
                const std::vector<AnnotatedSample>& samples,
                const StoreOptions& options = {});

// Parses and validates every line; all failing lines are reported together.
std::vector<AnnotatedSample> ParseJsonl(std::string_view content,
                                        const StoreOptions& options = {});
std::vector<AnnotatedSample> ReadJsonl(const std::filesystem::path& path,
                                       const StoreOptions& options = {});

// Every violation in a JSONL file without throwing on schema problems.
std::vector<LineViolation> CheckJsonl(std::string_view content,
                                      const StoreOptions& options = {});

inline constexpr std::size_t kAreaHistogramBins = 20;

struct DatasetStats {
  std::size_t images = 0;
  std::size_t total = 0;
  std::size_t des = 0;
  std::size_t vqa_y = 0;
  std::size_t vqa_w = 0;
  std::size_t yes = 0;
  std::size_t no = 0;
  std::size_t boxes = 0;
  // Uniform bins over [0, 1]; bin k holds areas in [k/20, (k+1)/20), the last
  // bin also holds 1.0.
  std::array<std::size_t, kAreaHistogramBins> area_histogram{};

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

std::size_t AreaBin(double area);
DatasetStats ComputeStats(const std::vector<AnnotatedSample>& samples,
                          const GridSpec& grid = {});
nlohmann::ordered_json ToJson(const DatasetStats& stats);
std::string HistogramCsv(const DatasetStats& stats);

std::string ReadTextFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, std::string_view content);

}  // namespace giqa

#endif  // GIQA_DATASET_STORE_H_
