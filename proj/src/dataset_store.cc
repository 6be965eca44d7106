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
#include "giqa/dataset_store.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "giqa/box_geometry.h"
#include "giqa/text_util.h"

namespace giqa {
namespace {

using json = nlohmann::json;

const std::set<std::string, std::less<>> kSampleKeys = {
    "id", "image", "task", "question", "answer", "metadata"};
const std::set<std::string, std::less<>> kMetadataKeys = {
    "source", "seed", "pipeline_version", "subkind", "placement"};

std::string Describe(const std::vector<LineViolation>& violations) {
  std::ostringstream out;
  out << violations.size() << " invalid line(s)";
  for (std::size_t i = 0; i < violations.size() && i < 10; ++i) {
    out << "; line " << violations[i].line << ": " << violations[i].message;
  }
  return out.str();
}

const std::string& RequireString(const json& object, const char* key) {
  if (!object.contains(key)) {
    throw std::invalid_argument(std::string("missing field '") + key + "'");
  }
  if (!object[key].is_string()) {
    throw std::invalid_argument(std::string("field '") + key +
                                "' must be a string");
  }
  return object[key].get_ref<const std::string&>();
}

std::optional<GroundedText> ParseField(const std::string& text,
                                       const char* name,
                                       const StoreOptions& options,
                                       std::vector<std::string>& problems) {
  try {
    return Parse(text, {options.box_mode, ParseMode::kStrict, options.grid})
        .text;
  } catch (const GroundedTextError& e) {
    problems.push_back(std::string(name) + ": " + e.what());
    return std::nullopt;
  }
}

}  // namespace

SchemaError::SchemaError(std::vector<LineViolation> violations)
    : std::runtime_error(Describe(violations)),
      violations_(std::move(violations)) {}

std::string_view TaskName(Task task) {
  switch (task) {
    case Task::kDes:
      return "DES";
    case Task::kVqaY:
      return "VQA-Y";
    case Task::kVqaW:
      return "VQA-W";
  }
  return "DES";
}

std::optional<Task> ParseTaskName(std::string_view name) {
  if (name == "DES") return Task::kDes;
  if (name == "VQA-Y") return Task::kVqaY;
  if (name == "VQA-W") return Task::kVqaW;
  return std::nullopt;
}

nlohmann::ordered_json ToJson(const AnnotatedSample& sample) {
  nlohmann::ordered_json metadata;
  metadata["source"] = sample.metadata.source;
  metadata["seed"] = sample.metadata.seed;
  metadata["pipeline_version"] = sample.metadata.pipeline_version;
  if (!sample.metadata.subkind.empty()) {
    metadata["subkind"] = sample.metadata.subkind;
  }
  if (!sample.metadata.placement.empty()) {
    metadata["placement"] = sample.metadata.placement;
  }
  nlohmann::ordered_json out;
  out["id"] = sample.id;
  out["image"] = sample.image;
  out["task"] = TaskName(sample.task);
  out["question"] = sample.question;
  out["answer"] = sample.answer;
  out["metadata"] = std::move(metadata);
  return out;
}

AnnotatedSample FromJson(const json& object) {
  if (!object.is_object()) throw std::invalid_argument("not a JSON object");
  for (const auto& [key, value] : object.items()) {
    if (!kSampleKeys.contains(key)) {
      throw std::invalid_argument("unknown field '" + key + "'");
    }
  }
  AnnotatedSample sample;
  sample.id = RequireString(object, "id");
  sample.image = RequireString(object, "image");
  const auto task = ParseTaskName(RequireString(object, "task"));
  if (!task) throw std::invalid_argument("unknown task");
  sample.task = *task;
  sample.question = RequireString(object, "question");
  sample.answer = RequireString(object, "answer");
  if (object.contains("metadata")) {
    const json& meta = object["metadata"];
    if (!meta.is_object()) throw std::invalid_argument("metadata must be an object");
    for (const auto& [key, value] : meta.items()) {
      if (!kMetadataKeys.contains(key)) {
        throw std::invalid_argument("unknown metadata field '" + key + "'");
      }
    }
    if (meta.contains("source")) sample.metadata.source = RequireString(meta, "source");
    if (meta.contains("seed")) {
      if (!meta["seed"].is_number_unsigned()) {
        throw std::invalid_argument("metadata.seed must be an unsigned integer");
      }
      sample.metadata.seed = meta["seed"].get<std::uint64_t>();
    }
    if (meta.contains("pipeline_version")) {
      sample.metadata.pipeline_version = RequireString(meta, "pipeline_version");
    }
    if (meta.contains("subkind")) sample.metadata.subkind = RequireString(meta, "subkind");
    if (meta.contains("placement")) {
      sample.metadata.placement = RequireString(meta, "placement");
    }
  }
  return sample;
}

std::vector<std::string> ValidateSample(const AnnotatedSample& sample,
                                        const StoreOptions& options) {
  std::vector<std::string> problems;
  if (sample.id.empty()) problems.push_back("empty id");
  if (sample.image.empty()) problems.push_back("empty image path");
  const auto question = ParseField(sample.question, "question", options, problems);
  const auto answer = ParseField(sample.answer, "answer", options, problems);
  if (!question || !answer) return problems;
  if (Trim(StripCoordinates(*answer)).empty()) problems.push_back("empty answer");

  const std::string& subkind = sample.metadata.subkind;
  const std::string& placement = sample.metadata.placement;
  switch (sample.task) {
    case Task::kDes:
      if (question->HasBoxes()) problems.push_back("DES question carries boxes");
      break;
    case Task::kVqaY: {
      const std::string plain = StripCoordinates(*answer);
      if (plain != "Yes" && plain != "No") {
        problems.push_back("VQA-Y answer must be exactly Yes or No");
      } else if (subkind != plain) {
        problems.push_back("VQA-Y subkind must equal the answer");
      }
      break;
    }
    case Task::kVqaW:
      if (subkind != "What" && subkind != "Why" && subkind != "How") {
        problems.push_back("VQA-W subkind must be What, Why or How");
      }
      if (WordTokens(StripCoordinates(*answer)).size() > kMaxShortAnswerWords) {
        problems.push_back("VQA-W answer longer than " +
                           std::to_string(kMaxShortAnswerWords) + " words");
      }
      break;
  }
  if (sample.task != Task::kDes) {
    if (placement == "referring") {
      if (!question->HasBoxes()) problems.push_back("referring question has no box");
    } else if (placement == "grounding") {
      if (!answer->HasBoxes()) problems.push_back("grounding answer has no box");
    } else if (placement != "none") {
      problems.push_back("placement must be referring, grounding or none");
    }
  }
  return problems;
}

std::string ToJsonl(const std::vector<AnnotatedSample>& samples,
                    const StoreOptions& options) {
  std::vector<LineViolation> violations;
  std::string out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (auto& problem : ValidateSample(samples[i], options)) {
      violations.push_back({i + 1, std::move(problem)});
    }
    out += ToJson(samples[i]).dump();
    out += '\n';
  }
  if (!violations.empty()) throw SchemaError(std::move(violations));
  return out;
}

void WriteJsonl(const std::filesystem::path& path,
                const std::vector<AnnotatedSample>& samples,
                const StoreOptions& options) {
  WriteTextFile(path, ToJsonl(samples, options));
}

std::vector<LineViolation> CheckJsonl(std::string_view content,
                                      const StoreOptions& options) {
  std::vector<LineViolation> violations;
  const auto lines = SplitLines(content);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    try {
      const AnnotatedSample sample = FromJson(json::parse(lines[i]));
      for (auto& problem : ValidateSample(sample, options)) {
        violations.push_back({i + 1, std::move(problem)});
      }
      if (!ids.insert(sample.id).second) {
        violations.push_back({i + 1, "duplicate id '" + sample.id + "'"});
      }
    } catch (const json::exception& e) {
      violations.push_back({i + 1, std::string("malformed JSON: ") + e.what()});
    } catch (const std::invalid_argument& e) {
      violations.push_back({i + 1, e.what()});
    }
  }
  return violations;
}

std::vector<AnnotatedSample> ParseJsonl(std::string_view content,
                                        const StoreOptions& options) {
  auto violations = CheckJsonl(content, options);
  if (!violations.empty()) throw SchemaError(std::move(violations));
  std::vector<AnnotatedSample> samples;
  for (const auto& line : SplitLines(content)) {
    if (Trim(line).empty()) continue;
    samples.push_back(FromJson(json::parse(line)));
  }
  return samples;
}

std::vector<AnnotatedSample> ReadJsonl(const std::filesystem::path& path,
                                       const StoreOptions& options) {
  return ParseJsonl(ReadTextFile(path), options);
}

std::size_t AreaBin(double area) {
  const double scaled = std::floor(std::clamp(area, 0.0, 1.0) * kAreaHistogramBins);
  return std::min(kAreaHistogramBins - 1, static_cast<std::size_t>(scaled));
}

DatasetStats ComputeStats(const std::vector<AnnotatedSample>& samples,
                          const GridSpec& grid) {
  DatasetStats stats;
  std::set<std::string> images;
  const ParseOptions parse{BoxMode::kMixed, ParseMode::kLenient, grid};
  for (const auto& sample : samples) {
    images.insert(sample.image);
    ++stats.total;
    switch (sample.task) {
      case Task::kDes:
        ++stats.des;
        break;
      case Task::kVqaY:
        ++stats.vqa_y;
        break;
      case Task::kVqaW:
        ++stats.vqa_w;
        break;
    }
    for (const std::string* field : {&sample.question, &sample.answer}) {
      const GroundedText text = Parse(*field, parse).text;
      if (sample.task == Task::kVqaY && field == &sample.answer) {
        const std::string plain = StripCoordinates(text);
        if (plain == "Yes") ++stats.yes;
        if (plain == "No") ++stats.no;
      }
      for (const auto& pair : ExtractPairs(text, grid)) {
        ++stats.boxes;
        ++stats.area_histogram[AreaBin(Area(pair.box))];
      }
    }
  }
  stats.images = images.size();
  return stats;
}

nlohmann::ordered_json ToJson(const DatasetStats& stats) {
  nlohmann::ordered_json out;
  out["images"] = stats.images;
  out["total"] = stats.total;
  out["DES"] = stats.des;
  out["VQA-Y"] = stats.vqa_y;
  out["VQA-W"] = stats.vqa_w;
  out["yes"] = stats.yes;
  out["no"] = stats.no;
  out["boxes"] = stats.boxes;
  out["area_histogram"] = stats.area_histogram;
  return out;
}

std::string HistogramCsv(const DatasetStats& stats) {
  std::string out = "bin_lo,bin_hi,count\n";
  char buf[64];
  for (std::size_t k = 0; k < kAreaHistogramBins; ++k) {
    std::snprintf(buf, sizeof(buf), "%.2f,%.2f,%zu\n",
                  static_cast<double>(k) / kAreaHistogramBins,
                  static_cast<double>(k + 1) / kAreaHistogramBins,
                  stats.area_histogram[k]);
    out += buf;
  }
  return out;
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void WriteTextFile(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace giqa
