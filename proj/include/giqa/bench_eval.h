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

// Benchmark scoring of model responses on three axes: description quality
// (BLEU@4, LLM-Score), VQA accuracy (Acc Y/W/Total) and grounding precision
// (mIoU, Tag-Recall).

#ifndef GIQA_BENCH_EVAL_H_
#define GIQA_BENCH_EVAL_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "giqa/backends.h"
#include "giqa/dataset_store.h"
#include "giqa/grounded_text.h"
#include "json.hpp"

namespace giqa {

inline constexpr std::string_view kJudgePromptVersion = "giqa-judge/1";

struct BenchItem {
  std::string id;
  std::string image;
  Task task = Task::kDes;
  std::string subkind;
  std::string question;
  std::string gt_answer;
  std::vector<PhraseBox> gt_pairs;
};

struct BenchManifest {
  std::size_t des = 0;
  std::size_t vqa_y = 0;
  std::size_t vqa_w = 0;
  std::size_t yes = 0;
  std::size_t no = 0;
  std::size_t what = 0;
  std::size_t why = 0;
  std::size_t how = 0;

  // 100 DES, 90 Yes/No (35/55) and 60 open (30/18/12).
  static BenchManifest FullScale();
  friend bool operator==(const BenchManifest&, const BenchManifest&) = default;
};

struct Bench {
  BenchManifest manifest;
  std::vector<BenchItem> items;
};

class BenchError : public std::runtime_error {
 public:
  explicit BenchError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

// First line: {"manifest": {"DES": .., "VQA-Y": .., "VQA-W": .., "Yes": ..,
// "No": .., "What": .., "Why": .., "How": ..}}; one item per following line.
// Throws BenchError when the data does not match the declared counts or an
// item is invalid.
Bench ParseBench(std::string_view content, const GridSpec& grid = {});
Bench LoadBench(const std::filesystem::path& path, const GridSpec& grid = {});

// Compares declared and actual counts; empty when they agree.
std::vector<std::string> ManifestDiagnostics(const BenchManifest& declared,
                                             const std::vector<BenchItem>& items);

// Responses file: one {"id": ..., "response": ...} per line.
std::map<std::string, std::string> ParseResponses(std::string_view content);

// Lowercased tokens split on whitespace and punctuation.
std::vector<std::string> BleuTokens(std::string_view text);

// Sentence BLEU with 1..4-gram modified precisions and brevity penalty,
// scaled to [0, 100]. When some n-gram order has no match, orders n >= 2 use
// add-one smoothing. Zero for an empty candidate or no unigram match.
double Bleu4(std::string_view candidate, std::string_view reference);

std::string DescriptionJudgePrompt(std::string_view candidate,
                                   std::string_view reference);
std::string OpenAnswerJudgePrompt(std::string_view question,
                                  std::string_view reference,
                                  std::string_view candidate);

// judge score * 25.
double LlmScore(std::string_view candidate, std::string_view reference,
                Judge& judge);
// judge score / 4.
double AccOpen(std::string_view question, std::string_view response,
               std::string_view gt, Judge& judge);
// 1 when the first yes/no word of the response equals gt.
int AccYesNo(std::string_view response, bool gt_yes);
// Sample-weighted mean; throws std::invalid_argument when n_y + n_w == 0.
double AccTotal(double acc_y, std::size_t n_y, double acc_w, std::size_t n_w);

// Token Jaccard after lowercasing, punctuation and stopword removal.
double NameSimilarity(std::string_view a, std::string_view b);

// Greedy one-to-one matching by descending IoU. Ties go to the lower gt
// index, then the lexicographically smaller prediction box, so the result
// does not depend on prediction order. nullopt when both lists are empty.
std::optional<double> Miou(const std::vector<NormBox>& pred,
                           const std::vector<NormBox>& gt);

struct TagRecallCount {
  std::size_t matched = 0;
  std::size_t total = 0;
  double recall() const {
    return total == 0 ? 0.0 : static_cast<double>(matched) / total;
  }
};

// A gt tag is recalled when a prediction has IoU > 0.5 and name
// similarity > 0.5 with it, matched one-to-one greedily by IoU.
TagRecallCount TagRecall(const std::vector<PhraseBox>& pred,
                         const std::vector<PhraseBox>& gt);

struct ItemScore {
  std::string id;
  Task task = Task::kDes;
  std::optional<double> bleu4;
  std::optional<double> llm_score;
  std::optional<double> accuracy;
  std::optional<double> miou;
  std::optional<TagRecallCount> tags;
  std::string error;
};

struct GroundingScore {
  double miou = 0.0;
  std::size_t miou_items = 0;
  double tag_recall = 0.0;
  std::size_t tags_matched = 0;
  std::size_t tags_total = 0;
};

struct EvalReport {
  double bleu4 = 0.0;
  double llm_score = 0.0;
  std::size_t des_items = 0;
  std::size_t llm_scored = 0;

  double acc_y = 0.0;
  double acc_w = 0.0;
  double acc_total = 0.0;
  std::size_t n_y = 0;
  std::size_t n_w = 0;  // open items with a judge score

  GroundingScore des_grounding;
  GroundingScore vqa_grounding;
  GroundingScore grounding;  // all items

  std::size_t judge_failures = 0;
  std::size_t missing_responses = 0;
  bool judge_deterministic = true;
  std::vector<ItemScore> items;
};

// `judge` may be null; judge-based metrics are then skipped and counted as
// failures.
EvalReport Evaluate(const std::vector<BenchItem>& bench,
                    const std::map<std::string, std::string>& responses,
                    Judge* judge, const GridSpec& grid = {}, int workers = 1);

nlohmann::ordered_json ToJson(const EvalReport& report);
std::string FormatReportTable(const EvalReport& report);

}  // namespace giqa

#endif  // GIQA_BENCH_EVAL_H_
