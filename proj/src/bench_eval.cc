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
#include "giqa/bench_eval.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "giqa/box_geometry.h"
#include "giqa/parallel.h"
#include "giqa/text_util.h"

namespace giqa {
namespace {

using json = nlohmann::json;

constexpr double kTagThreshold = 0.5;

std::map<std::vector<std::string>, int> NgramCounts(
    const std::vector<std::string>& tokens, std::size_t n) {
  std::map<std::vector<std::string>, int> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

struct Candidate {
  std::size_t pred;
  std::size_t gt;
  double iou;
};

// Greedy one-to-one assignment; `pairs` must already be sorted.
std::vector<Candidate> GreedyMatch(std::vector<Candidate> pairs) {
  std::vector<Candidate> matches;
  std::set<std::size_t> used_pred, used_gt;
  for (const auto& c : pairs) {
    if (used_pred.contains(c.pred) || used_gt.contains(c.gt)) continue;
    used_pred.insert(c.pred);
    used_gt.insert(c.gt);
    matches.push_back(c);
  }
  return matches;
}

void SortCandidates(std::vector<Candidate>& pairs,
                    const std::vector<NormBox>& pred) {
  std::sort(pairs.begin(), pairs.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.gt != b.gt) return a.gt < b.gt;
    if (pred[a.pred] != pred[b.pred]) return pred[a.pred] < pred[b.pred];
    return a.pred < b.pred;
  });
}

std::string Stripped(std::string_view wire, const GridSpec& grid) {
  return StripCoordinates(
      Parse(wire, {BoxMode::kMixed, ParseMode::kLenient, grid}).text);
}

std::size_t CountValue(const json& manifest, const char* key) {
  if (!manifest.contains(key)) return 0;
  return manifest[key].get<std::size_t>();
}

BenchItem ParseItem(const json& j, const GridSpec& grid) {
  BenchItem item;
  item.id = j.at("id").get<std::string>();
  item.image = j.value("image", "");
  const auto task = ParseTaskName(j.at("task").get<std::string>());
  if (!task) throw std::invalid_argument("unknown task");
  item.task = *task;
  item.subkind = j.value("subkind", "");
  item.question = j.value("question", "");
  item.gt_answer = j.at("gt_answer").get<std::string>();
  const ParseOptions strict{BoxMode::kMixed, ParseMode::kStrict, grid};
  Parse(item.question, strict);
  const GroundedText answer = Parse(item.gt_answer, strict).text;
  if (j.contains("gt_pairs")) {
    for (const auto& p : j["gt_pairs"]) {
      const auto& b = p.at("box");
      NormBox box{b.at(0).get<double>(), b.at(1).get<double>(),
                  b.at(2).get<double>(), b.at(3).get<double>()};
      box.Validate();
      item.gt_pairs.push_back({p.at("phrase").get<std::string>(), box});
    }
  } else {
    item.gt_pairs = ExtractPairs(answer, grid);
  }
  switch (item.task) {
    case Task::kDes:
      break;
    case Task::kVqaY: {
      const std::string plain = StripCoordinates(answer);
      if (plain != "Yes" && plain != "No") {
        throw std::invalid_argument("VQA-Y gt_answer must be Yes or No");
      }
      if (item.subkind.empty()) item.subkind = plain;
      if (item.subkind != plain) {
        throw std::invalid_argument("VQA-Y subkind disagrees with gt_answer");
      }
      break;
    }
    case Task::kVqaW:
      if (item.subkind != "What" && item.subkind != "Why" && item.subkind != "How") {
        throw std::invalid_argument("VQA-W subkind must be What, Why or How");
      }
      break;
  }
  return item;
}

double Mean(double sum, std::size_t n) { return n == 0 ? 0.0 : sum / n; }

json GroundingJson(const GroundingScore& g) {
  nlohmann::ordered_json out;
  out["mIoU"] = g.miou;
  out["mIoU_items"] = g.miou_items;
  out["Tag-Recall"] = g.tag_recall;
  out["tags_matched"] = g.tags_matched;
  out["tags_total"] = g.tags_total;
  return out;
}

}  // namespace

BenchManifest BenchManifest::FullScale() {
  BenchManifest m;
  m.des = 100;
  m.vqa_y = 90;
  m.vqa_w = 60;
  m.yes = 35;
  m.no = 55;
  m.what = 30;
  m.why = 18;
  m.how = 12;
  return m;
}

BenchError::BenchError(std::vector<std::string> diagnostics)
    : std::runtime_error([&] {
        std::string what = "invalid benchmark";
        for (const auto& d : diagnostics) what += "; " + d;
        return what;
      }()),
      diagnostics_(std::move(diagnostics)) {}

std::vector<std::string> ManifestDiagnostics(const BenchManifest& declared,
                                             const std::vector<BenchItem>& items) {
  BenchManifest actual;
  for (const auto& item : items) {
    switch (item.task) {
      case Task::kDes:
        ++actual.des;
        break;
      case Task::kVqaY:
        ++actual.vqa_y;
        if (item.subkind == "Yes") ++actual.yes;
        if (item.subkind == "No") ++actual.no;
        break;
      case Task::kVqaW:
        ++actual.vqa_w;
        if (item.subkind == "What") ++actual.what;
        if (item.subkind == "Why") ++actual.why;
        if (item.subkind == "How") ++actual.how;
        break;
    }
  }
  std::vector<std::string> out;
  auto check = [&](const char* name, std::size_t want, std::size_t got) {
    if (want != got) {
      out.push_back(std::string(name) + ": declared " + std::to_string(want) +
                    ", found " + std::to_string(got));
    }
  };
  check("DES", declared.des, actual.des);
  check("VQA-Y", declared.vqa_y, actual.vqa_y);
  check("VQA-W", declared.vqa_w, actual.vqa_w);
  check("Yes", declared.yes, actual.yes);
  check("No", declared.no, actual.no);
  check("What", declared.what, actual.what);
  check("Why", declared.why, actual.why);
  check("How", declared.how, actual.how);
  return out;
}

Bench ParseBench(std::string_view content, const GridSpec& grid) {
  Bench bench;
  std::vector<std::string> diagnostics;
  bool have_manifest = false;
  std::set<std::string> ids;
  const auto lines = SplitLines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    const std::string where = "line " + std::to_string(i + 1) + ": ";
    try {
      const json j = json::parse(lines[i]);
      if (j.contains("manifest")) {
        if (have_manifest) throw std::invalid_argument("duplicate manifest");
        const json& m = j["manifest"];
        bench.manifest.des = CountValue(m, "DES");
        bench.manifest.vqa_y = CountValue(m, "VQA-Y");
        bench.manifest.vqa_w = CountValue(m, "VQA-W");
        bench.manifest.yes = CountValue(m, "Yes");
        bench.manifest.no = CountValue(m, "No");
        bench.manifest.what = CountValue(m, "What");
        bench.manifest.why = CountValue(m, "Why");
        bench.manifest.how = CountValue(m, "How");
        have_manifest = true;
        continue;
      }
      BenchItem item = ParseItem(j, grid);
      if (!ids.insert(item.id).second) {
        throw std::invalid_argument("duplicate id '" + item.id + "'");
      }
      bench.items.push_back(std::move(item));
    } catch (const std::exception& e) {
      diagnostics.push_back(where + e.what());
    }
  }
  if (!have_manifest) diagnostics.push_back("missing manifest header");
  if (diagnostics.empty()) {
    diagnostics = ManifestDiagnostics(bench.manifest, bench.items);
  }
  if (!diagnostics.empty()) throw BenchError(std::move(diagnostics));
  return bench;
}

Bench LoadBench(const std::filesystem::path& path, const GridSpec& grid) {
  return ParseBench(ReadTextFile(path), grid);
}

std::map<std::string, std::string> ParseResponses(std::string_view content) {
  std::map<std::string, std::string> out;
  const auto lines = SplitLines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    try {
      const json j = json::parse(lines[i]);
      out[j.at("id").get<std::string>()] = j.at("response").get<std::string>();
    } catch (const json::exception& e) {
      throw std::invalid_argument("responses line " + std::to_string(i + 1) +
                                  ": " + e.what());
    }
  }
  return out;
}

std::vector<std::string> BleuTokens(std::string_view text) {
  return WordTokens(text);
}

double Bleu4(std::string_view candidate, std::string_view reference) {
  const auto cand = BleuTokens(candidate);
  const auto ref = BleuTokens(reference);
  if (cand.empty()) return 0.0;
  std::array<double, 4> matched{};
  std::array<double, 4> total{};
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto c = NgramCounts(cand, n);
    const auto r = NgramCounts(ref, n);
    for (const auto& [gram, count] : c) {
      total[n - 1] += count;
      const auto it = r.find(gram);
      if (it != r.end()) matched[n - 1] += std::min(count, it->second);
    }
  }
  if (matched[0] == 0.0) return 0.0;
  const bool smooth = std::any_of(matched.begin(), matched.end(),
                                  [](double m) { return m == 0.0; });
  double log_sum = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    double m = matched[n];
    double t = total[n];
    if (smooth && n >= 1) {
      m += 1.0;
      t += 1.0;
    }
    log_sum += std::log(m / t);
  }
  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(ref.size());
  const double brevity = c > r ? 1.0 : std::exp(1.0 - r / c);
  return 100.0 * brevity * std::exp(log_sum / 4.0);
}

std::string DescriptionJudgePrompt(std::string_view candidate,
                                   std::string_view reference) {
  std::string prompt =
      "You compare an image quality description with a reference "
      "description written by experts.\n"
      "Rate how relevant and consistent the candidate is with the reference "
      "with an integer score from 0 to 4 (higher is better). Reply with the "
      "score first.\n\n";
  prompt += kJudgeReferenceHeader;
  prompt += "\n" + std::string(reference) + "\n";
  prompt += kJudgeCandidateHeader;
  prompt += "\n" + std::string(candidate) + "\n";
  prompt += kJudgeEndHeader;
  prompt += "\n";
  return prompt;
}

std::string OpenAnswerJudgePrompt(std::string_view question,
                                  std::string_view reference,
                                  std::string_view candidate) {
  std::string prompt =
      "You grade an answer to a question about image quality.\n"
      "Given the question and the correct answer, rate the candidate answer "
      "with an integer score from 0 to 4 (higher is better). Reply with the "
      "score first.\n\n"
      "### Question\n";
  prompt += std::string(question) + "\n";
  prompt += kJudgeReferenceHeader;
  prompt += "\n" + std::string(reference) + "\n";
  prompt += kJudgeCandidateHeader;
  prompt += "\n" + std::string(candidate) + "\n";
  prompt += kJudgeEndHeader;
  prompt += "\n";
  return prompt;
}

double LlmScore(std::string_view candidate, std::string_view reference,
                Judge& judge) {
  return 25.0 * judge.JudgeScore(DescriptionJudgePrompt(candidate, reference));
}

double AccOpen(std::string_view question, std::string_view response,
               std::string_view gt, Judge& judge) {
  return judge.JudgeScore(OpenAnswerJudgePrompt(question, gt, response)) / 4.0;
}

int AccYesNo(std::string_view response, bool gt_yes) {
  const auto answer = FirstYesNo(response);
  return answer && *answer == gt_yes ? 1 : 0;
}

double AccTotal(double acc_y, std::size_t n_y, double acc_w, std::size_t n_w) {
  if (n_y + n_w == 0) throw std::invalid_argument("no VQA items to aggregate");
  return (static_cast<double>(n_y) * acc_y + static_cast<double>(n_w) * acc_w) /
         static_cast<double>(n_y + n_w);
}

double NameSimilarity(std::string_view a, std::string_view b) {
  const auto ta = ContentTokens(a);
  const auto tb = ContentTokens(b);
  const std::set<std::string> sa(ta.begin(), ta.end());
  const std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) {
    return ToLower(Trim(a)) == ToLower(Trim(b)) ? 1.0 : 0.0;
  }
  std::size_t shared = 0;
  for (const auto& t : sa) shared += sb.count(t);
  return static_cast<double>(shared) /
         static_cast<double>(sa.size() + sb.size() - shared);
}

std::optional<double> Miou(const std::vector<NormBox>& pred,
                           const std::vector<NormBox>& gt) {
  if (gt.empty()) {
    if (pred.empty()) return std::nullopt;
    return 0.0;
  }
  std::vector<Candidate> pairs;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    for (std::size_t g = 0; g < gt.size(); ++g) {
      const double iou = Iou(pred[p], gt[g]);
      if (iou > 0.0) pairs.push_back({p, g, iou});
    }
  }
  SortCandidates(pairs, pred);
  double sum = 0.0;
  for (const auto& m : GreedyMatch(std::move(pairs))) sum += m.iou;
  return sum / static_cast<double>(gt.size());
}

TagRecallCount TagRecall(const std::vector<PhraseBox>& pred,
                         const std::vector<PhraseBox>& gt) {
  std::vector<NormBox> pred_boxes;
  for (const auto& p : pred) pred_boxes.push_back(p.box);
  std::vector<Candidate> pairs;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (NameSimilarity(pred[p].phrase, gt[g].phrase) <= kTagThreshold) continue;
      const double iou = Iou(pred[p].box, gt[g].box);
      if (iou > kTagThreshold) pairs.push_back({p, g, iou});
    }
  }
  SortCandidates(pairs, pred_boxes);
  return {GreedyMatch(std::move(pairs)).size(), gt.size()};
}

EvalReport Evaluate(const std::vector<BenchItem>& bench,
                    const std::map<std::string, std::string>& responses,
                    Judge* judge, const GridSpec& grid, int workers) {
  EvalReport report;
  report.items.resize(bench.size());
  std::vector<char> missing(bench.size(), 0);
  ParallelFor(bench.size(), workers, [&](std::size_t i) {
    const BenchItem& item = bench[i];
    ItemScore& score = report.items[i];
    score.id = item.id;
    score.task = item.task;
    const auto it = responses.find(item.id);
    const std::string response = it == responses.end() ? std::string() : it->second;
    missing[i] = it == responses.end();
    const GroundedText parsed =
        Parse(response, {BoxMode::kMixed, ParseMode::kLenient, grid}).text;
    const std::string plain = StripCoordinates(parsed);

    auto judged = [&](auto&& fn) -> std::optional<double> {
      if (judge == nullptr) {
        score.error = "no judge configured";
        return std::nullopt;
      }
      try {
        return fn();
      } catch (const BackendError& e) {
        score.error = e.what();
        return std::nullopt;
      }
    };

    switch (item.task) {
      case Task::kDes: {
        const std::string reference = Stripped(item.gt_answer, grid);
        score.bleu4 = Bleu4(plain, reference);
        score.llm_score = judged([&] { return LlmScore(plain, reference, *judge); });
        break;
      }
      case Task::kVqaY:
        score.accuracy = AccYesNo(plain, item.subkind == "Yes");
        break;
      case Task::kVqaW:
        score.accuracy = judged([&] {
          return AccOpen(Stripped(item.question, grid), plain,
                         Stripped(item.gt_answer, grid), *judge);
        });
        break;
    }
    if (item.task == Task::kDes || !item.gt_pairs.empty()) {
      const auto pred = ExtractPairs(parsed, grid);
      std::vector<NormBox> pred_boxes, gt_boxes;
      for (const auto& p : pred) pred_boxes.push_back(p.box);
      for (const auto& g : item.gt_pairs) gt_boxes.push_back(g.box);
      score.miou = Miou(pred_boxes, gt_boxes);
      if (!item.gt_pairs.empty()) score.tags = TagRecall(pred, item.gt_pairs);
    }
  });

  double bleu_sum = 0, llm_sum = 0, y_sum = 0, w_sum = 0;
  double miou_des = 0, miou_vqa = 0;
  for (std::size_t i = 0; i < bench.size(); ++i) {
    const ItemScore& s = report.items[i];
    report.missing_responses += missing[i];
    if (!s.error.empty()) ++report.judge_failures;
    GroundingScore& g = s.task == Task::kDes ? report.des_grounding
                                             : report.vqa_grounding;
    double& miou_sum = s.task == Task::kDes ? miou_des : miou_vqa;
    if (s.miou) {
      miou_sum += *s.miou;
      ++g.miou_items;
    }
    if (s.tags) {
      g.tags_matched += s.tags->matched;
      g.tags_total += s.tags->total;
    }
    switch (s.task) {
      case Task::kDes:
        ++report.des_items;
        bleu_sum += s.bleu4.value_or(0.0);
        if (s.llm_score) {
          llm_sum += *s.llm_score;
          ++report.llm_scored;
        }
        break;
      case Task::kVqaY:
        y_sum += s.accuracy.value_or(0.0);
        ++report.n_y;
        break;
      case Task::kVqaW:
        if (s.accuracy) {
          w_sum += *s.accuracy;
          ++report.n_w;
        }
        break;
    }
  }
  report.bleu4 = Mean(bleu_sum, report.des_items);
  report.llm_score = Mean(llm_sum, report.llm_scored);
  report.acc_y = Mean(y_sum, report.n_y);
  report.acc_w = Mean(w_sum, report.n_w);
  if (report.n_y + report.n_w > 0) {
    report.acc_total = AccTotal(report.acc_y, report.n_y, report.acc_w, report.n_w);
  }
  auto finish = [](GroundingScore& g, double miou_sum) {
    g.miou = Mean(miou_sum, g.miou_items);
    g.tag_recall = g.tags_total == 0
                       ? 0.0
                       : static_cast<double>(g.tags_matched) / g.tags_total;
  };
  finish(report.des_grounding, miou_des);
  finish(report.vqa_grounding, miou_vqa);
  report.grounding.miou_items =
      report.des_grounding.miou_items + report.vqa_grounding.miou_items;
  report.grounding.tags_matched =
      report.des_grounding.tags_matched + report.vqa_grounding.tags_matched;
  report.grounding.tags_total =
      report.des_grounding.tags_total + report.vqa_grounding.tags_total;
  finish(report.grounding, miou_des + miou_vqa);
  report.judge_deterministic = judge == nullptr || judge->deterministic();
  return report;
}

nlohmann::ordered_json ToJson(const EvalReport& report) {
  nlohmann::ordered_json out;
  out["BLEU@4"] = report.bleu4;
  out["LLM-Score"] = report.llm_score;
  out["Acc(Y)"] = report.acc_y;
  out["Acc(W)"] = report.acc_w;
  out["Acc(Total)"] = report.acc_total;
  out["mIoU"] = report.grounding.miou;
  out["Tag-Recall"] = report.grounding.tag_recall;
  out["DES"] = GroundingJson(report.des_grounding);
  out["DES"]["items"] = report.des_items;
  out["DES"]["llm_scored"] = report.llm_scored;
  out["VQA"] = GroundingJson(report.vqa_grounding);
  out["VQA"]["n_y"] = report.n_y;
  out["VQA"]["n_w"] = report.n_w;
  out["judge_failures"] = report.judge_failures;
  out["missing_responses"] = report.missing_responses;
  out["judge_prompt_version"] = kJudgePromptVersion;
  out["judge_deterministic"] = report.judge_deterministic;
  nlohmann::ordered_json items = nlohmann::ordered_json::array();
  for (const auto& s : report.items) {
    nlohmann::ordered_json item;
    item["id"] = s.id;
    item["task"] = TaskName(s.task);
    if (s.bleu4) item["BLEU@4"] = *s.bleu4;
    if (s.llm_score) item["LLM-Score"] = *s.llm_score;
    if (s.accuracy) item["accuracy"] = *s.accuracy;
    if (s.miou) item["mIoU"] = *s.miou;
    if (s.tags) {
      item["tags_matched"] = s.tags->matched;
      item["tags_total"] = s.tags->total;
    }
    if (!s.error.empty()) item["error"] = s.error;
    items.push_back(std::move(item));
  }
  out["items"] = std::move(items);
  return out;
}

std::string FormatReportTable(const EvalReport& report) {
  char buf[512];
  std::string out;
  std::snprintf(buf, sizeof(buf),
                "%-10s %8s %10s %8s %10s\n", "GIQA-DES", "mIoU", "Tag-Recall",
                "BLEU@4", "LLM-Score");
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-10s %8.4f %10.4f %8.2f %10.2f\n", "",
                report.des_grounding.miou, report.des_grounding.tag_recall,
                report.bleu4, report.llm_score);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-10s %8s %10s %8s %8s %10s\n", "GIQA-VQA",
                "mIoU", "Tag-Recall", "Acc(Y)", "Acc(W)", "Acc(Total)");
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-10s %8.4f %10.4f %8.4f %8.4f %10.4f\n", "",
                report.vqa_grounding.miou, report.vqa_grounding.tag_recall,
                report.acc_y, report.acc_w, report.acc_total);
  out += buf;
  if (!report.judge_deterministic) {
    out += "note: judge scores come from a live model and depend on it\n";
  }
  if (report.judge_failures > 0) {
    out += "judge failures: " + std::to_string(report.judge_failures) + "\n";
  }
  return out;
}

}  // namespace giqa
