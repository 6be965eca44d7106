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
#include "giqa/vqa_generator.h"

#include <algorithm>
#include <cctype>
#include <random>
#include <set>

#include "giqa/annotation_pipeline.h"
#include "giqa/text_util.h"

namespace giqa {
namespace {

struct Span {
  std::size_t begin = 0;
  std::size_t length = 0;
};

std::string ObjectList(const std::vector<VqaTag>& tags) {
  std::string out;
  for (const auto& tag : tags) {
    out += "- " + tag.phrase;
    for (const auto& box : tag.boxes) out += " " + FormatBox(box);
    out += '\n';
  }
  return out;
}

std::string WithoutPrefix(std::string field, std::string_view prefix) {
  if (field.size() >= prefix.size() &&
      ToLower(field.substr(0, prefix.size())) == prefix) {
    field = Trim(field.substr(prefix.size()));
  }
  return field;
}

// Splits "Q: ... | A: ..." into (question, answer); false if the line does
// not have that shape.
bool SplitQaLine(std::string_view raw, std::string& question,
                 std::string& answer) {
  std::string line = Trim(raw);
  if (!line.empty() && (line[0] == '-' || line[0] == '*')) line = Trim(line.substr(1));
  const std::size_t bar = line.rfind('|');
  if (bar == std::string::npos) return false;
  question = WithoutPrefix(Trim(line.substr(0, bar)), "q:");
  answer = WithoutPrefix(Trim(line.substr(bar + 1)), "a:");
  return !question.empty() && !answer.empty();
}

bool HasReservedBracket(std::string_view text) {
  return text.find_first_of("[]") != std::string_view::npos;
}

VqaSample PlainSample(std::string question, std::string answer, VqaKind kind,
                      std::string subkind) {
  VqaSample s;
  s.question.AppendText(question);
  s.answer.AppendText(answer);
  s.kind = kind;
  s.subkind = std::move(subkind);
  return s;
}

std::set<std::string> TokenSet(std::string_view text) {
  auto tokens = ContentTokens(text);
  return {tokens.begin(), tokens.end()};
}

bool Shares(const std::set<std::string>& a, const std::set<std::string>& b) {
  return std::any_of(a.begin(), a.end(), [&](const std::string& t) { return b.contains(t); });
}

std::optional<Span> FindMention(std::string_view text, const VqaTag& tag) {
  if (auto pos = FindWord(text, Trim(tag.phrase))) {
    return Span{*pos, Trim(tag.phrase).size()};
  }
  const std::string head = HeadNoun(tag.phrase);
  if (auto pos = FindWord(text, head)) return Span{*pos, head.size()};
  for (const auto& token : ContentTokens(tag.phrase)) {
    if (auto pos = FindWord(text, token)) return Span{*pos, token.size()};
  }
  return std::nullopt;
}

GroundedText Wrap(std::string_view text, Span span,
                  const std::vector<BoxRef>& boxes) {
  GroundedText out;
  out.AppendText(text.substr(0, span.begin));
  out.AppendSegment({std::string(text.substr(span.begin, span.length)), boxes});
  out.AppendText(text.substr(span.begin + span.length));
  return out;
}

}  // namespace

std::string_view PlacementName(Placement placement) {
  switch (placement) {
    case Placement::kNone:
      return "none";
    case Placement::kReferring:
      return "referring";
    case Placement::kGrounding:
      return "grounding";
  }
  return "none";
}

std::string BinaryQaPrompt(std::string_view description,
                           const std::vector<VqaTag>& tags) {
  std::string prompt =
      "You write yes/no questions about the quality of an image, using only "
      "its quality description.\n"
      "Key objects or regions (with boxes):\n";
  prompt += ObjectList(tags);
  prompt +=
      "Every question must mention one of these objects or regions.\n"
      "For questions whose answer follows directly from the description, the "
      "answer is Yes.\n"
      "Also write questions that make a plausible quality claim about one of "
      "these objects which the description does not support; the answer to "
      "those is No.\n"
      "Output one pair per line as: Q: <question> | A: <Yes or No>\n\n"
      "Description:\n";
  prompt += description;
  prompt += '\n';
  return prompt;
}

std::string OpenQaPrompt(std::string_view description,
                         const std::vector<VqaTag>& tags) {
  std::string prompt =
      "You write open questions about the quality of an image, using only its "
      "quality description.\n"
      "Key objects or regions (with boxes):\n";
  prompt += ObjectList(tags);
  prompt +=
      "Every question must mention one of these objects or regions and start "
      "with What, Why or How: What asks about low-level attributes or "
      "distortion types, Why asks for the cause of the quality, How asks for "
      "a perceptual degree.\n"
      "Answers must follow from the description and be short phrases of at "
      "most 8 words (for example: Noise, Medium).\n"
      "Output one pair per line as: Q: <question> | A: <answer>\n\n"
      "Description:\n";
  prompt += description;
  prompt += '\n';
  return prompt;
}

GenResult ParseBinaryReply(std::string_view reply) {
  GenResult result;
  bool any_line = false;
  for (const auto& line : SplitLines(reply)) {
    std::string question, answer;
    if (!SplitQaLine(line, question, answer)) continue;
    any_line = true;
    if (HasReservedBracket(question) || HasReservedBracket(answer)) {
      result.warnings.push_back("bracket in QA pair dropped: " + question);
      continue;
    }
    const auto words = WordTokens(answer);
    if (words.size() != 1 || (words[0] != "yes" && words[0] != "no")) {
      result.warnings.push_back("binary answer is not Yes/No: " + answer);
      continue;
    }
    const std::string normalized = words[0] == "yes" ? "Yes" : "No";
    result.samples.push_back(
        PlainSample(question, normalized, VqaKind::kY, normalized));
  }
  if (!any_line) result.warnings.push_back("binary QA reply unparseable");
  return result;
}

GenResult ParseOpenReply(std::string_view reply) {
  GenResult result;
  bool any_line = false;
  for (const auto& line : SplitLines(reply)) {
    std::string question, answer;
    if (!SplitQaLine(line, question, answer)) continue;
    any_line = true;
    if (HasReservedBracket(question) || HasReservedBracket(answer)) {
      result.warnings.push_back("bracket in QA pair dropped: " + question);
      continue;
    }
    const auto qwords = WordTokens(question);
    std::string subkind;
    if (!qwords.empty()) {
      if (qwords[0] == "what" || qwords[0] == "which") subkind = "What";
      if (qwords[0] == "why") subkind = "Why";
      if (qwords[0] == "how") subkind = "How";
    }
    if (subkind.empty()) {
      result.warnings.push_back("open question is not What/Why/How: " + question);
      continue;
    }
    while (!answer.empty() && answer.back() == '.') answer.pop_back();
    const std::size_t n = WordTokens(answer).size();
    if (n == 0 || n > kMaxShortAnswerWords) {
      result.warnings.push_back("open answer is not a short phrase: " + answer);
      continue;
    }
    result.samples.push_back(PlainSample(question, answer, VqaKind::kW, subkind));
  }
  if (!any_line) result.warnings.push_back("open QA reply unparseable");
  return result;
}

GenResult GenBinary(std::string_view description,
                    const std::vector<VqaTag>& tags, TextCompleter& completer) {
  return ParseBinaryReply(completer.Complete(BinaryQaPrompt(description, tags)));
}

GenResult GenOpen(std::string_view description, const std::vector<VqaTag>& tags,
                  TextCompleter& completer) {
  return ParseOpenReply(completer.Complete(OpenQaPrompt(description, tags)));
}

bool KeywordFilter(const VqaSample& sample, const std::vector<VqaTag>& tags) {
  const auto qa = TokenSet(StripCoordinates(sample.question) + " " +
                           StripCoordinates(sample.answer));
  return std::any_of(tags.begin(), tags.end(), [&](const VqaTag& tag) {
    return Shares(qa, TokenSet(tag.phrase));
  });
}

VqaSample AttachBoxes(VqaSample sample, const std::vector<VqaTag>& tags,
                      std::uint64_t seed) {
  sample.placement = Placement::kNone;
  const std::string question = StripCoordinates(sample.question);
  const std::string answer = StripCoordinates(sample.answer);
  const auto qtokens = TokenSet(question);
  const auto atokens = TokenSet(answer);
  const VqaTag* tag = nullptr;
  for (const auto& t : tags) {
    if (Shares(qtokens, TokenSet(t.phrase))) {
      tag = &t;
      break;
    }
  }
  if (tag == nullptr) {
    for (const auto& t : tags) {
      if (Shares(atokens, TokenSet(t.phrase))) {
        tag = &t;
        break;
      }
    }
  }
  if (tag == nullptr || tag->boxes.empty()) return sample;

  std::mt19937_64 rng(seed);
  const bool want_grounding = sample.kind == VqaKind::kW && (rng() & 1) == 1;
  const auto question_span = FindMention(question, *tag);

  auto refer = [&]() {
    sample.question = Wrap(question, *question_span, tag->boxes);
    sample.placement = Placement::kReferring;
  };
  if (!want_grounding) {
    if (question_span) {
      refer();
      return sample;
    }
    if (sample.kind == VqaKind::kY) return sample;
  }
  if (const auto answer_span = FindMention(answer, *tag)) {
    sample.answer = Wrap(answer, *answer_span, tag->boxes);
    sample.placement = Placement::kGrounding;
    return sample;
  }
  std::string phrase = Trim(tag->phrase);
  // "The dog" opened a sentence in the description; mid-answer it reads "the dog".
  if (phrase.size() > 1 && std::isupper(static_cast<unsigned char>(phrase[0])) &&
      std::islower(static_cast<unsigned char>(phrase[1]))) {
    phrase[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(phrase[0])));
  }
  if (WordTokens(answer + " in " + phrase).size() <= kMaxShortAnswerWords) {
    GroundedText grounded;
    grounded.AppendText(answer + " in ");
    grounded.AppendSegment({phrase, tag->boxes});
    sample.answer = std::move(grounded);
    sample.placement = Placement::kGrounding;
    return sample;
  }
  if (question_span) refer();
  return sample;
}

std::vector<std::size_t> BalanceIndices(const std::vector<VqaSample>& pool,
                                        std::uint64_t seed) {
  std::vector<std::size_t> yes, no, open;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].kind == VqaKind::kW) {
      open.push_back(i);
    } else if (pool[i].subkind == "Yes") {
      yes.push_back(i);
    } else {
      no.push_back(i);
    }
  }
  const std::size_t per_answer = std::min({yes.size(), no.size(), open.size() / 2});
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates on raw engine output; std::shuffle and the standard
  // distributions are not reproducible across library implementations.
  auto choose = [&rng](std::vector<std::size_t>& v, std::size_t keep) {
    for (std::size_t i = 0; i < keep; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng() % (v.size() - i));
      std::swap(v[i], v[j]);
    }
    v.resize(keep);
  };
  choose(yes, per_answer);
  choose(no, per_answer);
  choose(open, 2 * per_answer);
  std::vector<std::size_t> kept;
  kept.insert(kept.end(), yes.begin(), yes.end());
  kept.insert(kept.end(), no.begin(), no.end());
  kept.insert(kept.end(), open.begin(), open.end());
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<VqaSample> Balance(std::vector<VqaSample> pool, std::uint64_t seed) {
  std::vector<VqaSample> out;
  for (std::size_t i : BalanceIndices(pool, seed)) out.push_back(std::move(pool[i]));
  return out;
}

std::vector<VqaTag> TagsFromAnswer(const GroundedText& answer) {
  std::vector<VqaTag> tags;
  for (const auto& piece : answer.pieces) {
    if (const auto* seg = std::get_if<GroundedSegment>(&piece)) {
      tags.push_back({seg->phrase, seg->boxes});
    }
  }
  return tags;
}

DesGeneration GenerateForDes(const AnnotatedSample& des,
                             TextCompleter& completer, const GridSpec& grid,
                             std::uint64_t seed) {
  DesGeneration out;
  const GroundedText answer =
      Parse(des.answer, {BoxMode::kMixed, ParseMode::kStrict, grid}).text;
  const auto tags = TagsFromAnswer(answer);
  if (tags.empty()) {
    out.warnings.push_back("no grounded objects, nothing to ask");
    return out;
  }
  const std::string description = StripCoordinates(answer);
  GenResult binary = GenBinary(description, tags, completer);
  GenResult open = GenOpen(description, tags, completer);
  out.warnings = std::move(binary.warnings);
  out.warnings.insert(out.warnings.end(), open.warnings.begin(), open.warnings.end());

  std::vector<VqaSample> generated = std::move(binary.samples);
  for (auto& s : open.samples) generated.push_back(std::move(s));
  for (std::size_t k = 0; k < generated.size(); ++k) {
    VqaSample& s = generated[k];
    if (!KeywordFilter(s, tags)) {
      out.warnings.push_back("unrelated QA dropped: " +
                             StripCoordinates(s.question));
      continue;
    }
    s.image = des.image;
    out.samples.push_back(
        AttachBoxes(std::move(s), tags, DeriveSeed(seed, des.id + "#" + std::to_string(k))));
  }
  return out;
}

AnnotatedSample ToAnnotatedSample(const VqaSample& sample, std::string id,
                                  std::string source, std::uint64_t seed,
                                  const GridSpec& grid) {
  AnnotatedSample out;
  out.id = std::move(id);
  out.image = sample.image;
  out.task = sample.kind == VqaKind::kY ? Task::kVqaY : Task::kVqaW;
  out.question = Serialize(sample.question, BoxMode::kMixed, grid);
  out.answer = Serialize(sample.answer, BoxMode::kMixed, grid);
  out.metadata.source = std::move(source);
  out.metadata.seed = seed;
  out.metadata.pipeline_version = std::string(kPipelineVersion);
  out.metadata.subkind = sample.subkind;
  out.metadata.placement = std::string(PlacementName(sample.placement));
  return out;
}

}  // namespace giqa
