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
#include "giqa/annotation_pipeline.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <random>
#include <set>

#include "giqa/box_geometry.h"
#include "giqa/errors.h"
#include "giqa/parallel.h"
#include "giqa/text_util.h"

namespace giqa {
namespace {

constexpr std::string_view kNoneMarker = "NONE";

const std::set<std::string, std::less<>> kWholeImageWords = {
    "image", "photo", "picture", "background", "photograph"};
const std::set<std::string, std::less<>> kWholeImageModifiers = {
    "whole", "entire", "overall"};
const std::set<std::string, std::less<>> kHeadMarkers = {
    "wearing", "with",  "in",    "on",      "of",   "at",
    "near",    "that",  "which", "who",     "holding", "under",
    "behind",  "from",  "by",    "beside",  "against"};

std::string StripBullet(std::string_view line) {
  std::string s = Trim(line);
  if (!s.empty() && (s[0] == '-' || s[0] == '*')) return Trim(s.substr(1));
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) {
    return Trim(s.substr(i + 1));
  }
  return s;
}

std::vector<std::string> SplitFields(std::string_view line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(sep, start);
    fields.push_back(Trim(line.substr(start, end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return fields;
}

struct Mention {
  std::size_t begin = 0;
  std::size_t length = 0;
  std::size_t tag = 0;
};

bool Overlaps(const Mention& a, const Mention& b) {
  return a.begin < b.begin + b.length && b.begin < a.begin + a.length;
}

std::vector<NormBox> CapBoxes(std::vector<NormBox> boxes, std::size_t cap) {
  if (boxes.size() <= cap) return boxes;
  std::vector<std::size_t> order(boxes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  // Largest first; ties keep the earlier box.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return Area(boxes[a]) > Area(boxes[b]);
  });
  order.resize(cap);
  std::sort(order.begin(), order.end());
  std::vector<NormBox> kept;
  for (std::size_t i : order) kept.push_back(boxes[i]);
  return kept;
}

std::string RecordId(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "des-%06zu", index + 1);
  return buf;
}

}  // namespace

std::string_view EffectName(Effect effect) {
  switch (effect) {
    case Effect::kNoImpact:
      return "no impact";
    case Effect::kPositive:
      return "positive";
    case Effect::kNegative:
      return "negative";
  }
  return "negative";
}

std::optional<Effect> ParseEffect(std::string_view text) {
  const auto words = WordTokens(text);
  std::string joined;
  for (const auto& w : words) joined += w;
  if (joined == "noimpact" || joined == "none" || joined == "neutral") {
    return Effect::kNoImpact;
  }
  if (joined == "positive") return Effect::kPositive;
  if (joined == "negative") return Effect::kNegative;
  return std::nullopt;
}

std::vector<SourceRecord> ReadManifest(const std::filesystem::path& path) {
  const std::string content = ReadTextFile(path);
  const auto base = path.parent_path();
  std::vector<SourceRecord> records;
  const auto lines = SplitLines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (Trim(line).empty() || line[0] == '#') continue;
    const auto fields = SplitFields(line, '\t');
    if (fields.size() < 2 || fields.size() > 3) {
      throw std::invalid_argument("manifest line " + std::to_string(i + 1) +
                                  ": expected image<TAB>description[<TAB>source]");
    }
    SourceRecord record;
    record.image = fields[0];
    std::filesystem::path p(fields[0]);
    record.image_path = p.is_absolute() ? p : base / p;
    record.description = fields[1];
    if (fields.size() == 3) record.source = fields[2];
    records.push_back(std::move(record));
  }
  return records;
}

std::string TagExtractionPrompt(std::string_view description) {
  std::string prompt =
      "You read image quality descriptions and list the key objects or "
      "regions they mention.\n"
      "Output one line per object in the form:\n"
      "phrase | quality | effect\n"
      "- phrase: the description phrase for the object, copied exactly from "
      "the text (keep distinguishing words such as \"the man wearing a white "
      "t-shirt\").\n"
      "- quality: a short word or phrase for the object's quality (for "
      "example clear, blurry, noisy, overexposed).\n"
      "- effect: the object's effect on the overall image quality, one of: "
      "no impact, positive, negative.\n"
      "Do not list the image as a whole. If no objects are mentioned, output "
      "NONE.\n\n"
      "Description:\n";
  prompt += description;
  prompt += '\n';
  return prompt;
}

std::optional<std::vector<ObjectTag>> ParseTagReply(std::string_view reply) {
  std::vector<ObjectTag> tags;
  bool saw_none = false;
  for (const auto& raw : SplitLines(reply)) {
    const std::string line = StripBullet(raw);
    if (line.empty()) continue;
    if (line == kNoneMarker) {
      saw_none = true;
      continue;
    }
    const auto fields = SplitFields(line, '|');
    if (fields.size() != 3 || fields[0].empty()) continue;
    const auto effect = ParseEffect(fields[2]);
    if (!effect) continue;
    tags.push_back({fields[0], fields[1], *effect});
  }
  if (tags.empty() && !saw_none) return std::nullopt;
  return tags;
}

bool IsWholeImageReferent(std::string_view phrase) {
  std::vector<std::string> rest;
  for (auto& token : ContentTokens(phrase)) {
    if (!kWholeImageModifiers.contains(token)) rest.push_back(std::move(token));
  }
  return rest.size() == 1 && kWholeImageWords.contains(rest.front());
}

std::vector<ObjectTag> ExtractTags(std::string_view description,
                                   TextCompleter& completer) {
  if (Trim(description).empty()) throw StageError("empty description");
  const std::string prompt = TagExtractionPrompt(description);
  std::optional<std::vector<ObjectTag>> parsed;
  for (int attempt = 0; attempt < 2 && !parsed; ++attempt) {
    parsed = ParseTagReply(completer.Complete(prompt));
  }
  if (!parsed) throw StageError("tag extraction reply unparseable after retry");
  std::vector<ObjectTag> kept;
  for (auto& tag : *parsed) {
    if (tag.effect == Effect::kNoImpact) continue;
    if (IsWholeImageReferent(tag.phrase)) continue;
    kept.push_back(std::move(tag));
  }
  return kept;
}

std::vector<NormBox> Locate(const Image& image, const ObjectTag& tag,
                            Detector& detector, QualityVerifier& verifier,
                            const PipelineConfig& config) {
  if (Trim(tag.phrase).empty()) throw DomainError("tag without phrase");
  std::vector<NormBox> boxes;
  for (const auto& d : detector.Detect(image.encoded(), tag.phrase)) {
    boxes.push_back(d.box);
  }
  if (boxes.empty()) return boxes;
  boxes = Refine(image, boxes, tag.quality, verifier, config.refine);
  return CapBoxes(std::move(boxes), config.max_boxes_per_object);
}

std::string HeadNoun(std::string_view phrase) {
  const auto words = WordTokens(phrase);
  if (words.empty()) return {};
  for (std::size_t i = 1; i < words.size(); ++i) {
    if (kHeadMarkers.contains(words[i])) return words[i - 1];
  }
  return words.back();
}

BuiltAnswer BuildAnswer(std::string_view description,
                        const std::vector<LocatedTag>& located,
                        const GridSpec& grid) {
  BuiltAnswer built;
  std::vector<Mention> candidates;
  for (std::size_t t = 0; t < located.size(); ++t) {
    const auto& tag = located[t].tag;
    if (located[t].boxes.empty()) continue;
    std::string needle = Trim(tag.phrase);
    auto pos = FindWord(description, needle);
    if (!pos) {
      needle = HeadNoun(tag.phrase);
      pos = FindWord(description, needle);
    }
    if (!pos) {
      built.warnings.push_back("no mention of '" + tag.phrase +
                               "' in the description; tag skipped");
      continue;
    }
    candidates.push_back({*pos, needle.size(), t});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Mention& a, const Mention& b) {
                     if (a.length != b.length) return a.length > b.length;
                     return a.begin < b.begin;
                   });
  std::vector<Mention> accepted;
  for (const auto& m : candidates) {
    const bool clash = std::any_of(accepted.begin(), accepted.end(),
                                   [&](const Mention& a) { return Overlaps(a, m); });
    if (clash) {
      built.warnings.push_back("mention of '" + located[m.tag].tag.phrase +
                               "' overlaps a longer mention; tag skipped");
      continue;
    }
    accepted.push_back(m);
  }
  std::sort(accepted.begin(), accepted.end(),
            [](const Mention& a, const Mention& b) { return a.begin < b.begin; });

  std::size_t cursor = 0;
  for (const auto& m : accepted) {
    built.answer.AppendText(description.substr(cursor, m.begin - cursor));
    GroundedSegment segment;
    segment.phrase = std::string(description.substr(m.begin, m.length));
    for (const auto& box : located[m.tag].boxes) {
      const BoxRef ref = Discretize(box, grid);
      if (std::find(segment.boxes.begin(), segment.boxes.end(), ref) ==
          segment.boxes.end()) {
        segment.boxes.push_back(ref);
      }
    }
    built.answer.AppendSegment(std::move(segment));
    cursor = m.begin + m.length;
  }
  built.answer.AppendText(description.substr(cursor));
  return built;
}

const std::array<std::string_view, 15>& QuestionPool() {
  static constexpr std::array<std::string_view, 15> kPool = {
      "Describe the quality of this image, and locate the key objects that "
      "affect it.",
      "Can you evaluate the quality of this image and point out the regions "
      "that matter?",
      "How would you assess the quality of this image? Include the locations "
      "of important objects.",
      "Please give a detailed quality assessment of this image with the "
      "positions of key objects.",
      "Evaluate the image quality in detail and ground the objects that "
      "influence it.",
      "What is the quality of this image? Describe it and mark the relevant "
      "regions.",
      "Provide a detailed description of this image's quality, including "
      "where the key objects are.",
      "Assess the visual quality of this picture and give the locations of "
      "the objects you mention.",
      "Could you describe the image quality and indicate the regions that "
      "affect it?",
      "Give a quality evaluation of this image, with bounding boxes for the "
      "important objects.",
      "Analyze the quality of this image in detail and locate the key "
      "regions.",
      "How good is the quality of this image? Describe it and point out the "
      "relevant objects.",
      "Describe the image quality, grounding the objects that have an impact "
      "on it.",
      "Please rate and describe the quality of this image, with the "
      "positions of key objects.",
      "Explain the quality of this image and specify where the important "
      "objects are located.",
  };
  return kPool;
}

std::string SampleQuestion(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return std::string(QuestionPool()[rng() % QuestionPool().size()]);
}

DesSample Annotate(const SourceRecord& record, const Backends& backends,
                   const PipelineConfig& config, std::uint64_t record_seed) {
  if (Trim(record.description).empty()) throw StageError("empty description");
  if (record.description.find_first_of("[]") != std::string::npos) {
    throw StageError("description contains reserved '[' or ']'");
  }
  const Image image = Image::Load(record.image_path);

  DesSample out;
  out.image = record.image;
  for (auto& tag : ExtractTags(record.description, *backends.completer)) {
    LocatedTag located{tag, {}};
    located.boxes =
        Locate(image, tag, *backends.detector, *backends.verifier, config);
    out.located.push_back(std::move(located));
  }
  BuiltAnswer built = BuildAnswer(record.description, out.located, config.grid);
  out.answer = std::move(built.answer);
  out.warnings = std::move(built.warnings);
  out.question = SampleQuestion(record_seed);

  const std::string wire = Serialize(out.answer, BoxMode::kGrid, config.grid);
  if (Parse(wire, {BoxMode::kGrid, ParseMode::kStrict, config.grid}).text !=
      out.answer) {
    throw StageError("answer does not survive a strict parse");
  }
  return out;
}

std::vector<RecordOutcome> AnnotateAll(const std::vector<SourceRecord>& records,
                                       const Backends& backends,
                                       const PipelineConfig& config,
                                       int workers) {
  std::vector<RecordOutcome> outcomes(records.size());
  ParallelFor(records.size(), workers, [&](std::size_t i) {
    RecordOutcome& outcome = outcomes[i];
    outcome.index = i;
    const std::string id = RecordId(i);
    const std::uint64_t seed = DeriveSeed(config.seed, id);
    try {
      DesSample des = Annotate(records[i], backends, config, seed);
      AnnotatedSample sample;
      sample.id = id;
      sample.image = des.image;
      sample.task = Task::kDes;
      sample.question = des.question;
      sample.answer = Serialize(des.answer, BoxMode::kGrid, config.grid);
      sample.metadata.source = records[i].source;
      sample.metadata.seed = seed;
      sample.metadata.pipeline_version = std::string(kPipelineVersion);
      outcome.sample = std::move(sample);
      outcome.warnings = std::move(des.warnings);
    } catch (const std::exception& e) {
      outcome.error = e.what();
    }
  });
  return outcomes;
}

}  // namespace giqa
