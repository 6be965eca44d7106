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

// Description grounding: turns (image, human quality description) records
// into DES samples whose answers carry boxes for the objects that matter.
//
//   1. tag extraction     completer -> {phrase, quality, effect} per object
//   2. box detection      detector queried with the full phrase
//   3. box refinement     quality filter + merge (box_refine.h)
//   4. fusion             first mention of each object becomes
//                         "[mention](<l,r>)" with discretized boxes

#ifndef GIQA_ANNOTATION_PIPELINE_H_
#define GIQA_ANNOTATION_PIPELINE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "giqa/backends.h"
#include "giqa/box_refine.h"
#include "giqa/coord_codec.h"
#include "giqa/dataset_store.h"
#include "giqa/grounded_text.h"
#include "giqa/image.h"

namespace giqa {

inline constexpr std::string_view kPipelineVersion = "giqa-pipeline/1";

enum class Effect { kNoImpact, kPositive, kNegative };

std::string_view EffectName(Effect effect);
std::optional<Effect> ParseEffect(std::string_view text);

struct ObjectTag {
  std::string phrase;   // description phrase used for detection
  std::string quality;  // e.g. "blurry"
  Effect effect = Effect::kNegative;

  friend bool operator==(const ObjectTag&, const ObjectTag&) = default;
};

struct SourceRecord {
  std::string image;  // as written in the manifest
  std::filesystem::path image_path;  // resolved for loading
  std::string description;
  std::string source;
};

struct LocatedTag {
  ObjectTag tag;
  std::vector<NormBox> boxes;
};

struct PipelineConfig {
  GridSpec grid;
  RefineConfig refine;
  std::size_t max_boxes_per_object = 4;
  std::uint64_t seed = 0;
};

// Manifest lines are "image<TAB>description<TAB>source"; blank lines and
// lines starting with '#' are skipped. Relative image paths resolve against
// the manifest directory.
std::vector<SourceRecord> ReadManifest(const std::filesystem::path& path);

std::string TagExtractionPrompt(std::string_view description);

// Parses the structured tag list. nullopt when the reply has neither a tag
// line nor the NONE marker.
std::optional<std::vector<ObjectTag>> ParseTagReply(std::string_view reply);

// True for phrases that refer to the whole image ("the image", "photo").
bool IsWholeImageReferent(std::string_view phrase);

// Stage 1. Drops no-impact tags and whole-image referents. Throws StageError
// if the reply is unparseable twice.
std::vector<ObjectTag> ExtractTags(std::string_view description,
                                   TextCompleter& completer);

// Stages 2 and 3 for one tag, followed by the per-object box cap (the
// smallest boxes are dropped first).
std::vector<NormBox> Locate(const Image& image, const ObjectTag& tag,
                            Detector& detector, QualityVerifier& verifier,
                            const PipelineConfig& config = {});

// Head noun of a phrase: the word before the first relative or
// prepositional marker ("the man wearing a hat" -> "man"), else the last word.
std::string HeadNoun(std::string_view phrase);

struct BuiltAnswer {
  GroundedText answer;
  std::vector<std::string> warnings;
};

// Stage 4. Longer mentions win when mentions overlap.
BuiltAnswer BuildAnswer(std::string_view description,
                        const std::vector<LocatedTag>& located,
                        const GridSpec& grid = {});

const std::array<std::string_view, 15>& QuestionPool();
std::string SampleQuestion(std::uint64_t seed);

struct DesSample {
  std::string image;
  std::string question;
  GroundedText answer;
  std::vector<LocatedTag> located;
  std::vector<std::string> warnings;
};

// All four stages for one record. Throws on any stage failure.
DesSample Annotate(const SourceRecord& record, const Backends& backends,
                   const PipelineConfig& config, std::uint64_t record_seed);

struct RecordOutcome {
  std::size_t index = 0;
  std::optional<AnnotatedSample> sample;
  std::string error;
  std::vector<std::string> warnings;
};

// Annotates every record on `workers` threads. Outcomes are in input order;
// a failing record never stops the batch.
std::vector<RecordOutcome> AnnotateAll(const std::vector<SourceRecord>& records,
                                       const Backends& backends,
                                       const PipelineConfig& config,
                                       int workers);

}  // namespace giqa

#endif  // GIQA_ANNOTATION_PIPELINE_H_
