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

// Quality question-answer generation from grounded descriptions.
//
// Binary questions are answered "Yes" when the description supports them and
// "No" for plausible quality claims it does not support. Open questions
// (What/Why/How) take short-phrase answers. Generated pairs must mention a
// grounded object; its boxes are then attached either to the question
// (referring) or to the answer (grounding).

#ifndef GIQA_VQA_GENERATOR_H_
#define GIQA_VQA_GENERATOR_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "giqa/backends.h"
#include "giqa/dataset_store.h"
#include "giqa/grounded_text.h"

namespace giqa {

enum class VqaKind { kY, kW };
enum class Placement { kNone, kReferring, kGrounding };

std::string_view PlacementName(Placement placement);

// An object of the source description with the boxes it was grounded to.
struct VqaTag {
  std::string phrase;
  std::vector<BoxRef> boxes;
};

struct VqaSample {
  std::string image;
  GroundedText question;
  GroundedText answer;
  VqaKind kind = VqaKind::kY;
  std::string subkind;  // Yes|No for kY, What|Why|How for kW
  Placement placement = Placement::kNone;
};

struct GenResult {
  std::vector<VqaSample> samples;
  std::vector<std::string> warnings;
};

std::string BinaryQaPrompt(std::string_view description,
                           const std::vector<VqaTag>& tags);
std::string OpenQaPrompt(std::string_view description,
                         const std::vector<VqaTag>& tags);

// Parses "Q: <question> | A: <answer>" lines into unfiltered samples.
GenResult ParseBinaryReply(std::string_view reply);
GenResult ParseOpenReply(std::string_view reply);

GenResult GenBinary(std::string_view description,
                    const std::vector<VqaTag>& tags, TextCompleter& completer);
GenResult GenOpen(std::string_view description, const std::vector<VqaTag>& tags,
                  TextCompleter& completer);

// True iff question or answer shares a content token with some tag phrase.
bool KeywordFilter(const VqaSample& sample, const std::vector<VqaTag>& tags);

// Places the boxes of the matched tag. Binary samples are always referring,
// since their answers must stay exactly "Yes" or "No"; open samples flip a
// seeded fair coin.
VqaSample AttachBoxes(VqaSample sample, const std::vector<VqaTag>& tags,
                      std::uint64_t seed);

// Downsamples so that |Yes| = |No| and |Y| = |W|. Retained samples keep their
// pool order.
std::vector<VqaSample> Balance(std::vector<VqaSample> pool, std::uint64_t seed);
// Ascending pool indices of the samples Balance keeps.
std::vector<std::size_t> BalanceIndices(const std::vector<VqaSample>& pool,
                                        std::uint64_t seed);

// Objects of a DES answer as VQA tags.
std::vector<VqaTag> TagsFromAnswer(const GroundedText& answer);

struct DesGeneration {
  std::vector<VqaSample> samples;
  std::vector<std::string> warnings;
};

// Generate, filter and attach boxes for one DES sample.
DesGeneration GenerateForDes(const AnnotatedSample& des,
                             TextCompleter& completer, const GridSpec& grid,
                             std::uint64_t seed);

AnnotatedSample ToAnnotatedSample(const VqaSample& sample, std::string id,
                                  std::string source, std::uint64_t seed,
                                  const GridSpec& grid = {});

}  // namespace giqa

#endif  // GIQA_VQA_GENERATOR_H_
