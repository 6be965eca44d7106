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
#include "giqa/box_refine.h"

#include "giqa/box_geometry.h"
#include "giqa/errors.h"

namespace giqa {

void RefineConfig::Validate() const {
  if (!(area_threshold > 0.0 && area_threshold <= 1.0)) {
    throw DomainError("area_threshold must be in (0, 1]");
  }
  if (!(coverage_threshold > 0.0 && coverage_threshold <= 1.0)) {
    throw DomainError("coverage_threshold must be in (0, 1]");
  }
}

std::string QualityQuestion(std::string_view quality) {
  return "Is the image quality " + std::string(quality) + "?";
}

std::vector<NormBox> IqaFilter(const Image& image,
                               const std::vector<NormBox>& boxes,
                               std::string_view quality,
                               QualityVerifier& verifier,
                               const RefineConfig& config) {
  if (boxes.size() < config.filter_min_candidates) return boxes;
  const std::string question = QualityQuestion(quality);
  std::vector<NormBox> kept;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const Bytes patch = image.CropPng(boxes[i]);
    QualityAnswer answer;
    try {
      answer = verifier.VerifyQuality(patch, question);
    } catch (const BackendError& e) {
      throw FilterError(i, "quality verifier failed on box " +
                               std::to_string(i) + ": " + e.what());
    }
    if (answer != QualityAnswer::kNo) kept.push_back(boxes[i]);
  }
  if (kept.empty()) return boxes;
  return kept;
}

bool ShouldMerge(const NormBox& current, const NormBox& candidate,
                 const RefineConfig& config) {
  return (Area(current) < config.area_threshold &&
          IsTouch(current, candidate)) ||
         CoverageRatio(current, candidate) > config.coverage_threshold;
}

std::vector<NormBox> BoxMergePass(std::vector<NormBox> boxes,
                                  const RefineConfig& config) {
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    std::size_t j = i + 1;
    while (j < boxes.size()) {
      if (ShouldMerge(boxes[i], boxes[j], config)) {
        boxes[i] = Merge(boxes[i], boxes[j]);
        boxes.erase(boxes.begin() + static_cast<std::ptrdiff_t>(j));
      } else {
        ++j;
      }
    }
  }
  return boxes;
}

std::vector<NormBox> BoxMerge(std::vector<NormBox> boxes,
                              const RefineConfig& config) {
  std::size_t before = 0;
  do {
    before = boxes.size();
    boxes = BoxMergePass(std::move(boxes), config);
  } while (boxes.size() < before);
  return boxes;
}

std::vector<NormBox> Refine(const Image& image,
                            const std::vector<NormBox>& boxes,
                            std::string_view quality,
                            QualityVerifier& verifier,
                            const RefineConfig& config) {
  config.Validate();
  return BoxMerge(IqaFilter(image, boxes, quality, verifier, config), config);
}

}  // namespace giqa
