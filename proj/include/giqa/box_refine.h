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

// Box refinement for one object tag: quality filtering of the candidate
// boxes followed by merging of small touching or mutually covering boxes.

#ifndef GIQA_BOX_REFINE_H_
#define GIQA_BOX_REFINE_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "giqa/backends.h"
#include "giqa/coord_codec.h"
#include "giqa/image.h"

namespace giqa {

struct RefineConfig {
  // Boxes smaller than this fraction of the image absorb touching boxes.
  double area_threshold = 0.256;
  // Pairs whose coverage ratio exceeds this are merged regardless of area.
  double coverage_threshold = 0.95;
  // The quality filter only runs when an object has at least this many boxes.
  std::size_t filter_min_candidates = 2;

  void Validate() const;
};

// A verifier call failed; `box_index` is the position in the input list.
class FilterError : public std::runtime_error {
 public:
  FilterError(std::size_t box_index, const std::string& what)
      : std::runtime_error(what), box_index_(box_index) {}
  std::size_t box_index() const { return box_index_; }

 private:
  std::size_t box_index_;
};

std::string QualityQuestion(std::string_view quality);

// Removes boxes whose patch the verifier answers "No" to. Unparseable replies
// keep the box. If every box would be removed, the input is returned as is.
std::vector<NormBox> IqaFilter(const Image& image,
                               const std::vector<NormBox>& boxes,
                               std::string_view quality,
                               QualityVerifier& verifier,
                               const RefineConfig& config = {});

// The merge predicate for an ordered pair (current R[i], candidate R[j]).
bool ShouldMerge(const NormBox& current, const NormBox& candidate,
                 const RefineConfig& config = {});

// One sequential merge scan. For each i, every j > i is tested against the
// current R[i]; on a merge R[j] is deleted and the same j is re-examined, so a
// grown box can absorb boxes it did not touch before.
std::vector<NormBox> BoxMergePass(std::vector<NormBox> boxes,
                                  const RefineConfig& config = {});

// Repeats BoxMergePass until a pass merges nothing. A single pass can leave a
// mergeable pair behind (a box that grew after an earlier j was passed over),
// so the result of the first pass is not always a fixpoint.
std::vector<NormBox> BoxMerge(std::vector<NormBox> boxes,
                              const RefineConfig& config = {});

std::vector<NormBox> Refine(const Image& image,
                            const std::vector<NormBox>& boxes,
                            std::string_view quality,
                            QualityVerifier& verifier,
                            const RefineConfig& config = {});

}  // namespace giqa

#endif  // GIQA_BOX_REFINE_H_
