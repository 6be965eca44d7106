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

#ifndef GIQA_BOX_GEOMETRY_H_
#define GIQA_BOX_GEOMETRY_H_

#include "giqa/coord_codec.h"

namespace giqa {

// Per-axis tolerance for boundary contact in IsTouch.
inline constexpr double kTouchEpsilon = 1e-9;

double Area(const NormBox& box);
double IntersectionArea(const NormBox& a, const NormBox& b);

// Intersection over union; 0 when the union is empty.
double Iou(const NormBox& a, const NormBox& b);

// Intersection over the smaller of the two areas; 0 when that area is 0.
double CoverageRatio(const NormBox& a, const NormBox& b);

// True iff the closed boxes overlap or share a boundary.
bool IsTouch(const NormBox& a, const NormBox& b);

// Smallest axis-aligned box containing both.
NormBox Merge(const NormBox& a, const NormBox& b);

// True iff `outer` contains `inner` (closed containment).
bool Contains(const NormBox& outer, const NormBox& inner);

}  // namespace giqa

#endif  // GIQA_BOX_GEOMETRY_H_
