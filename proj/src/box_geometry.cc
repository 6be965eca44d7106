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
#include "giqa/box_geometry.h"

#include <algorithm>

namespace giqa {

double Area(const NormBox& box) {
  return std::max(0.0, box.x2 - box.x1) * std::max(0.0, box.y2 - box.y1);
}

double IntersectionArea(const NormBox& a, const NormBox& b) {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double Iou(const NormBox& a, const NormBox& b) {
  const double inter = IntersectionArea(a, b);
  const double uni = Area(a) + Area(b) - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double CoverageRatio(const NormBox& a, const NormBox& b) {
  const double smaller = std::min(Area(a), Area(b));
  if (smaller <= 0.0) return 0.0;
  return std::clamp(IntersectionArea(a, b) / smaller, 0.0, 1.0);
}

bool IsTouch(const NormBox& a, const NormBox& b) {
  return a.x1 <= b.x2 + kTouchEpsilon && b.x1 <= a.x2 + kTouchEpsilon &&
         a.y1 <= b.y2 + kTouchEpsilon && b.y1 <= a.y2 + kTouchEpsilon;
}

NormBox Merge(const NormBox& a, const NormBox& b) {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2),
          std::max(a.y2, b.y2)};
}

bool Contains(const NormBox& outer, const NormBox& inner) {
  return outer.x1 <= inner.x1 && outer.y1 <= inner.y1 &&
         outer.x2 >= inner.x2 && outer.y2 >= inner.y2;
}

}  // namespace giqa
