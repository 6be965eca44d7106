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
#include "giqa/coord_codec.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "giqa/errors.h"

namespace giqa {
namespace {

int CellOf(double fraction, int cells) {
  const int cell = static_cast<int>(std::floor(fraction * cells));
  return std::clamp(cell, 0, cells - 1);
}

}  // namespace

void GridSpec::Validate() const {
  if (!IsValid()) {
    throw DomainError("grid dimensions must be positive, got " +
                      std::to_string(n) + "x" + std::to_string(m));
  }
}

bool NormBox::IsValid() const {
  // Written so that NaN fails every comparison.
  return 0.0 <= x1 && x1 <= x2 && x2 <= 1.0 && 0.0 <= y1 && y1 <= y2 &&
         y2 <= 1.0;
}

void NormBox::Validate() const {
  if (!IsValid()) throw DomainError("invalid normalized box " + DebugString());
}

std::string NormBox::DebugString() const {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "(%g,%g,%g,%g)", x1, y1, x2, y2);
  return buf;
}

bool GridBox::IsValid(const GridSpec& grid) const {
  if (!grid.IsValid()) return false;
  if (idx_l < 0 || idx_r < 0 || idx_l >= grid.cells() ||
      idx_r >= grid.cells()) {
    return false;
  }
  return GridRow(idx_l, grid) <= GridRow(idx_r, grid) &&
         GridCol(idx_l, grid) <= GridCol(idx_r, grid);
}

void GridBox::Validate(const GridSpec& grid) const {
  grid.Validate();
  if (!IsValid(grid)) {
    throw DomainError("invalid grid box <" + std::to_string(idx_l) + "," +
                      std::to_string(idx_r) + "> for a " +
                      std::to_string(grid.n) + "x" + std::to_string(grid.m) +
                      " grid");
  }
}

GridBox Discretize(const NormBox& box, const GridSpec& grid) {
  grid.Validate();
  box.Validate();
  GridBox out;
  out.idx_l = CellOf(box.y1, grid.m) * grid.n + CellOf(box.x1, grid.n);
  out.idx_r = CellOf(box.y2, grid.m) * grid.n + CellOf(box.x2, grid.n);
  return out;
}

NormBox Remap(const GridBox& box, const GridSpec& grid) {
  box.Validate(grid);
  NormBox out;
  out.x1 = (GridCol(box.idx_l, grid) + 0.5) / grid.n;
  out.y1 = (GridRow(box.idx_l, grid) + 0.5) / grid.m;
  out.x2 = (GridCol(box.idx_r, grid) + 0.5) / grid.n;
  out.y2 = (GridRow(box.idx_r, grid) + 0.5) / grid.m;
  return out;
}

}  // namespace giqa
