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

// Conversion between normalized corner boxes and discretized grid-index
// boxes. The image is divided into n columns by m rows of cells numbered
// row-major from the top-left cell (0) to the bottom-right cell (n*m - 1).

#ifndef GIQA_COORD_CODEC_H_
#define GIQA_COORD_CODEC_H_

#include <compare>
#include <string>

namespace giqa {

struct GridSpec {
  int n = 20;  // columns
  int m = 20;  // rows

  int cells() const { return n * m; }
  bool IsValid() const { return n >= 1 && m >= 1; }
  // Throws DomainError if n or m is non-positive.
  void Validate() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Corners as fractions of image width/height, (x1, y1) top-left.
struct NormBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  bool IsValid() const;
  void Validate() const;
  std::string DebugString() const;

  friend auto operator<=>(const NormBox&, const NormBox&) = default;
};

struct GridBox {
  int idx_l = 0;
  int idx_r = 0;

  bool IsValid(const GridSpec& grid) const;
  void Validate(const GridSpec& grid) const;

  friend auto operator<=>(const GridBox&, const GridBox&) = default;
};

inline int GridRow(int idx, const GridSpec& grid) { return idx / grid.n; }
inline int GridCol(int idx, const GridSpec& grid) { return idx % grid.n; }

// Floor-and-clamp cell assignment of both corners. Throws DomainError for an
// invalid box or grid.
GridBox Discretize(const NormBox& box, const GridSpec& grid = {});

// Maps both indices back to their cell centers. Throws DomainError when an
// index is out of range or the corner order is violated.
NormBox Remap(const GridBox& box, const GridSpec& grid = {});

}  // namespace giqa

#endif  // GIQA_COORD_CODEC_H_
