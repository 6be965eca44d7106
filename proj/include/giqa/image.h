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

#ifndef GIQA_IMAGE_H_
#define GIQA_IMAGE_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <opencv2/core.hpp>

#include "giqa/coord_codec.h"

namespace giqa {

using Bytes = std::vector<std::uint8_t>;

// A decoded raster image together with the encoded bytes it came from.
class Image {
 public:
  // Throws DomainError if the bytes are not a decodable image.
  static Image Decode(Bytes encoded);
  static Image Load(const std::filesystem::path& path);

  int width() const { return pixels_.cols; }
  int height() const { return pixels_.rows; }
  const Bytes& encoded() const { return encoded_; }
  const cv::Mat& pixels() const { return pixels_; }

  // PNG-encoded crop of the pixel rectangle covering `box`. The rectangle is
  // widened to at least one pixel per axis.
  Bytes CropPng(const NormBox& box) const;

 private:
  Image(Bytes encoded, cv::Mat pixels)
      : encoded_(std::move(encoded)), pixels_(std::move(pixels)) {}

  Bytes encoded_;
  cv::Mat pixels_;
};

bool IsDecodableImage(std::span<const std::uint8_t> bytes);
Bytes ReadFileBytes(const std::filesystem::path& path);

}  // namespace giqa

#endif  // GIQA_IMAGE_H_
