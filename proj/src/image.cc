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
#include "giqa/image.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include <opencv2/imgcodecs.hpp>

#include "giqa/errors.h"

namespace giqa {

Image Image::Decode(Bytes encoded) {
  if (encoded.empty()) throw DomainError("undecodable image: empty input");
  cv::Mat pixels = cv::imdecode(encoded, cv::IMREAD_COLOR);
  if (pixels.empty()) throw DomainError("undecodable image");
  return Image(std::move(encoded), std::move(pixels));
}

Image Image::Load(const std::filesystem::path& path) {
  return Decode(ReadFileBytes(path));
}

Bytes Image::CropPng(const NormBox& box) const {
  if (!box.IsValid()) {
    throw DomainError("crop outside image: " + box.DebugString());
  }
  const int w = width();
  const int h = height();
  int left = std::clamp(static_cast<int>(std::floor(box.x1 * w)), 0, w - 1);
  int top = std::clamp(static_cast<int>(std::floor(box.y1 * h)), 0, h - 1);
  int right = std::clamp(static_cast<int>(std::ceil(box.x2 * w)), left + 1, w);
  int bottom = std::clamp(static_cast<int>(std::ceil(box.y2 * h)), top + 1, h);
  cv::Mat patch = pixels_(cv::Rect(left, top, right - left, bottom - top));
  Bytes out;
  if (!cv::imencode(".png", patch, out)) {
    throw DomainError("failed to encode crop " + box.DebugString());
  }
  return out;
}

bool IsDecodableImage(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) return false;
  cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1,
              const_cast<std::uint8_t*>(bytes.data()));
  return !cv::imdecode(buf, cv::IMREAD_UNCHANGED).empty();
}

Bytes ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in),
               std::istreambuf_iterator<char>());
}

}  // namespace giqa
