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

// Small text helpers shared by the pipeline and the evaluator.

#ifndef GIQA_TEXT_UTIL_H_
#define GIQA_TEXT_UTIL_H_

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace giqa {

std::string ToLower(std::string_view text);

// Trims and collapses every whitespace run to a single space.
std::string CollapseWhitespace(std::string_view text);

// Lowercased word tokens. Any ASCII character that is not a letter or digit
// separates tokens; bytes >= 0x80 are kept as word characters so UTF-8 words
// survive intact.
std::vector<std::string> WordTokens(std::string_view text);

// WordTokens with the bundled stopword list removed.
std::vector<std::string> ContentTokens(std::string_view text);

// The bundled 50-word English stopword list (version 1).
const std::set<std::string, std::less<>>& Stopwords();

// Scans for the first standalone, case-insensitive "yes" or "no" word.
// Returns true for yes, false for no, nullopt when neither occurs.
std::optional<bool> FirstYesNo(std::string_view text);

// Position and length of the first case-insensitive occurrence of `needle`
// in `haystack` that starts and ends on a word boundary.
std::optional<std::size_t> FindWord(std::string_view haystack,
                                    std::string_view needle);

std::string Sha256Hex(std::string_view data);
std::string Sha256Hex(std::span<const std::uint8_t> data);
std::string Base64Encode(std::span<const std::uint8_t> data);

// Stable 64-bit seed derived from a base seed and a label (SHA-256 based, so
// identical on every platform).
std::uint64_t DeriveSeed(std::uint64_t base, std::string_view label);

std::vector<std::string> SplitLines(std::string_view text);
std::string Trim(std::string_view text);

}  // namespace giqa

#endif  // GIQA_TEXT_UTIL_H_
