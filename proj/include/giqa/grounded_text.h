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

// Interleaved grounded text: natural language with "[phrase](boxes)"
// segments. This is the wire format of every question and answer field.
//
//   segment   := "[" phrase "]" "(" box ("," box)* ")"
//   grid box  := "<" int "," int ">"
//   norm box  := decimal "," decimal "," decimal "," decimal
//
// Phrases are nonempty and cannot contain '[' or ']'. Outside segments both
// bracket characters are reserved; parentheses are ordinary text.

#ifndef GIQA_GROUNDED_TEXT_H_
#define GIQA_GROUNDED_TEXT_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "giqa/coord_codec.h"

namespace giqa {

enum class BoxMode { kGrid, kNorm, kMixed };
enum class ParseMode { kStrict, kLenient };

using BoxRef = std::variant<GridBox, NormBox>;

struct GroundedSegment {
  std::string phrase;
  std::vector<BoxRef> boxes;

  friend bool operator==(const GroundedSegment&,
                         const GroundedSegment&) = default;
};

using TextPiece = std::variant<std::string, GroundedSegment>;

struct GroundedText {
  std::vector<TextPiece> pieces;

  void AppendText(std::string_view text);
  void AppendSegment(GroundedSegment segment);
  bool HasBoxes() const;
  std::size_t BoxCount() const;

  friend bool operator==(const GroundedText&, const GroundedText&) = default;
};

class GroundedTextError : public std::runtime_error {
 public:
  enum class Kind { kMalformedBox, kOutOfRange };

  GroundedTextError(Kind kind, std::size_t offset, const std::string& what)
      : std::runtime_error(what), kind_(kind), offset_(offset) {}

  Kind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

struct ParseOptions {
  BoxMode box_mode = BoxMode::kGrid;
  ParseMode parse_mode = ParseMode::kStrict;
  GridSpec grid;
};

struct ParseDiagnostic {
  GroundedTextError::Kind kind;
  std::size_t offset;
  std::string message;
};

struct ParseResult {
  GroundedText text;
  // [begin, end) byte range of the input consumed by each piece.
  std::vector<std::pair<std::size_t, std::size_t>> sources;
  // Lenient mode only: segments that degraded to plain text.
  std::vector<ParseDiagnostic> diagnostics;
};

// Strict mode throws GroundedTextError on the first problem. Lenient mode
// never throws; malformed segments stay in the text verbatim and are
// reported in `diagnostics`. Lenient mode also tolerates blanks inside box
// groups.
ParseResult Parse(std::string_view raw, const ParseOptions& options = {});

// Throws DomainError when a box does not match `mode`, a box is invalid, a
// segment mixes grid and normalized boxes, or plain text or a phrase
// contains a reserved bracket.
std::string Serialize(const GroundedText& text, BoxMode mode,
                      const GridSpec& grid = {});

// Phrases and plain text with all box groups removed, whitespace collapsed.
// Adjacent segments are separated by a single space.
std::string StripCoordinates(const GroundedText& text);

struct PhraseBox {
  std::string phrase;
  NormBox box;

  friend bool operator==(const PhraseBox&, const PhraseBox&) = default;
};

// Every (phrase, box) pair in order; grid boxes are remapped to cell centers.
std::vector<PhraseBox> ExtractPairs(const GroundedText& text,
                                    const GridSpec& grid = {});

std::string FormatBox(const BoxRef& box);

}  // namespace giqa

#endif  // GIQA_GROUNDED_TEXT_H_
