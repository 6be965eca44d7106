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
#include "giqa/grounded_text.h"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <optional>

#include "giqa/errors.h"
#include "giqa/text_util.h"

namespace giqa {
namespace {

using Kind = GroundedTextError::Kind;

bool IsBlank(char c) { return c == ' ' || c == '\t'; }

// Recursive-descent reader for a single "[phrase](boxes)" segment starting at
// a '['. Any failure throws GroundedTextError.
class SegmentReader {
 public:
  SegmentReader(std::string_view raw, std::size_t pos,
                const ParseOptions& options)
      : raw_(raw), pos_(pos), options_(options) {}

  GroundedSegment Read() {
    const std::size_t start = pos_;
    Expect('[');
    const std::size_t close = raw_.find_first_of("[]", pos_);
    if (close == std::string_view::npos || raw_[close] != ']') {
      Fail(Kind::kMalformedBox, start, "unbalanced '['");
    }
    GroundedSegment segment;
    segment.phrase = std::string(raw_.substr(pos_, close - pos_));
    if (Trim(segment.phrase).empty()) {
      Fail(Kind::kMalformedBox, start, "empty phrase");
    }
    pos_ = close + 1;
    if (pos_ >= raw_.size() || raw_[pos_] != '(') {
      Fail(Kind::kMalformedBox, pos_, "expected '(' after phrase");
    }
    ++pos_;
    SkipBlanks();
    if (Peek() == '<') {
      ReadGridBoxes(segment);
    } else {
      ReadNormBoxes(segment);
    }
    SkipBlanks();
    Expect(')');
    return segment;
  }

  std::size_t pos() const { return pos_; }

 private:
  [[noreturn]] void Fail(Kind kind, std::size_t at, const std::string& what) {
    throw GroundedTextError(kind, at,
                            what + " at offset " + std::to_string(at));
  }

  char Peek() const { return pos_ < raw_.size() ? raw_[pos_] : '\0'; }

  void Expect(char c) {
    if (Peek() != c) {
      Fail(Kind::kMalformedBox, pos_, std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  void SkipBlanks() {
    if (options_.parse_mode != ParseMode::kLenient) return;
    while (pos_ < raw_.size() && IsBlank(raw_[pos_])) ++pos_;
  }

  long ReadInt() {
    const std::size_t start = pos_;
    while (pos_ < raw_.size() &&
           std::isdigit(static_cast<unsigned char>(raw_[pos_]))) {
      ++pos_;
    }
    if (start == pos_ || pos_ - start > 9) {
      Fail(Kind::kMalformedBox, start, "expected a grid index");
    }
    long value = 0;
    std::from_chars(raw_.data() + start, raw_.data() + pos_, value);
    return value;
  }

  double ReadDecimal() {
    const std::size_t start = pos_;
    std::size_t digits = 0;
    while (pos_ < raw_.size() &&
           std::isdigit(static_cast<unsigned char>(raw_[pos_]))) {
      ++pos_;
      ++digits;
    }
    if (Peek() == '.') {
      ++pos_;
      std::size_t frac = 0;
      while (pos_ < raw_.size() &&
             std::isdigit(static_cast<unsigned char>(raw_[pos_]))) {
        ++pos_;
        ++frac;
      }
      if (frac == 0) Fail(Kind::kMalformedBox, start, "bad decimal");
      digits += frac;
    }
    if (digits == 0) Fail(Kind::kMalformedBox, start, "expected a decimal");
    double value = 0.0;
    std::from_chars(raw_.data() + start, raw_.data() + pos_, value);
    return value;
  }

  void CheckMode(BoxMode wanted, std::size_t at) {
    if (options_.box_mode != BoxMode::kMixed && options_.box_mode != wanted) {
      Fail(Kind::kMalformedBox, at,
           wanted == BoxMode::kGrid ? "grid box in normalized mode"
                                    : "normalized box in grid mode");
    }
  }

  void ReadGridBoxes(GroundedSegment& segment) {
    while (true) {
      const std::size_t at = pos_;
      CheckMode(BoxMode::kGrid, at);
      Expect('<');
      SkipBlanks();
      const long l = ReadInt();
      SkipBlanks();
      Expect(',');
      SkipBlanks();
      const long r = ReadInt();
      SkipBlanks();
      Expect('>');
      const GridSpec& grid = options_.grid;
      if (l >= grid.cells() || r >= grid.cells()) {
        Fail(Kind::kOutOfRange, at, "grid index out of range");
      }
      GridBox box{static_cast<int>(l), static_cast<int>(r)};
      if (!box.IsValid(grid)) {
        Fail(Kind::kOutOfRange, at, "grid box corners out of order");
      }
      segment.boxes.emplace_back(box);
      SkipBlanks();
      if (Peek() != ',') break;
      ++pos_;
      SkipBlanks();
      if (Peek() != '<') Fail(Kind::kMalformedBox, pos_, "expected '<'");
    }
  }

  void ReadNormBoxes(GroundedSegment& segment) {
    while (true) {
      const std::size_t at = pos_;
      CheckMode(BoxMode::kNorm, at);
      double v[4];
      for (int k = 0; k < 4; ++k) {
        if (k > 0) {
          SkipBlanks();
          Expect(',');
          SkipBlanks();
        }
        v[k] = ReadDecimal();
      }
      NormBox box{v[0], v[1], v[2], v[3]};
      if (!box.IsValid()) {
        Fail(Kind::kOutOfRange, at, "normalized box out of range");
      }
      segment.boxes.emplace_back(box);
      SkipBlanks();
      if (Peek() != ',') break;
      ++pos_;
      SkipBlanks();
    }
  }

  std::string_view raw_;
  std::size_t pos_;
  const ParseOptions& options_;
};

void AppendPlain(ParseResult& result, std::string_view text, std::size_t begin,
                 std::size_t end) {
  if (text.empty()) return;
  if (!result.text.pieces.empty() &&
      std::holds_alternative<std::string>(result.text.pieces.back())) {
    std::get<std::string>(result.text.pieces.back()).append(text);
    result.sources.back().second = end;
    return;
  }
  result.text.pieces.emplace_back(std::string(text));
  result.sources.emplace_back(begin, end);
}

void CheckPlain(std::string_view text, std::string_view what) {
  if (text.find_first_of("[]") != std::string_view::npos) {
    throw DomainError(std::string(what) + " contains a reserved bracket: " +
                      std::string(text));
  }
}

std::string FormatDecimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void GroundedText::AppendText(std::string_view text) {
  if (text.empty()) return;
  if (!pieces.empty() && std::holds_alternative<std::string>(pieces.back())) {
    std::get<std::string>(pieces.back()).append(text);
  } else {
    pieces.emplace_back(std::string(text));
  }
}

void GroundedText::AppendSegment(GroundedSegment segment) {
  pieces.emplace_back(std::move(segment));
}

bool GroundedText::HasBoxes() const { return BoxCount() > 0; }

std::size_t GroundedText::BoxCount() const {
  std::size_t count = 0;
  for (const auto& piece : pieces) {
    if (const auto* seg = std::get_if<GroundedSegment>(&piece)) {
      count += seg->boxes.size();
    }
  }
  return count;
}

ParseResult Parse(std::string_view raw, const ParseOptions& options) {
  options.grid.Validate();
  const bool lenient = options.parse_mode == ParseMode::kLenient;
  ParseResult result;
  std::size_t plain_start = 0;
  std::size_t i = 0;
  while (i < raw.size()) {
    const char c = raw[i];
    if (c == ']') {
      if (!lenient) {
        throw GroundedTextError(Kind::kMalformedBox, i,
                                "unbalanced ']' at offset " +
                                    std::to_string(i));
      }
      result.diagnostics.push_back({Kind::kMalformedBox, i, "unbalanced ']'"});
      ++i;
      continue;
    }
    if (c != '[') {
      ++i;
      continue;
    }
    SegmentReader reader(raw, i, options);
    try {
      GroundedSegment segment = reader.Read();
      AppendPlain(result, raw.substr(plain_start, i - plain_start),
                  plain_start, i);
      result.text.pieces.emplace_back(std::move(segment));
      result.sources.emplace_back(i, reader.pos());
      i = reader.pos();
      plain_start = i;
    } catch (const GroundedTextError& e) {
      if (!lenient) throw;
      result.diagnostics.push_back({e.kind(), i, e.what()});
      // The phrase's own ']' belongs to the failed segment; skip it too.
      const std::size_t next = raw.find_first_of("[]", i + 1);
      i = next != std::string_view::npos && raw[next] == ']' ? next + 1 : i + 1;
    }
  }
  AppendPlain(result, raw.substr(plain_start), plain_start, raw.size());
  return result;
}

std::string FormatBox(const BoxRef& box) {
  if (const auto* g = std::get_if<GridBox>(&box)) {
    return "<" + std::to_string(g->idx_l) + "," + std::to_string(g->idx_r) +
           ">";
  }
  const auto& n = std::get<NormBox>(box);
  return FormatDecimal(n.x1) + "," + FormatDecimal(n.y1) + "," +
         FormatDecimal(n.x2) + "," + FormatDecimal(n.y2);
}

std::string Serialize(const GroundedText& text, BoxMode mode,
                      const GridSpec& grid) {
  std::string out;
  for (const auto& piece : text.pieces) {
    if (const auto* plain = std::get_if<std::string>(&piece)) {
      CheckPlain(*plain, "plain text");
      out += *plain;
      continue;
    }
    const auto& seg = std::get<GroundedSegment>(piece);
    CheckPlain(seg.phrase, "phrase");
    if (Trim(seg.phrase).empty()) throw DomainError("empty phrase");
    if (seg.boxes.empty()) {
      throw DomainError("segment without boxes: " + seg.phrase);
    }
    out += '[';
    out += seg.phrase;
    out += "](";
    for (std::size_t k = 0; k < seg.boxes.size(); ++k) {
      const BoxRef& box = seg.boxes[k];
      const bool is_grid = std::holds_alternative<GridBox>(box);
      if (is_grid != std::holds_alternative<GridBox>(seg.boxes.front())) {
        throw DomainError("segment '" + seg.phrase + "' mixes box kinds");
      }
      if ((mode == BoxMode::kGrid && !is_grid) ||
          (mode == BoxMode::kNorm && is_grid)) {
        throw DomainError("box mode mismatch in segment '" + seg.phrase + "'");
      }
      if (is_grid) {
        std::get<GridBox>(box).Validate(grid);
      } else {
        std::get<NormBox>(box).Validate();
      }
      if (k > 0) out += ',';
      out += FormatBox(box);
    }
    out += ')';
  }
  return out;
}

std::string StripCoordinates(const GroundedText& text) {
  std::string out;
  bool previous_was_segment = false;
  for (const auto& piece : text.pieces) {
    if (const auto* plain = std::get_if<std::string>(&piece)) {
      out += *plain;
      previous_was_segment = false;
    } else {
      if (previous_was_segment) out += ' ';
      out += std::get<GroundedSegment>(piece).phrase;
      previous_was_segment = true;
    }
  }
  return CollapseWhitespace(out);
}

std::vector<PhraseBox> ExtractPairs(const GroundedText& text,
                                    const GridSpec& grid) {
  std::vector<PhraseBox> pairs;
  for (const auto& piece : text.pieces) {
    const auto* seg = std::get_if<GroundedSegment>(&piece);
    if (seg == nullptr) continue;
    for (const auto& box : seg->boxes) {
      if (const auto* g = std::get_if<GridBox>(&box)) {
        pairs.push_back({seg->phrase, Remap(*g, grid)});
      } else {
        pairs.push_back({seg->phrase, std::get<NormBox>(box)});
      }
    }
  }
  return pairs;
}

}  // namespace giqa
