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

#include <random>

#include <gtest/gtest.h>

#include "giqa/errors.h"

namespace giqa {
namespace {

using Kind = GroundedTextError::Kind;

const ParseOptions kMixedStrict{BoxMode::kMixed, ParseMode::kStrict, {}};
const ParseOptions kMixedLenient{BoxMode::kMixed, ParseMode::kLenient, {}};

Kind StrictErrorKind(std::string_view raw, const ParseOptions& options = {}) {
  try {
    Parse(raw, options);
  } catch (const GroundedTextError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << raw;
  return Kind::kMalformedBox;
}

TEST(ParseTest, SingleGridSegment) {
  const auto r = Parse("The [blurry hands](<245,287>) reduce quality");
  ASSERT_EQ(r.text.pieces.size(), 3u);
  EXPECT_EQ(std::get<std::string>(r.text.pieces[0]), "The ");
  const auto& seg = std::get<GroundedSegment>(r.text.pieces[1]);
  EXPECT_EQ(seg.phrase, "blurry hands");
  ASSERT_EQ(seg.boxes.size(), 1u);
  EXPECT_EQ(std::get<GridBox>(seg.boxes[0]), (GridBox{245, 287}));
  EXPECT_EQ(std::get<std::string>(r.text.pieces[2]), " reduce quality");
}

TEST(ParseTest, PlainText) {
  const auto r = Parse("no boxes here");
  ASSERT_EQ(r.text.pieces.size(), 1u);
  EXPECT_EQ(std::get<std::string>(r.text.pieces[0]), "no boxes here");
  EXPECT_FALSE(r.text.HasBoxes());
  // Parentheses and angle brackets outside segments are plain text.
  EXPECT_EQ(Parse("a (b) <1,2> c").text.pieces.size(), 1u);
}

TEST(ParseTest, StrictErrors) {
  EXPECT_EQ(StrictErrorKind("[hands](<245,>"), Kind::kMalformedBox);
  EXPECT_EQ(StrictErrorKind("[hands](<245,287>"), Kind::kMalformedBox);
  EXPECT_EQ(StrictErrorKind("[hands]"), Kind::kMalformedBox);
  EXPECT_EQ(StrictErrorKind("[](<1,2>)"), Kind::kMalformedBox);
  EXPECT_EQ(StrictErrorKind("stray ] here"), Kind::kMalformedBox);
  EXPECT_EQ(StrictErrorKind("[a](<1, 2>)"), Kind::kMalformedBox);
  EXPECT_EQ(StrictErrorKind("[a](<0,400>)"), Kind::kOutOfRange);
  EXPECT_EQ(StrictErrorKind("[a](<19,20>)"), Kind::kOutOfRange);
  EXPECT_EQ(StrictErrorKind("[a](0.5,0.1,0.4,0.2)", kMixedStrict), Kind::kOutOfRange);
  EXPECT_EQ(StrictErrorKind("[a](0.1,0.2,0.3,0.4)"), Kind::kMalformedBox);
  EXPECT_EQ(StrictErrorKind("[a](<1,2>)", {BoxMode::kNorm}), Kind::kMalformedBox);
}

TEST(ParseTest, ErrorOffsetPointsAtSegment) {
  try {
    Parse("abc [a](<1,x>)");
    FAIL();
  } catch (const GroundedTextError& e) {
    EXPECT_EQ(e.offset(), 11u);
  }
}

TEST(ParseTest, MultipleBoxesAndNormMode) {
  const auto r = Parse("[sky](0.00,0.00,1.00,0.20,0.5,0.5,0.6,0.6)", {BoxMode::kNorm});
  const auto& seg = std::get<GroundedSegment>(r.text.pieces[0]);
  ASSERT_EQ(seg.boxes.size(), 2u);
  EXPECT_EQ(std::get<NormBox>(seg.boxes[1]), (NormBox{0.5, 0.5, 0.6, 0.6}));
  const auto g = Parse("[a](<0,21>,<22,43>)");
  EXPECT_EQ(g.text.BoxCount(), 2u);
}

TEST(ParseTest, LenientToleratesBlanksAndKeepsBrokenSegmentsAsText) {
  const auto r = Parse("x [a]( <1 , 2> ) y [b](<1,> z ]", kMixedLenient);
  ASSERT_EQ(r.text.pieces.size(), 3u);
  EXPECT_EQ(std::get<GroundedSegment>(r.text.pieces[1]).boxes.size(), 1u);
  EXPECT_EQ(std::get<std::string>(r.text.pieces[2]), " y [b](<1,> z ]");
  EXPECT_EQ(r.diagnostics.size(), 2u);
}

TEST(SerializeTest, Examples) {
  GroundedText norm;
  norm.AppendSegment({"x", {NormBox{0.01, 0.02, 0.03, 0.04}}});
  EXPECT_EQ(Serialize(norm, BoxMode::kNorm), "[x](0.01,0.02,0.03,0.04)");
  GroundedText grid;
  grid.AppendSegment({"x", {GridBox{0, 399}}});
  EXPECT_EQ(Serialize(grid, BoxMode::kGrid), "[x](<0,399>)");
}

TEST(SerializeTest, Rejections) {
  GroundedText norm;
  norm.AppendSegment({"x", {NormBox{0.1, 0.1, 0.2, 0.2}}});
  EXPECT_THROW(Serialize(norm, BoxMode::kGrid), DomainError);
  GroundedText bracket;
  bracket.AppendText("a [b");
  EXPECT_THROW(Serialize(bracket, BoxMode::kGrid), DomainError);
  GroundedText empty_boxes;
  empty_boxes.AppendSegment({"x", {}});
  EXPECT_THROW(Serialize(empty_boxes, BoxMode::kGrid), DomainError);
  GroundedText mixed;
  mixed.AppendSegment({"x", {GridBox{0, 1}, NormBox{0.1, 0.1, 0.2, 0.2}}});
  EXPECT_THROW(Serialize(mixed, BoxMode::kMixed), DomainError);
  GroundedText bad;
  bad.AppendSegment({"x", {GridBox{5, 0}}});
  EXPECT_THROW(Serialize(bad, BoxMode::kGrid), DomainError);
}

TEST(StripTest, Examples) {
  EXPECT_EQ(StripCoordinates(Parse("The [blurry hands](<245,287>) reduce quality").text),
            "The blurry hands reduce quality");
  EXPECT_EQ(StripCoordinates(Parse("plain text.").text), "plain text.");
  EXPECT_EQ(StripCoordinates(Parse("[a](<1,2>)[b](<3,4>)").text), "a b");
}

TEST(ExtractPairsTest, Examples) {
  const auto one = ExtractPairs(Parse("[a](<0,399>)").text);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].phrase, "a");
  EXPECT_DOUBLE_EQ(one[0].box.x1, 0.025);
  EXPECT_DOUBLE_EQ(one[0].box.y2, 0.975);
  EXPECT_TRUE(ExtractPairs(Parse("plain").text).empty());
  const auto two = ExtractPairs(Parse("[a](<0,0>,<210,210>)").text);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[1].phrase, "a");
  EXPECT_DOUBLE_EQ(two[1].box.x1, 0.525);
}

// Random valid grounded text. Plain runs avoid brackets; norm values have
// two decimals so they survive the %.2f rendering.
GroundedText RandomText(std::mt19937_64& rng, const GridSpec& grid) {
  static const std::string kPlain = "abcdefgh xyz.,;:!?()<>0123456789-'\"";
  static const std::string kPhrase = "abcdefghijklmnop qrstuvwxyz-0123456789()<>,.";
  auto draw = [&](const std::string& alphabet, std::size_t len) {
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
    return s;
  };
  auto fraction = [&] { return static_cast<double>(rng() % 101) / 100.0; };
  GroundedText text;
  const std::size_t pieces = rng() % 7;
  for (std::size_t p = 0; p < pieces; ++p) {
    if (rng() % 2 == 0) {
      text.AppendText(draw(kPlain, 1 + rng() % 12));
      continue;
    }
    GroundedSegment seg;
    seg.phrase = "p" + draw(kPhrase, rng() % 10);
    const bool grid_kind = rng() % 2 == 0;
    const std::size_t boxes = 1 + rng() % 3;
    for (std::size_t b = 0; b < boxes; ++b) {
      if (grid_kind) {
        const int r1 = static_cast<int>(rng() % grid.m), r2 = static_cast<int>(rng() % grid.m);
        const int c1 = static_cast<int>(rng() % grid.n), c2 = static_cast<int>(rng() % grid.n);
        seg.boxes.emplace_back(GridBox{std::min(r1, r2) * grid.n + std::min(c1, c2),
                                       std::max(r1, r2) * grid.n + std::max(c1, c2)});
      } else {
        double a = fraction(), b2 = fraction(), c = fraction(), d = fraction();
        if (a > b2) std::swap(a, b2);
        if (c > d) std::swap(c, d);
        seg.boxes.emplace_back(NormBox{a, c, b2, d});
      }
    }
    text.AppendSegment(std::move(seg));
  }
  return text;
}

TEST(GroundedTextPropertyTest, RoundTripOnRandomTexts) {
  std::mt19937_64 rng(77);
  const GridSpec grid{20, 20};
  for (int i = 0; i < 1000; ++i) {
    const GroundedText text = RandomText(rng, grid);
    const std::string wire = Serialize(text, BoxMode::kMixed, grid);
    const GroundedText back = Parse(wire, {BoxMode::kMixed, ParseMode::kStrict, grid}).text;
    ASSERT_EQ(back, text) << wire;
    ASSERT_EQ(Serialize(back, BoxMode::kMixed, grid), wire);
  }
}

TEST(GroundedTextPropertyTest, LenientNeverThrowsAndPreservesInput) {
  std::mt19937_64 rng(31);
  static const std::string kNoise = "ab [](),<>0123456789. ";
  for (int i = 0; i < 2000; ++i) {
    std::string raw;
    const std::size_t len = rng() % 40;
    for (std::size_t k = 0; k < len; ++k) raw += kNoise[rng() % kNoise.size()];
    ParseResult r;
    ASSERT_NO_THROW(r = Parse(raw, kMixedLenient)) << raw;
    std::size_t covered = 0;
    for (std::size_t k = 0; k < r.text.pieces.size(); ++k) {
      const auto [begin, end] = r.sources[k];
      ASSERT_EQ(begin, covered) << raw;
      if (const auto* plain = std::get_if<std::string>(&r.text.pieces[k])) {
        ASSERT_EQ(*plain, raw.substr(begin, end - begin));
      }
      covered = end;
    }
    ASSERT_EQ(covered, raw.size()) << raw;
  }
}

TEST(GroundedTextPropertyTest, StripRemovesBoxGroups) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    const GroundedText text = RandomText(rng, {});
    const std::string plain = StripCoordinates(text);
    std::string expected;
    bool previous_segment = false;
    for (const auto& piece : text.pieces) {
      if (const auto* s = std::get_if<std::string>(&piece)) {
        expected += *s;
        previous_segment = false;
      } else {
        if (previous_segment) expected += ' ';
        expected += std::get<GroundedSegment>(piece).phrase;
        previous_segment = true;
      }
    }
    std::string collapsed;
    for (char c : expected) {
      if (c == ' ' && (collapsed.empty() || collapsed.back() == ' ')) continue;
      collapsed += c;
    }
    while (!collapsed.empty() && collapsed.back() == ' ') collapsed.pop_back();
    EXPECT_EQ(plain, collapsed);
  }
}

}  // namespace
}  // namespace giqa
