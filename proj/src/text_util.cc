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
#include "giqa/text_util.h"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <array>
#include <cctype>

namespace giqa {
namespace {

bool IsWordByte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u);
}

bool IsSpace(char c) { return std::isspace(static_cast<unsigned char>(c)); }

std::string HexOf(const unsigned char* digest, std::size_t len) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (std::size_t i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace

std::string ToLower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string CollapseWhitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (IsSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string Trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && IsSpace(text[b])) ++b;
  while (e > b && IsSpace(text[e - 1])) --e;
  return std::string(text.substr(b, e - b));
}

std::vector<std::string> WordTokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (IsWordByte(c)) {
      current.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> ContentTokens(std::string_view text) {
  std::vector<std::string> out;
  for (auto& token : WordTokens(text)) {
    if (!Stopwords().contains(token)) out.push_back(std::move(token));
  }
  return out;
}

const std::set<std::string, std::less<>>& Stopwords() {
  static const std::set<std::string, std::less<>> kStopwords = {
      "a",     "an",   "the",   "and",  "or",    "but",   "of",   "in",
      "on",    "at",   "to",    "for",  "with",  "by",    "from", "as",
      "is",    "are",  "was",   "were", "be",    "been",  "being", "it",
      "its",   "this", "that",  "these", "those", "there", "their", "they",
      "them",  "he",   "she",   "his",  "her",   "we",    "you",  "i",
      "do",    "does", "did",   "has",  "have",  "had",   "not",  "what",
      "which", "how"};
  return kStopwords;
}

std::optional<bool> FirstYesNo(std::string_view text) {
  for (const auto& token : WordTokens(text)) {
    if (token == "yes") return true;
    if (token == "no") return false;
  }
  return std::nullopt;
}

std::optional<std::size_t> FindWord(std::string_view haystack,
                                    std::string_view needle) {
  if (needle.empty() || needle.size() > haystack.size()) return std::nullopt;
  const std::string hay = ToLower(haystack);
  const std::string pat = ToLower(needle);
  for (std::size_t pos = hay.find(pat); pos != std::string::npos;
       pos = hay.find(pat, pos + 1)) {
    const bool left_ok = pos == 0 || !IsWordByte(hay[pos - 1]) ||
                         !IsWordByte(pat.front());
    const std::size_t end = pos + pat.size();
    const bool right_ok = end == hay.size() || !IsWordByte(hay[end]) ||
                          !IsWordByte(pat.back());
    if (left_ok && right_ok) return pos;
  }
  return std::nullopt;
}

std::string Sha256Hex(std::string_view data) {
  std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(),
         digest.data());
  return HexOf(digest.data(), digest.size());
}

std::string Sha256Hex(std::span<const std::uint8_t> data) {
  return Sha256Hex(std::string_view(
      reinterpret_cast<const char*>(data.data()), data.size()));
}

std::string Base64Encode(std::span<const std::uint8_t> data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  const int written = EVP_EncodeBlock(
      reinterpret_cast<unsigned char*>(out.data()), data.data(),
      static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(written));
  return out;
}

std::uint64_t DeriveSeed(std::uint64_t base, std::string_view label) {
  const std::string hex =
      Sha256Hex(std::to_string(base) + ":" + std::string(label));
  return std::stoull(hex.substr(0, 16), nullptr, 16);
}

std::vector<std::string> SplitLines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

}  // namespace giqa
