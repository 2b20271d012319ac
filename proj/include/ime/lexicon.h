// Copyright 2026 The pinyin-ime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IME_LEXICON_H_
#define IME_LEXICON_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ime {

enum class PinyinMode { kPerfect, kAbbreviated };

// "perfect" / "abbrev".
std::string_view ModeName(PinyinMode mode);
// Accepts "perfect", "abbrev" and "abbreviated".
PinyinMode ParseMode(std::string_view name);

struct PinyinSyllable {
  std::string text;
  std::string initial;  // may be empty ("an")
  std::string final_part;

  bool operator==(const PinyinSyllable&) const = default;
};

// One typed pinyin unit. For kPerfect `value` is a full syllable, for
// kAbbreviated it is an abbreviation key ("w", "zh", ...).
struct PinyinToken {
  PinyinMode mode = PinyinMode::kPerfect;
  std::string value;

  bool operator==(const PinyinToken&) const = default;
};

// The fixed initial inventory, two-letter initials included. "y" and "w"
// count as initials.
std::span<const std::string_view> Initials();
bool IsFinal(std::string_view text);

// Splits a syllable into (initial, final) by longest-prefix match against
// Initials(). Throws UnknownPinyinError when the remainder is not a final.
std::pair<std::string, std::string> Decompose(std::string_view syllable);

// The key a user types for `syllable` in abbreviated mode: its initial, or
// the first letter of the final for zero-initial syllables ("an" -> "a").
std::string AbbreviationKey(std::string_view syllable);

// Character <-> pinyin tables. Immutable once loaded.
//
// Characters inside every class keep lexicon file order, so downstream
// tie-breaking is deterministic.
class Lexicon {
 public:
  // File format: `<char>\t<syllable>[\t<rank>]` per row, `#` comments,
  // rows of one character in preference order (first = default reading).
  static Lexicon Load(const std::filesystem::path& path);
  static Lexicon Parse(std::istream& in, const std::string& source_name);

  // Readings in preference order; empty for characters without pinyin.
  std::span<const PinyinSyllable> Readings(char32_t c) const;
  bool HasReading(char32_t c) const { return char_index_.contains(c); }
  std::optional<PinyinSyllable> DefaultReading(char32_t c) const;

  bool IsSyllable(std::string_view text) const;
  bool IsAbbreviationKey(std::string_view key) const;
  bool Contains(const PinyinToken& token) const;

  // Inventory-checked versions of the free functions above.
  std::pair<std::string, std::string> Decompose(std::string_view syllable) const;
  std::string AbbreviationKey(std::string_view syllable) const;
  PinyinSyllable Syllable(std::string_view text) const;

  // Characters that may be emitted for `token`. Never empty; throws
  // UnknownPinyinError when the token is not in the lexicon.
  const std::vector<char32_t>& LegitimateChars(const PinyinToken& token) const;

  // True if any reading of `c` matches `token`.
  bool Matches(char32_t c, const PinyinToken& token) const;

  // Syllables an abbreviation key stands for, in inventory order.
  const std::vector<std::string>& Expansion(std::string_view key) const;

  // Default reading per character; nullopt for digits, punctuation, Latin.
  std::vector<std::optional<PinyinSyllable>> Annotate(
      std::u32string_view sentence) const;

  static PinyinToken TokenFor(const PinyinSyllable& syllable, PinyinMode mode);

  const std::vector<char32_t>& Characters() const { return chars_; }
  const std::vector<std::string>& Syllables() const { return syllables_; }
  const std::vector<std::string>& AbbreviationKeys() const { return keys_; }
  size_t row_count() const { return row_count_; }

  // Normalized rows (`char\tsyllable\trank`), rank = character order.
  void Write(std::ostream& out) const;

 private:
  Lexicon() = default;

  std::vector<char32_t> chars_;
  std::unordered_map<char32_t, size_t> char_index_;
  std::vector<std::vector<PinyinSyllable>> readings_;  // by char_index_

  std::vector<std::string> syllables_;
  std::unordered_map<std::string, std::vector<char32_t>> perfect_to_chars_;

  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::vector<std::string>> abbrev_to_perfect_;
  std::unordered_map<std::string, std::vector<char32_t>> abbrev_to_chars_;

  size_t row_count_ = 0;
};

}  // namespace ime

#endif  // IME_LEXICON_H_
