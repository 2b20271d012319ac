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

#include "ime/lexicon.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "ime/errors.h"
#include "ime/utf8.h"

namespace ime {
namespace {

constexpr std::array<std::string_view, 23> kInitials = {
    "zh", "ch", "sh", "b", "p", "m", "f", "d", "t", "n", "l", "g",
    "k",  "h",  "j",  "q", "x", "r", "z", "c", "s", "y", "w"};

constexpr std::array<std::string_view, 34> kFinals = {
    "a",  "ai",  "an",   "ang", "ao",   "e",  "ei", "en",  "eng",
    "er", "i",   "ia",   "ian", "iang", "iao", "ie", "in",  "ing",
    "iong", "iu", "o",   "ong", "ou",   "u",  "ua", "uai", "uan",
    "uang", "ue", "ui",  "un",  "uo",   "v",  "ve"};

const std::vector<std::string> kNoSyllables;

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

bool IsLowerAscii(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(),
                                   [](char c) { return c >= 'a' && c <= 'z'; });
}

}  // namespace

std::string_view ModeName(PinyinMode mode) {
  return mode == PinyinMode::kPerfect ? "perfect" : "abbrev";
}

PinyinMode ParseMode(std::string_view name) {
  if (name == "perfect") return PinyinMode::kPerfect;
  if (name == "abbrev" || name == "abbreviated") return PinyinMode::kAbbreviated;
  throw InvalidArgument("unknown pinyin mode '" + std::string(name) +
                        "' (expected perfect or abbrev)");
}

std::span<const std::string_view> Initials() { return kInitials; }

bool IsFinal(std::string_view text) {
  return std::find(kFinals.begin(), kFinals.end(), text) != kFinals.end();
}

std::pair<std::string, std::string> Decompose(std::string_view syllable) {
  // kInitials lists the two-letter initials first, so the first hit is the
  // longest prefix.
  std::string_view initial;
  for (std::string_view candidate : kInitials) {
    if (syllable.starts_with(candidate)) {
      initial = candidate;
      break;
    }
  }
  std::string_view rest = syllable.substr(initial.size());
  if (!IsFinal(rest)) {
    throw UnknownPinyinError(std::string(syllable), -1,
                             "'" + std::string(syllable) +
                                 "' does not decompose into initial + final");
  }
  return {std::string(initial), std::string(rest)};
}

std::string AbbreviationKey(std::string_view syllable) {
  auto [initial, final_part] = Decompose(syllable);
  if (!initial.empty()) return initial;
  return final_part.substr(0, 1);
}

Lexicon Lexicon::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open lexicon file");
  return Parse(in, path.string());
}

Lexicon Lexicon::Parse(std::istream& in, const std::string& source_name) {
  Lexicon lex;
  std::unordered_set<std::string> seen_syllables;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    auto fields = SplitTabs(line);
    if (fields.size() < 2 || fields.size() > 3) {
      throw ParseError(source_name, line_no,
                       "expected <char>\\t<syllable>[\\t<rank>]");
    }
    std::u32string ch;
    try {
      ch = DecodeUtf8(fields[0]);
    } catch (const InvalidArgument& e) {
      throw ParseError(source_name, line_no, e.what());
    }
    if (ch.size() != 1) {
      throw ParseError(source_name, line_no,
                       "first field must be exactly one character");
    }
    if (!IsLowerAscii(fields[1])) {
      throw ParseError(source_name, line_no,
                       "syllable must be lowercase Latin letters");
    }
    if (fields.size() == 3) {
      long rank = 0;
      auto [ptr, ec] = std::from_chars(fields[2].data(),
                                       fields[2].data() + fields[2].size(), rank);
      if (ec != std::errc() || ptr != fields[2].data() + fields[2].size()) {
        throw ParseError(source_name, line_no, "rank must be an integer");
      }
    }

    PinyinSyllable syl;
    syl.text = std::string(fields[1]);
    try {
      std::tie(syl.initial, syl.final_part) = ime::Decompose(syl.text);
    } catch (const UnknownPinyinError& e) {
      throw ParseError(source_name, line_no, e.what());
    }

    const char32_t c = ch[0];
    auto [it, inserted] = lex.char_index_.try_emplace(c, lex.chars_.size());
    if (inserted) {
      lex.chars_.push_back(c);
      lex.readings_.emplace_back();
    }
    auto& readings = lex.readings_[it->second];
    for (const auto& r : readings) {
      if (r.text == syl.text) {
        throw ParseError(source_name, line_no,
                         "duplicate reading '" + syl.text + "' for '" +
                             EncodeUtf8(c) + "'");
      }
    }
    readings.push_back(syl);

    if (seen_syllables.insert(syl.text).second) {
      lex.syllables_.push_back(syl.text);
    }
    lex.perfect_to_chars_[syl.text].push_back(c);
    ++lex.row_count_;
  }
  if (lex.row_count_ == 0) {
    throw ParseError(source_name, 0, "lexicon has no rows");
  }

  // Abbreviation classes are derived from the perfect ones. Keys are listed
  // in first-seen order of their syllables.
  for (const auto& syl : lex.syllables_) {
    std::string key = ime::AbbreviationKey(syl);
    auto& expansion = lex.abbrev_to_perfect_[key];
    if (expansion.empty()) lex.keys_.push_back(key);
    expansion.push_back(syl);
  }
  // Character order inside an abbreviation class follows the file, not the
  // syllable order, so rank order survives the union.
  for (const auto& key : lex.keys_) lex.abbrev_to_chars_[key];
  for (size_t i = 0; i < lex.chars_.size(); ++i) {
    std::vector<std::string> keys_for_char;
    for (const auto& r : lex.readings_[i]) {
      std::string key = ime::AbbreviationKey(r.text);
      if (std::find(keys_for_char.begin(), keys_for_char.end(), key) ==
          keys_for_char.end()) {
        keys_for_char.push_back(key);
        lex.abbrev_to_chars_[key].push_back(lex.chars_[i]);
      }
    }
  }
  return lex;
}

std::span<const PinyinSyllable> Lexicon::Readings(char32_t c) const {
  auto it = char_index_.find(c);
  if (it == char_index_.end()) return {};
  return readings_[it->second];
}

std::optional<PinyinSyllable> Lexicon::DefaultReading(char32_t c) const {
  auto it = char_index_.find(c);
  if (it == char_index_.end()) return std::nullopt;
  return readings_[it->second].front();
}

bool Lexicon::IsSyllable(std::string_view text) const {
  return perfect_to_chars_.contains(std::string(text));
}

bool Lexicon::IsAbbreviationKey(std::string_view key) const {
  return abbrev_to_chars_.contains(std::string(key));
}

bool Lexicon::Contains(const PinyinToken& token) const {
  return token.mode == PinyinMode::kPerfect ? IsSyllable(token.value)
                                            : IsAbbreviationKey(token.value);
}

std::pair<std::string, std::string> Lexicon::Decompose(
    std::string_view syllable) const {
  if (!IsSyllable(syllable)) {
    throw UnknownPinyinError(std::string(syllable), -1,
                             "unknown syllable '" + std::string(syllable) + "'");
  }
  return ime::Decompose(syllable);
}

std::string Lexicon::AbbreviationKey(std::string_view syllable) const {
  Decompose(syllable);
  return ime::AbbreviationKey(syllable);
}

PinyinSyllable Lexicon::Syllable(std::string_view text) const {
  auto [initial, final_part] = Decompose(text);
  return {std::string(text), std::move(initial), std::move(final_part)};
}

const std::vector<char32_t>& Lexicon::LegitimateChars(
    const PinyinToken& token) const {
  const auto& table = token.mode == PinyinMode::kPerfect ? perfect_to_chars_
                                                         : abbrev_to_chars_;
  auto it = table.find(token.value);
  if (it == table.end()) {
    throw UnknownPinyinError(
        token.value, -1,
        "'" + token.value + "' is not a known " +
            std::string(token.mode == PinyinMode::kPerfect
                            ? "syllable"
                            : "abbreviation key"));
  }
  return it->second;
}

bool Lexicon::Matches(char32_t c, const PinyinToken& token) const {
  for (const auto& r : Readings(c)) {
    if (token.mode == PinyinMode::kPerfect ? r.text == token.value
                                           : ime::AbbreviationKey(r.text) ==
                                                 token.value) {
      return true;
    }
  }
  return false;
}

const std::vector<std::string>& Lexicon::Expansion(std::string_view key) const {
  auto it = abbrev_to_perfect_.find(std::string(key));
  return it == abbrev_to_perfect_.end() ? kNoSyllables : it->second;
}

std::vector<std::optional<PinyinSyllable>> Lexicon::Annotate(
    std::u32string_view sentence) const {
  std::vector<std::optional<PinyinSyllable>> out;
  out.reserve(sentence.size());
  for (char32_t c : sentence) out.push_back(DefaultReading(c));
  return out;
}

PinyinToken Lexicon::TokenFor(const PinyinSyllable& syllable, PinyinMode mode) {
  if (mode == PinyinMode::kPerfect) return {mode, syllable.text};
  return {mode, syllable.initial.empty() ? syllable.final_part.substr(0, 1)
                                         : syllable.initial};
}

void Lexicon::Write(std::ostream& out) const {
  for (size_t i = 0; i < chars_.size(); ++i) {
    for (const auto& r : readings_[i]) {
      out << EncodeUtf8(chars_[i]) << '\t' << r.text << '\t' << (i + 1) << '\n';
    }
  }
}

}  // namespace ime
