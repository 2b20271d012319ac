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

#include "ime/vocabulary.h"

#include <algorithm>
#include <unordered_set>

#include "ime/errors.h"

namespace ime {

Vocabulary::Vocabulary(std::vector<char32_t> chars,
                       std::vector<std::string> syllables,
                       std::vector<std::string> keys)
    : chars_(std::move(chars)),
      syllables_(std::move(syllables)),
      keys_(std::move(keys)) {
  for (size_t i = 0; i < chars_.size(); ++i) {
    if (!char_ids_.emplace(chars_[i], static_cast<int>(i) + 1).second) {
      throw InvalidArgument("duplicate character in vocabulary");
    }
  }
  for (size_t i = 0; i < syllables_.size(); ++i) {
    syllable_index_.emplace(syllables_[i], static_cast<int>(i));
  }
  for (size_t i = 0; i < keys_.size(); ++i) {
    key_index_.emplace(keys_[i], static_cast<int>(i));
  }
}

Vocabulary Vocabulary::Build(const Lexicon& lexicon,
                             std::u32string_view extra_symbols) {
  std::vector<char32_t> chars = lexicon.Characters();
  std::unordered_set<char32_t> known(chars.begin(), chars.end());
  std::vector<char32_t> extra;
  for (char32_t c : extra_symbols) {
    if (c == U'\n' || c == U'\r') continue;
    if (known.insert(c).second) extra.push_back(c);
  }
  std::sort(extra.begin(), extra.end());
  chars.insert(chars.end(), extra.begin(), extra.end());
  return Vocabulary(std::move(chars), lexicon.Syllables(),
                    lexicon.AbbreviationKeys());
}

int Vocabulary::CharId(char32_t c) const {
  auto it = char_ids_.find(c);
  return it == char_ids_.end() ? kUnkChar : it->second;
}

char32_t Vocabulary::Char(int id) const {
  if (id <= 0 || id > static_cast<int>(chars_.size())) return U'�';
  return chars_[id - 1];
}

int Vocabulary::PinyinIndex(const PinyinToken& token) const {
  if (token.mode == PinyinMode::kPerfect) {
    auto it = syllable_index_.find(token.value);
    return it == syllable_index_.end() ? -1 : it->second;
  }
  auto it = key_index_.find(token.value);
  return it == key_index_.end()
             ? -1
             : static_cast<int>(syllables_.size()) + it->second;
}

PinyinToken Vocabulary::PinyinAt(int index) const {
  const int n = static_cast<int>(syllables_.size());
  if (index < n) return {PinyinMode::kPerfect, syllables_.at(index)};
  return {PinyinMode::kAbbreviated, keys_.at(index - n)};
}

int Vocabulary::PinyinTokenId(const PinyinToken& token) const {
  const int index = PinyinIndex(token);
  if (index < 0) {
    throw UnknownPinyinError(token.value, -1,
                             "pinyin token '" + token.value +
                                 "' is not in the model vocabulary");
  }
  return char_count() + 2 + index;
}

int Vocabulary::PinyinEmbeddingId(const PinyinToken& token) const {
  const int index = PinyinIndex(token);
  return index < 0 ? kUnkPinyin : index + 1;
}

namespace {
std::string TokenKey(const PinyinToken& token) {
  return (token.mode == PinyinMode::kPerfect ? "p:" : "a:") + token.value;
}
}  // namespace

ClassTable::ClassTable(const Lexicon& lexicon, const Vocabulary& vocab) {
  auto to_ids = [&](const std::vector<char32_t>& chars) {
    std::vector<int> ids;
    ids.reserve(chars.size());
    for (char32_t c : chars) {
      int id = vocab.CharId(c);
      if (id != Vocabulary::kUnkChar) ids.push_back(id);
    }
    return ids;
  };
  for (const auto& syl : lexicon.Syllables()) {
    lexicon_tokens_.insert(TokenKey({PinyinMode::kPerfect, syl}));
    auto ids = to_ids(lexicon.LegitimateChars({PinyinMode::kPerfect, syl}));
    if (!ids.empty()) perfect_.emplace(syl, std::move(ids));
  }
  for (const auto& key : lexicon.AbbreviationKeys()) {
    lexicon_tokens_.insert(TokenKey({PinyinMode::kAbbreviated, key}));
    auto ids = to_ids(lexicon.LegitimateChars({PinyinMode::kAbbreviated, key}));
    if (!ids.empty()) abbrev_.emplace(key, std::move(ids));
  }
  by_index_.resize(vocab.pinyin_count());
  for (int i = 0; i < vocab.pinyin_count(); ++i) {
    PinyinToken token = vocab.PinyinAt(i);
    const auto& table =
        token.mode == PinyinMode::kPerfect ? perfect_ : abbrev_;
    auto it = table.find(token.value);
    if (it != table.end()) by_index_[i] = it->second;
  }
}

const std::vector<int>& ClassTable::Ids(const PinyinToken& token) const {
  const auto& table = token.mode == PinyinMode::kPerfect ? perfect_ : abbrev_;
  auto it = table.find(token.value);
  if (it != table.end()) return it->second;
  // Distinguish "not in lexicon" from "no character of the class is known
  // to the model".
  if (!lexicon_tokens_.contains(TokenKey(token))) {
    throw UnknownPinyinError(
        token.value, -1,
        "'" + token.value + "' is not a known " +
            std::string(token.mode == PinyinMode::kPerfect ? "syllable"
                                                           : "abbreviation key"));
  }
  throw UnknownPinyinError(token.value, -1,
                           "no character for '" + token.value +
                               "' is in the model vocabulary");
}

const std::vector<int>& ClassTable::Ids(int pinyin_index) const {
  const auto& ids = by_index_.at(pinyin_index);
  if (ids.empty()) {
    throw UnknownPinyinError(std::to_string(pinyin_index), -1,
                             "empty class for pinyin index");
  }
  return ids;
}

}  // namespace ime
