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

#ifndef IME_VOCABULARY_H_
#define IME_VOCABULARY_H_

#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ime/lexicon.h"

namespace ime {

// Id assignment shared by the model, the encoders and the decoder.
//
// Input token ids: [0, char_count) characters with 0 = [UNK],
// char_count = BOS, char_count + 1 = SEP, then one id per pinyin token
// (perfect syllables first, abbreviation keys after). The two pinyin
// ranges never share rows, so each mode has its own vocabulary.
//
// Pinyin embedding ids (Embed variant): 0 = [unk], then 1 + PinyinIndex.
class Vocabulary {
 public:
  static constexpr int kUnkChar = 0;
  static constexpr int kUnkPinyin = 0;

  Vocabulary() = default;
  Vocabulary(std::vector<char32_t> chars, std::vector<std::string> syllables,
             std::vector<std::string> keys);

  // Lexicon characters in file order, then `extra_symbols` (deduplicated,
  // sorted by code point) for characters without pinyin.
  static Vocabulary Build(const Lexicon& lexicon,
                          std::u32string_view extra_symbols = {});

  int char_count() const { return static_cast<int>(chars_.size()) + 1; }
  int CharId(char32_t c) const;
  char32_t Char(int id) const;
  const std::vector<char32_t>& chars() const { return chars_; }

  int bos_id() const { return char_count(); }
  int sep_id() const { return char_count() + 1; }
  int input_size(bool with_pinyin_tokens) const {
    return char_count() + 2 + (with_pinyin_tokens ? pinyin_count() : 0);
  }

  int pinyin_count() const {
    return static_cast<int>(syllables_.size() + keys_.size());
  }
  // -1 when the token is not in the vocabulary.
  int PinyinIndex(const PinyinToken& token) const;
  PinyinToken PinyinAt(int index) const;
  int PinyinTokenId(const PinyinToken& token) const;
  int PinyinEmbeddingId(const PinyinToken& token) const;

  const std::vector<std::string>& syllables() const { return syllables_; }
  const std::vector<std::string>& keys() const { return keys_; }

  bool operator==(const Vocabulary& other) const {
    return chars_ == other.chars_ && syllables_ == other.syllables_ &&
           keys_ == other.keys_;
  }

 private:
  std::vector<char32_t> chars_;
  std::unordered_map<char32_t, int> char_ids_;
  std::vector<std::string> syllables_;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, int> syllable_index_;
  std::unordered_map<std::string, int> key_index_;
};

// Legitimate classes expressed as character ids of a given vocabulary.
class ClassTable {
 public:
  ClassTable(const Lexicon& lexicon, const Vocabulary& vocab);

  // Throws UnknownPinyinError for tokens outside the lexicon, or whose
  // characters are all missing from the vocabulary.
  const std::vector<int>& Ids(const PinyinToken& token) const;
  // Class of vocabulary pinyin index `index`.
  const std::vector<int>& Ids(int pinyin_index) const;

 private:
  std::unordered_set<std::string> lexicon_tokens_;  // "p:wo", "a:w"
  std::vector<std::vector<int>> by_index_;
  std::unordered_map<std::string, std::vector<int>> perfect_;
  std::unordered_map<std::string, std::vector<int>> abbrev_;
};

}  // namespace ime

#endif  // IME_VOCABULARY_H_
