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

#ifndef IME_ENCODING_H_
#define IME_ENCODING_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ime/lexicon.h"
#include "ime/model.h"
#include "ime/vocabulary.h"

namespace ime {

// Input layouts of the three variants. Every layout starts with BOS at
// position 0, so context character i (1-based) sits at position i.
//
//   baseline: [BOS, w_1..w_n, t_1..t_k]
//   concat:   [BOS, w_1..w_n, SEP, p_1..p_k, SEP, t_1..t_k]
//             positions 0..n, n+1, n+2..n+k+1, n+k+2, n+2..n+k+1
//             (t_j reuses the position of p_j)
//   embed:    [BOS, w_1..w_n, t_1..t_k], each position also carrying the
//             pinyin of the next character ([unk] when it has none)
//
// An empty target yields the inference prefix of the layout.

// `target_pinyin`, when given, fills class_ids for PC-loss training.
EncodedInput EncodeBaseline(const Vocabulary& vocab, int max_positions,
                            std::u32string_view context,
                            std::u32string_view target,
                            std::span<const PinyinToken> target_pinyin = {});

// Requires |pinyin| == |target| unless target is empty, and one mode.
EncodedInput EncodeConcat(const Vocabulary& vocab, int max_positions,
                          std::u32string_view context,
                          std::span<const PinyinToken> pinyin,
                          std::u32string_view target);

// `pinyin_of_next[t]` is the pinyin of the character following input
// position t; one entry per input position (1 + |context| + |target|).
// Every prediction is in the loss; class ids are set for positions that
// predict target characters.
EncodedInput EncodeEmbed(const Vocabulary& vocab, int max_positions,
                         std::u32string_view context,
                         std::span<const std::optional<PinyinToken>> pinyin_of_next,
                         std::u32string_view target);

// pinyin_of_next for EncodeEmbed: context characters use their default
// reading, target characters use `target_pinyin`. With `target_chars` false
// the result covers the inference prefix only ([BOS, context]).
std::vector<std::optional<PinyinToken>> NextPinyin(
    const Lexicon& lexicon, std::u32string_view context,
    std::span<const PinyinToken> target_pinyin, PinyinMode mode,
    bool target_chars = true);

// Variant dispatch used by training and tests. An empty target gives the
// inference prefix.
EncodedInput EncodeExample(const Model& model, const Lexicon& lexicon,
                           std::u32string_view context,
                           std::span<const PinyinToken> pinyin,
                           std::u32string_view target);

// Position id of target character j (0-based) for a context of length n.
int TargetPosition(Variant variant, int context_length, int j);

// Throws InvalidArgument when the tokens mix modes.
PinyinMode UniformMode(std::span<const PinyinToken> pinyin);

}  // namespace ime

#endif  // IME_ENCODING_H_
