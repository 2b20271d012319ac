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

#include "ime/encoding.h"

#include "ime/errors.h"

namespace ime {
namespace {

void CheckLength(size_t tokens, int max_positions) {
  if (tokens > static_cast<size_t>(max_positions)) {
    throw OverflowError("encoded length " + std::to_string(tokens) +
                        " exceeds max_positions " +
                        std::to_string(max_positions));
  }
}

void Push(EncodedInput* in, int token, int position) {
  in->token_ids.push_back(token);
  in->position_ids.push_back(position);
  in->target_mask.push_back(false);
  in->targets.push_back(-1);
  in->class_ids.push_back(EncodedInput::kWholeVocab);
}

int RequireIndex(const Vocabulary& vocab, const PinyinToken& token, size_t j) {
  const int index = vocab.PinyinIndex(token);
  if (index < 0) {
    throw UnknownPinyinError(token.value, static_cast<long>(j),
                             "pinyin token '" + token.value +
                                 "' is not in the model vocabulary");
  }
  return index;
}

void MarkTarget(EncodedInput* in, size_t t, int target, int class_id) {
  in->target_mask[t] = true;
  in->targets[t] = target;
  in->class_ids[t] = class_id;
}

}  // namespace

PinyinMode UniformMode(std::span<const PinyinToken> pinyin) {
  if (pinyin.empty()) return PinyinMode::kPerfect;
  for (const auto& p : pinyin) {
    if (p.mode != pinyin.front().mode) {
      throw InvalidArgument("pinyin tokens mix perfect and abbreviated modes");
    }
  }
  return pinyin.front().mode;
}

EncodedInput EncodeBaseline(const Vocabulary& vocab, int max_positions,
                            std::u32string_view context,
                            std::u32string_view target,
                            std::span<const PinyinToken> target_pinyin) {
  if (!target_pinyin.empty() && target_pinyin.size() != target.size()) {
    throw InvalidArgument("target pinyin length differs from target length");
  }
  const size_t n = context.size();
  CheckLength(1 + n + target.size(), max_positions);
  EncodedInput in;
  Push(&in, vocab.bos_id(), 0);
  for (size_t i = 0; i < n; ++i) {
    Push(&in, vocab.CharId(context[i]), static_cast<int>(i + 1));
  }
  for (size_t j = 0; j < target.size(); ++j) {
    Push(&in, vocab.CharId(target[j]), static_cast<int>(n + 1 + j));
    const int cls = target_pinyin.empty()
                        ? EncodedInput::kWholeVocab
                        : RequireIndex(vocab, target_pinyin[j], j);
    // Position n + j predicts target j.
    MarkTarget(&in, n + j, vocab.CharId(target[j]), cls);
  }
  return in;
}

EncodedInput EncodeConcat(const Vocabulary& vocab, int max_positions,
                          std::u32string_view context,
                          std::span<const PinyinToken> pinyin,
                          std::u32string_view target) {
  if (!target.empty() && pinyin.size() != target.size()) {
    throw InvalidArgument("pinyin length " + std::to_string(pinyin.size()) +
                          " differs from target length " +
                          std::to_string(target.size()));
  }
  UniformMode(pinyin);
  const size_t n = context.size();
  const size_t k = pinyin.size();
  CheckLength(n + k + target.size() + 3, max_positions);

  EncodedInput in;
  Push(&in, vocab.bos_id(), 0);
  for (size_t i = 0; i < n; ++i) {
    Push(&in, vocab.CharId(context[i]), static_cast<int>(i + 1));
  }
  Push(&in, vocab.sep_id(), static_cast<int>(n + 1));
  std::vector<int> pinyin_index(k);
  for (size_t j = 0; j < k; ++j) {
    pinyin_index[j] = RequireIndex(vocab, pinyin[j], j);
    Push(&in, vocab.PinyinTokenId(pinyin[j]), static_cast<int>(n + 2 + j));
  }
  Push(&in, vocab.sep_id(), static_cast<int>(n + k + 2));
  const size_t sep2 = in.size() - 1;
  for (size_t j = 0; j < target.size(); ++j) {
    Push(&in, vocab.CharId(target[j]), TargetPosition(Variant::kConcat,
                                                      static_cast<int>(n),
                                                      static_cast<int>(j)));
    MarkTarget(&in, sep2 + j, vocab.CharId(target[j]), pinyin_index[j]);
  }
  return in;
}

EncodedInput EncodeEmbed(const Vocabulary& vocab, int max_positions,
                         std::u32string_view context,
                         std::span<const std::optional<PinyinToken>> pinyin_of_next,
                         std::u32string_view target) {
  const size_t n = context.size();
  const size_t length = 1 + n + target.size();
  if (pinyin_of_next.size() != length) {
    throw InvalidArgument("pinyin_of_next has " +
                          std::to_string(pinyin_of_next.size()) +
                          " entries for " + std::to_string(length) +
                          " input positions");
  }
  CheckLength(length, max_positions);

  EncodedInput in;
  Push(&in, vocab.bos_id(), 0);
  for (size_t i = 0; i < n; ++i) {
    Push(&in, vocab.CharId(context[i]), static_cast<int>(i + 1));
  }
  for (size_t j = 0; j < target.size(); ++j) {
    Push(&in, vocab.CharId(target[j]), static_cast<int>(n + 1 + j));
  }
  in.pinyin_ids.resize(length);
  for (size_t t = 0; t < length; ++t) {
    in.pinyin_ids[t] = pinyin_of_next[t]
                           ? vocab.PinyinEmbeddingId(*pinyin_of_next[t])
                           : Vocabulary::kUnkPinyin;
  }
  for (size_t t = 0; t + 1 < length; ++t) {
    int cls = EncodedInput::kWholeVocab;
    if (t >= n && pinyin_of_next[t]) {
      cls = RequireIndex(vocab, *pinyin_of_next[t], t - n);
    }
    MarkTarget(&in, t, in.token_ids[t + 1], cls);
  }
  return in;
}

std::vector<std::optional<PinyinToken>> NextPinyin(
    const Lexicon& lexicon, std::u32string_view context,
    std::span<const PinyinToken> target_pinyin, PinyinMode mode,
    bool target_chars) {
  std::vector<std::optional<PinyinToken>> out;
  out.reserve(context.size() + target_pinyin.size() + 1);
  for (char32_t c : context) {
    auto reading = lexicon.DefaultReading(c);
    out.push_back(reading ? std::optional(Lexicon::TokenFor(*reading, mode))
                          : std::nullopt);
  }
  if (target_chars) {
    for (const auto& p : target_pinyin) out.push_back(p);
    out.emplace_back();
  } else {
    if (target_pinyin.empty()) {
      out.emplace_back();
    } else {
      out.emplace_back(target_pinyin.front());
    }
  }
  return out;
}

EncodedInput EncodeExample(const Model& model, const Lexicon& lexicon,
                           std::u32string_view context,
                           std::span<const PinyinToken> pinyin,
                           std::u32string_view target) {
  const auto& vocab = model.vocab();
  const int max_positions = model.config().max_positions;
  switch (model.config().variant) {
    case Variant::kBaseline:
      return EncodeBaseline(vocab, max_positions, context, target,
                            target.empty() ? std::span<const PinyinToken>() : pinyin);
    case Variant::kConcat:
      return EncodeConcat(vocab, max_positions, context, pinyin, target);
    case Variant::kEmbed: {
      auto next = NextPinyin(lexicon, context, pinyin, UniformMode(pinyin),
                             /*target_chars=*/!target.empty());
      return EncodeEmbed(vocab, max_positions, context, next, target);
    }
  }
  throw InvalidArgument("unknown variant");
}

int TargetPosition(Variant variant, int context_length, int j) {
  return variant == Variant::kConcat ? context_length + 2 + j
                                     : context_length + 1 + j;
}

}  // namespace ime
