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

#ifndef IME_DECODER_H_
#define IME_DECODER_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ime/lexicon.h"
#include "ime/model.h"
#include "ime/vocabulary.h"

namespace ime {

struct DecodeRequest {
  std::u32string context;
  std::vector<PinyinToken> pinyin;  // one mode, length >= 1
  int beam_size = 16;
  int top_k = 10;
};

struct Candidate {
  std::u32string text;
  double score = 0.0;  // sum of per-step constrained natural-log probabilities
};

// Non-increasing scores; ties ordered by text.
using CandidateList = std::vector<Candidate>;

struct ScoredChar {
  int char_id;
  char32_t ch;
  double log_prob;
};

// Fixed-length pinyin-constrained beam search. Holds references to the
// model and lexicon, which must outlive it; safe for concurrent use.
class Decoder {
 public:
  Decoder(const Model& model, const Lexicon& lexicon);

  const Model& model() const { return *model_; }
  const Lexicon& lexicon() const { return *lexicon_; }

  // Restricted-softmax log-probabilities of the class members of `token`,
  // in class order, given the hidden state of the predicting position.
  std::vector<ScoredChar> StepDistribution(const RowVector& hidden,
                                           const PinyinToken& token) const;

  // At step j every live hypothesis is expanded by every legitimate
  // character of pinyin[j]; the beam_size best cumulative scores survive,
  // ties broken by the lexicographic order of the hypothesis text.
  // Returns the best top_k full-length hypotheses.
  CandidateList BeamSearch(const DecodeRequest& request) const;

  // Validates raw pinyin strings for `mode`; errors name the token and its
  // position.
  std::vector<PinyinToken> ResolvePinyin(std::span<const std::string> raw,
                                         PinyinMode mode) const;

  CandidateList Predict(std::u32string_view context,
                        std::span<const std::string> raw_pinyin,
                        PinyinMode mode, int beam_size = 16,
                        int top_k = 10) const;

  // Throws InvalidArgument / UnknownPinyinError / OverflowError.
  void Validate(const DecodeRequest& request) const;

 private:
  const Model* model_;
  const Lexicon* lexicon_;
  ClassTable classes_;
};

inline CandidateList BeamSearch(const Model& model, const Lexicon& lexicon,
                                const DecodeRequest& request) {
  return Decoder(model, lexicon).BeamSearch(request);
}

}  // namespace ime

#endif  // IME_DECODER_H_
