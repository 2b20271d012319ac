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

// Independent reference implementations the tests compare the library
// against. They favor obviousness over speed: plain loops, long double
// accumulation, exhaustive enumeration.

#ifndef IME_TESTS_ORACLES_H_
#define IME_TESTS_ORACLES_H_

#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ime/decoder.h"
#include "ime/lexicon.h"
#include "ime/model.h"

namespace ime::testing {

std::filesystem::path DataPath(const std::string& relative);
const Lexicon& SmallLexicon();  // data/lexicon/lexicon_small.tsv, cached

// A 12-character lexicon with shared syllables and shared keys, small
// enough that every embedding row matters in a gradient check.
Lexicon TinyLexicon();

// Replaces every parameter with N(0, stddev) so outputs are far from
// uniform.
void RandomizeParams(Model& model, std::mt19937_64& rng, double stddev);

// Logits (T x char_count) by direct summation over the named tensors.
std::vector<std::vector<double>> ReferenceForward(const Model& model,
                                                  const EncodedInput& input);

// log softmax restricted to `ids` (all logits when empty), long double.
double ReferenceLogProb(std::span<const double> logits, int target,
                        std::span<const int> ids);

// Character ids the decoder may emit for `token`.
std::vector<int> ReferenceClass(const Lexicon& lexicon, const Vocabulary& vocab,
                                const PinyinToken& token);

// Scores every element of the product of the classes with a full forward
// pass per hypothesis; sorted by score descending, then text.
CandidateList BruteForceDecode(const Model& model, const Lexicon& lexicon,
                               std::u32string_view context,
                               std::span<const PinyinToken> pinyin);

// Central differences of `f` with respect to every entry of `params`.
std::vector<double> NumericalGradient(const std::function<double()>& f,
                                      std::span<double> params, double eps);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::string worst_tensor;
  size_t checked = 0;
};

// Compares ComputeLoss gradients of a randomly initialized 1-layer model
// over TinyLexicon with central differences. The relative error of one
// entry is |a - n| / max(|a|, |n|, floor); the floor keeps entries whose
// true gradient is below finite-difference resolution from dominating.
GradientCheckResult CheckGradients(Variant variant, bool pc_loss, int d_model,
                                   double eps, double floor, uint64_t seed);

}  // namespace ime::testing

#endif  // IME_TESTS_ORACLES_H_
